#pragma once

#include <vector>

#include "deeprep/tensor.hpp"

namespace deeprep {

struct AdmmConfig {
    double rho = 1e-2;
    double rho_growth = 1.05;
    double rho_cap = 1e6;
    int max_iters = 500;
    double tol = 1e-6;

    void validate() const;
};

// Tensor singular value thresholding: DFT along mode 3, matrix SVT on
// every Fourier frontal slice, inverse DFT. Conjugate-symmetric slices
// are processed once and mirrored, so the inverse is real up to rounding.
Tensor3 tsvt(const Tensor3& t, double tau);

// Sum of nuclear norms of the mode-3 Fourier slices (the objective the
// ADMM solver minimizes subject to the observed entries).
double tnn_objective(const Tensor3& t);

struct TnnResult {
    Tensor3 x;
    bool converged = false;
    int iterations = 0;
    double final_rel_change = 0.0;
    std::vector<double> objective_trace;
};

// Fourier-domain TNN completion by ADMM with a hard data constraint:
// observed entries of the result equal the observation exactly.
TnnResult tnn_complete(const Tensor3& o, const Mask& m, const AdmmConfig& cfg = {});

}  // namespace deeprep
