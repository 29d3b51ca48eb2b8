#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

#include "deeprep/tensor.hpp"

namespace deeprep {

using CMatrix = Eigen::MatrixXcd;

// Relative threshold (w.r.t. the largest singular value) below which a
// singular value does not count toward the numerical rank.
inline constexpr double kDefaultRankTol = 1e-6;

// Thin SVD, M = U * diag(S) * V^T with S non-increasing.
struct SvdResult {
    Matrix U;
    Eigen::VectorXd S;
    Matrix V;
};

struct CSvdResult {
    CMatrix U;
    Eigen::VectorXd S;
    CMatrix V;
};

SvdResult svd(const Matrix& m);
CSvdResult svd(const CMatrix& m);

// Sum of singular values.
double nuclear_norm(const Matrix& m);

// Subgradient U_r * V_r^T of the nuclear norm, keeping the r singular
// vector pairs with sigma > rank_tol * sigma_max (the W term of the
// subdifferential is fixed to zero).
Matrix nuclear_subgrad(const Matrix& m, double rank_tol = kDefaultRankTol);

// Singular value thresholding: U * diag(max(S - tau, 0)) * V^T, the
// proximal operator of tau * ||.||_*.
Matrix svt(const Matrix& m, double tau);
CMatrix svt(const CMatrix& m, double tau);

// Complex-valued 3-mode tensor, same layout as Tensor3.
struct CTensor3 {
    CTensor3() = default;
    CTensor3(Index n1, Index n2, Index n3)
        : dims{n1, n2, n3},
          data(static_cast<std::size_t>(n1 * n2 * n3), std::complex<double>(0.0, 0.0)) {}

    Dims dims{0, 0, 0};
    std::vector<std::complex<double>> data;

    Index n1() const { return dims[0]; }
    Index n2() const { return dims[1]; }
    Index n3() const { return dims[2]; }

    std::complex<double> operator()(Index l, Index j, Index s) const {
        return data[static_cast<std::size_t>((l * dims[1] + j) * dims[2] + s)];
    }
    std::complex<double>& operator()(Index l, Index j, Index s) {
        return data[static_cast<std::size_t>((l * dims[1] + j) * dims[2] + s)];
    }
};

// DFT along mode 3 in the symmetric 1/sqrt(n3) normalization, so the
// transform is unitary and Frobenius norms are preserved. idft_mode3
// inverts it and returns the real part; imaginary residue above
// imag_tol (in absolute value) is an error, below it is truncated.
CTensor3 dft_mode3(const Tensor3& t);
Tensor3 idft_mode3(const CTensor3& t, double imag_tol = 1e-9);

CMatrix c_frontal_slice3(const CTensor3& t, Index k);
void c_set_frontal_slice3(CTensor3& t, Index k, const CMatrix& m);

}  // namespace deeprep
