#include "deeprep/tnn.hpp"

#include <cmath>
#include <stdexcept>

#include "deeprep/linalg.hpp"
#include "deeprep/parallel.hpp"

namespace deeprep {

void AdmmConfig::validate() const {
    if (rho <= 0.0) throw std::invalid_argument("AdmmConfig: rho must be positive");
    if (rho_growth < 1.0) throw std::invalid_argument("AdmmConfig: rho_growth must be >= 1");
    if (tol <= 0.0) throw std::invalid_argument("AdmmConfig: tol must be positive");
    if (max_iters < 1) throw std::invalid_argument("AdmmConfig: max_iters must be >= 1");
}

namespace {

// SVT of every Fourier slice. For real input the spectrum is
// conjugate-symmetric, so slices k and n3-k are related by conjugation:
// only k <= n3/2 is decomposed, the rest is mirrored. Also returns the
// post-threshold objective sum_k ||slice_k||_* (mirrored slices counted
// with multiplicity two).
double svt_fourier_slices(CTensor3& f, double tau) {
    const Index n3 = f.n3();
    const Index half = n3 / 2;
    std::vector<double> nuclear(half + 1, 0.0);
    parallel_for(half + 1, [&](Index k) {
        const CSvdResult dec = svd(c_frontal_slice3(f, k));
        const Eigen::VectorXd shrunk = (dec.S.array() - tau).max(0.0);
        nuclear[k] = shrunk.sum();
        c_set_frontal_slice3(f, k, dec.U * shrunk.asDiagonal() * dec.V.adjoint());
    });
    for (Index k = half + 1; k < n3; ++k) {
        c_set_frontal_slice3(f, k, c_frontal_slice3(f, n3 - k).conjugate());
    }
    double total = 0.0;
    for (Index k = 0; k < n3; ++k) {
        total += nuclear[(k <= half) ? k : n3 - k];
    }
    return total;
}

}  // namespace

Tensor3 tsvt(const Tensor3& t, double tau) {
    if (tau < 0.0) throw std::invalid_argument("tsvt: tau must be non-negative");
    CTensor3 f = dft_mode3(t);
    svt_fourier_slices(f, tau);
    return idft_mode3(f, 1e-9);
}

double tnn_objective(const Tensor3& t) {
    CTensor3 f = dft_mode3(t);
    return svt_fourier_slices(f, 0.0);
}

TnnResult tnn_complete(const Tensor3& o, const Mask& m, const AdmmConfig& cfg) {
    cfg.validate();
    if (!m.same_dims(o)) throw std::invalid_argument("tnn_complete: mask dimension mismatch");
    if (m.observed_count() == 0) {
        throw std::invalid_argument("tnn_complete: mask has no observed entries");
    }

    auto impose_data = [&](Tensor3& x) {
        double* xd = x.data();
        const double* od = o.data();
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (m.observed_flat(i)) xd[i] = od[i];
        }
    };

    Tensor3 x = project_omega(o, m);
    Tensor3 w(o.n1(), o.n2(), o.n3());
    double rho = cfg.rho;

    TnnResult result;
    for (int it = 1; it <= cfg.max_iters; ++it) {
        CTensor3 f = dft_mode3(x + w * (1.0 / rho));
        result.objective_trace.push_back(svt_fourier_slices(f, 1.0 / rho));
        const Tensor3 z = idft_mode3(f, 1e-9);

        Tensor3 x_new = z - w * (1.0 / rho);
        impose_data(x_new);
        w += (x_new - z) * rho;

        const double diff = std::sqrt(frobenius_sq(x_new - x));
        const double base = std::max(std::sqrt(frobenius_sq(x)), 1e-12);
        result.final_rel_change = diff / base;
        x = std::move(x_new);
        result.iterations = it;

        if (!x.all_finite()) {
            throw std::runtime_error("tnn_complete: iterate became non-finite");
        }
        if (result.final_rel_change < cfg.tol) {
            result.converged = true;
            break;
        }
        rho = std::min(rho * cfg.rho_growth, cfg.rho_cap);
    }
    result.x = std::move(x);
    return result;
}

}  // namespace deeprep
