#include "deeprep/linalg.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/SVD>

namespace deeprep {

namespace {

template <typename Mat>
void check_finite(const Mat& m, const char* where) {
    if (!m.allFinite()) {
        throw std::invalid_argument(std::string(where) + ": non-finite entries");
    }
}

template <typename Solver, typename Mat>
void check_converged(const Solver& solver, const Mat& m) {
    if (solver.info() != Eigen::Success) {
        std::ostringstream oss;
        oss << "svd: no convergence on " << m.rows() << "x" << m.cols()
            << " matrix (|M|_F = " << m.norm() << ", |M|_max = "
            << m.cwiseAbs().maxCoeff() << ")";
        throw std::runtime_error(oss.str());
    }
}

}  // namespace

SvdResult svd(const Matrix& m) {
    check_finite(m, "svd");
    // Jacobi is bit-deterministic and accurate; fall back to the faster
    // divide-and-conquer path only for larger blocks.
    if (std::min(m.rows(), m.cols()) <= 32) {
        Eigen::JacobiSVD<Matrix> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        check_converged(solver, m);
        return {solver.matrixU(), solver.singularValues(), solver.matrixV()};
    }
    Eigen::BDCSVD<Matrix> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    check_converged(solver, m);
    return {solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

CSvdResult svd(const CMatrix& m) {
    check_finite(m, "svd");
    Eigen::JacobiSVD<CMatrix> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    check_converged(solver, m);
    return {solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

double nuclear_norm(const Matrix& m) {
    return svd(m).S.sum();
}

Matrix nuclear_subgrad(const Matrix& m, double rank_tol) {
    if (rank_tol <= 0.0) {
        throw std::invalid_argument("nuclear_subgrad: rank_tol must be positive");
    }
    const SvdResult f = svd(m);
    const Eigen::Index p = f.S.size();
    if (p == 0 || f.S(0) <= 0.0) {
        return Matrix::Zero(m.rows(), m.cols());
    }
    Eigen::Index r = 0;
    const double cutoff = rank_tol * f.S(0);
    while (r < p && f.S(r) > cutoff) ++r;
    return f.U.leftCols(r) * f.V.leftCols(r).transpose();
}

Matrix svt(const Matrix& m, double tau) {
    if (tau < 0.0) throw std::invalid_argument("svt: tau must be non-negative");
    const SvdResult f = svd(m);
    const Eigen::VectorXd shrunk = (f.S.array() - tau).max(0.0);
    return f.U * shrunk.asDiagonal() * f.V.transpose();
}

CMatrix svt(const CMatrix& m, double tau) {
    if (tau < 0.0) throw std::invalid_argument("svt: tau must be non-negative");
    const CSvdResult f = svd(m);
    const Eigen::VectorXd shrunk = (f.S.array() - tau).max(0.0);
    return f.U * shrunk.asDiagonal() * f.V.adjoint();
}

namespace {

CMatrix dft_matrix(Index n, bool inverse) {
    const double sign = inverse ? 1.0 : -1.0;
    const double norm = 1.0 / std::sqrt(static_cast<double>(n));
    CMatrix d(n, n);
    for (Index a = 0; a < n; ++a) {
        for (Index b = 0; b < n; ++b) {
            const double angle =
                sign * 2.0 * M_PI * static_cast<double>((a * b) % n) / static_cast<double>(n);
            d(a, b) = std::polar(norm, angle);
        }
    }
    return d;
}

}  // namespace

CTensor3 dft_mode3(const Tensor3& t) {
    const Index n1 = t.n1(), n2 = t.n2(), n3 = t.n3();
    const CMatrix d = dft_matrix(n3, false);
    CTensor3 out(n1, n2, n3);
    // Fibers are contiguous; the DFT matrix is symmetric, so the
    // fiber-wise transform is one (n1*n2) x n3 product.
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        in(t.data(), n1 * n2, n3);
    Eigen::Map<Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        res(out.data.data(), n1 * n2, n3);
    res = in * d;
    return out;
}

Tensor3 idft_mode3(const CTensor3& t, double imag_tol) {
    const Index n1 = t.n1(), n2 = t.n2(), n3 = t.n3();
    const CMatrix d = dft_matrix(n3, true);
    Eigen::Map<const Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        in(t.data.data(), n1 * n2, n3);
    const Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> full =
        in * d;
    const double imag_max = full.imag().cwiseAbs().maxCoeff();
    if (imag_max > imag_tol) {
        std::ostringstream oss;
        oss << "idft_mode3: imaginary residue " << imag_max << " exceeds " << imag_tol;
        throw std::runtime_error(oss.str());
    }
    Tensor3 out(n1, n2, n3);
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        res(out.data(), n1 * n2, n3);
    res = full.real();
    return out;
}

CMatrix c_frontal_slice3(const CTensor3& t, Index k) {
    if (k < 0 || k >= t.n3()) throw std::invalid_argument("c_frontal_slice3: index out of range");
    CMatrix m(t.n1(), t.n2());
    for (Index l = 0; l < t.n1(); ++l)
        for (Index j = 0; j < t.n2(); ++j) m(l, j) = t(l, j, k);
    return m;
}

void c_set_frontal_slice3(CTensor3& t, Index k, const CMatrix& m) {
    if (k < 0 || k >= t.n3()) throw std::invalid_argument("c_set_frontal_slice3: index out of range");
    if (m.rows() != t.n1() || m.cols() != t.n2()) {
        throw std::invalid_argument("c_set_frontal_slice3: shape mismatch");
    }
    for (Index l = 0; l < t.n1(); ++l)
        for (Index j = 0; j < t.n2(); ++j) t(l, j, k) = m(l, j);
}

}  // namespace deeprep
