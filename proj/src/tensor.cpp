#include "deeprep/tensor.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace deeprep {

namespace {

std::size_t checked_size(Index n1, Index n2, Index n3) {
    if (n1 <= 0 || n2 <= 0 || n3 <= 0) {
        throw std::invalid_argument("Tensor3: dimensions must be positive");
    }
    // Guard against overflow; desk-scale tensors are far below this cap.
    constexpr Index kMaxEntries = Index(1) << 33;
    if (n2 > kMaxEntries / n1 || n3 > kMaxEntries / (n1 * n2)) {
        throw std::invalid_argument("Tensor3: dimension product overflows size cap");
    }
    return static_cast<std::size_t>(n1 * n2 * n3);
}

}  // namespace

Tensor3::Tensor3(Index n1, Index n2, Index n3)
    : dims_{n1, n2, n3}, data_(checked_size(n1, n2, n3), 0.0) {}

Tensor3::Tensor3(Index n1, Index n2, Index n3, std::vector<double> data)
    : dims_{n1, n2, n3}, data_(std::move(data)) {
    if (data_.size() != checked_size(n1, n2, n3)) {
        throw std::invalid_argument("Tensor3: data length does not match dims");
    }
}

Tensor3 Tensor3::filled(Index n1, Index n2, Index n3, double value) {
    Tensor3 t(n1, n2, n3);
    std::fill(t.data_.begin(), t.data_.end(), value);
    return t;
}

bool Tensor3::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Tensor3& Tensor3::operator+=(const Tensor3& rhs) {
    detail::check_same_dims(*this, rhs, "Tensor3::operator+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
    return *this;
}

Tensor3& Tensor3::operator-=(const Tensor3& rhs) {
    detail::check_same_dims(*this, rhs, "Tensor3::operator-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
    return *this;
}

Tensor3& Tensor3::operator*=(double c) {
    for (double& v : data_) v *= c;
    return *this;
}

Tensor3 operator+(Tensor3 lhs, const Tensor3& rhs) { return lhs += rhs; }
Tensor3 operator-(Tensor3 lhs, const Tensor3& rhs) { return lhs -= rhs; }
Tensor3 operator*(Tensor3 t, double c) { return t *= c; }
Tensor3 operator*(double c, Tensor3 t) { return t *= c; }

Mask::Mask(Index n1, Index n2, Index n3, bool observed)
    : dims_{n1, n2, n3}, bits_(checked_size(n1, n2, n3), observed ? 1 : 0) {}

Index Mask::observed_count() const {
    Index count = 0;
    for (std::uint8_t b : bits_) count += (b != 0);
    return count;
}

double Mask::missing_rate() const {
    if (bits_.empty()) return 0.0;
    return 1.0 - static_cast<double>(observed_count()) / static_cast<double>(bits_.size());
}

namespace detail {

void check_axis(int axis) {
    if (axis < 1 || axis > 3) {
        throw std::invalid_argument("axis index must be 1, 2 or 3, got " + std::to_string(axis));
    }
}

void check_same_dims(const Tensor3& a, const Tensor3& b, const char* where) {
    if (!a.same_dims(b)) {
        throw std::invalid_argument(std::string(where) + ": dimension mismatch");
    }
}

}  // namespace detail

Tensor3 permute(const Tensor3& t, int axis) {
    detail::check_axis(axis);
    const Index n1 = t.n1(), n2 = t.n2(), n3 = t.n3();
    if (axis == 3) return t;
    if (axis == 1) {
        Tensor3 out(n2, n3, n1);
        for (Index l = 0; l < n1; ++l)
            for (Index j = 0; j < n2; ++j)
                for (Index s = 0; s < n3; ++s) out(j, s, l) = t(l, j, s);
        return out;
    }
    // axis == 2
    Tensor3 out(n1, n3, n2);
    for (Index l = 0; l < n1; ++l)
        for (Index j = 0; j < n2; ++j)
            for (Index s = 0; s < n3; ++s) out(l, s, j) = t(l, j, s);
    return out;
}

Tensor3 ipermute(const Tensor3& t, int axis) {
    detail::check_axis(axis);
    const Index m1 = t.n1(), m2 = t.n2(), m3 = t.n3();
    if (axis == 3) return t;
    if (axis == 1) {
        // t = permute(X,1) with dims (n2,n3,n1); recover X of dims (m3,m1,m2).
        Tensor3 out(m3, m1, m2);
        for (Index j = 0; j < m1; ++j)
            for (Index s = 0; s < m2; ++s)
                for (Index l = 0; l < m3; ++l) out(l, j, s) = t(j, s, l);
        return out;
    }
    // axis == 2: t = permute(X,2) with dims (n1,n3,n2); X has dims (m1,m3,m2).
    Tensor3 out(m1, m3, m2);
    for (Index l = 0; l < m1; ++l)
        for (Index s = 0; s < m2; ++s)
            for (Index j = 0; j < m3; ++j) out(l, j, s) = t(l, s, j);
    return out;
}

Tensor3 concat3(const Tensor3& a, const Tensor3& b, const Tensor3& c) {
    detail::check_same_dims(a, b, "concat3");
    detail::check_same_dims(a, c, "concat3");
    const Index n1 = a.n1(), n2 = a.n2(), n3 = a.n3();
    Tensor3 out(n1, n2, 3 * n3);
    for (Index l = 0; l < n1; ++l)
        for (Index j = 0; j < n2; ++j)
            for (Index s = 0; s < n3; ++s) {
                out(l, j, s) = a(l, j, s);
                out(l, j, s + n3) = b(l, j, s);
                out(l, j, s + 2 * n3) = c(l, j, s);
            }
    return out;
}

std::array<Tensor3, 3> split3(const Tensor3& t) {
    if (t.n3() % 3 != 0) {
        throw std::invalid_argument("split3: third dimension not divisible by 3");
    }
    const Index n1 = t.n1(), n2 = t.n2(), n3 = t.n3() / 3;
    std::array<Tensor3, 3> parts{Tensor3(n1, n2, n3), Tensor3(n1, n2, n3), Tensor3(n1, n2, n3)};
    for (Index l = 0; l < n1; ++l)
        for (Index j = 0; j < n2; ++j)
            for (Index s = 0; s < n3; ++s) {
                parts[0](l, j, s) = t(l, j, s);
                parts[1](l, j, s) = t(l, j, s + n3);
                parts[2](l, j, s) = t(l, j, s + 2 * n3);
            }
    return parts;
}

Tensor3 mode3_product(const Tensor3& t, const Matrix& m) {
    if (m.cols() != t.n3()) {
        throw std::invalid_argument("mode3_product: matrix columns must equal third dim");
    }
    const Index n1 = t.n1(), n2 = t.n2(), n3 = t.n3(), p = m.rows();
    Tensor3 out(n1, n2, p);
    // Mode-3 fibers are contiguous; view as (n1*n2) x n3 and multiply.
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        in(t.data(), n1 * n2, n3);
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        res(out.data(), n1 * n2, p);
    res = in * m.transpose();
    return out;
}

Index frontal_slice_count(const Tensor3& t, int axis) {
    detail::check_axis(axis);
    return t.dims()[axis - 1];
}

Matrix frontal_slice(const Tensor3& t, int axis, Index k) {
    detail::check_axis(axis);
    if (k < 0 || k >= frontal_slice_count(t, axis)) {
        throw std::invalid_argument("frontal_slice: slice index out of range");
    }
    const Index n1 = t.n1(), n2 = t.n2(), n3 = t.n3();
    if (axis == 1) {
        Matrix m(n2, n3);
        for (Index j = 0; j < n2; ++j)
            for (Index s = 0; s < n3; ++s) m(j, s) = t(k, j, s);
        return m;
    }
    if (axis == 2) {
        Matrix m(n1, n3);
        for (Index l = 0; l < n1; ++l)
            for (Index s = 0; s < n3; ++s) m(l, s) = t(l, k, s);
        return m;
    }
    Matrix m(n1, n2);
    for (Index l = 0; l < n1; ++l)
        for (Index j = 0; j < n2; ++j) m(l, j) = t(l, j, k);
    return m;
}

namespace {

void slice_op(Tensor3& t, int axis, Index k, const Matrix& m, bool add) {
    detail::check_axis(axis);
    if (k < 0 || k >= frontal_slice_count(t, axis)) {
        throw std::invalid_argument("set_frontal_slice: slice index out of range");
    }
    const Index n1 = t.n1(), n2 = t.n2(), n3 = t.n3();
    auto put = [&](Index l, Index j, Index s, double v) {
        if (add) t(l, j, s) += v; else t(l, j, s) = v;
    };
    if (axis == 1) {
        if (m.rows() != n2 || m.cols() != n3) throw std::invalid_argument("set_frontal_slice: shape mismatch");
        for (Index j = 0; j < n2; ++j)
            for (Index s = 0; s < n3; ++s) put(k, j, s, m(j, s));
    } else if (axis == 2) {
        if (m.rows() != n1 || m.cols() != n3) throw std::invalid_argument("set_frontal_slice: shape mismatch");
        for (Index l = 0; l < n1; ++l)
            for (Index s = 0; s < n3; ++s) put(l, k, s, m(l, s));
    } else {
        if (m.rows() != n1 || m.cols() != n2) throw std::invalid_argument("set_frontal_slice: shape mismatch");
        for (Index l = 0; l < n1; ++l)
            for (Index j = 0; j < n2; ++j) put(l, j, k, m(l, j));
    }
}

}  // namespace

void set_frontal_slice(Tensor3& t, int axis, Index k, const Matrix& m) {
    slice_op(t, axis, k, m, false);
}

void add_to_frontal_slice(Tensor3& t, int axis, Index k, const Matrix& m) {
    slice_op(t, axis, k, m, true);
}

Tensor3 project_omega(const Tensor3& t, const Mask& m) {
    if (!m.same_dims(t)) {
        throw std::invalid_argument("project_omega: mask/tensor dimension mismatch");
    }
    Tensor3 out = t;
    double* d = out.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!m.observed_flat(i)) d[i] = 0.0;
    }
    return out;
}

double frobenius_sq(const Tensor3& t) {
    double acc = 0.0;
    const double* d = t.data();
    for (std::size_t i = 0; i < t.size(); ++i) acc += d[i] * d[i];
    return acc;
}

}  // namespace deeprep
