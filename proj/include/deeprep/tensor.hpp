#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace deeprep {

using Index = std::int64_t;
using Matrix = Eigen::MatrixXd;
using Dims = std::array<Index, 3>;

// Dense real 3-mode tensor. Layout is row-major with the last index
// fastest: offset(l, j, s) = (l * n2 + j) * n3 + s. This is the one
// layout used everywhere, including the on-disk format, so mode-3
// fibers are contiguous.
class Tensor3 {
public:
    Tensor3() = default;
    Tensor3(Index n1, Index n2, Index n3);
    Tensor3(Index n1, Index n2, Index n3, std::vector<double> data);

    static Tensor3 filled(Index n1, Index n2, Index n3, double value);

    Index n1() const { return dims_[0]; }
    Index n2() const { return dims_[1]; }
    Index n3() const { return dims_[2]; }
    Dims dims() const { return dims_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double operator()(Index l, Index j, Index s) const {
        return data_[static_cast<std::size_t>((l * dims_[1] + j) * dims_[2] + s)];
    }
    double& operator()(Index l, Index j, Index s) {
        return data_[static_cast<std::size_t>((l * dims_[1] + j) * dims_[2] + s)];
    }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool same_dims(const Tensor3& other) const { return dims_ == other.dims_; }
    bool all_finite() const;

    Tensor3& operator+=(const Tensor3& rhs);
    Tensor3& operator-=(const Tensor3& rhs);
    Tensor3& operator*=(double c);

private:
    Dims dims_{0, 0, 0};
    std::vector<double> data_;
};

Tensor3 operator+(Tensor3 lhs, const Tensor3& rhs);
Tensor3 operator-(Tensor3 lhs, const Tensor3& rhs);
Tensor3 operator*(Tensor3 t, double c);
Tensor3 operator*(double c, Tensor3 t);

// Boolean sampling set Omega over a tensor's index grid; true = observed.
class Mask {
public:
    Mask() = default;
    Mask(Index n1, Index n2, Index n3, bool observed = true);

    Index n1() const { return dims_[0]; }
    Index n2() const { return dims_[1]; }
    Index n3() const { return dims_[2]; }
    Dims dims() const { return dims_; }
    std::size_t size() const { return bits_.size(); }

    bool observed(Index l, Index j, Index s) const {
        return bits_[static_cast<std::size_t>((l * dims_[1] + j) * dims_[2] + s)] != 0;
    }
    void set(Index l, Index j, Index s, bool obs) {
        bits_[static_cast<std::size_t>((l * dims_[1] + j) * dims_[2] + s)] = obs ? 1 : 0;
    }
    bool observed_flat(std::size_t idx) const { return bits_[idx] != 0; }
    void set_flat(std::size_t idx, bool obs) { bits_[idx] = obs ? 1 : 0; }

    const std::vector<std::uint8_t>& bits() const { return bits_; }
    std::vector<std::uint8_t>& bits() { return bits_; }

    Index observed_count() const;
    double missing_rate() const;
    bool same_dims(const Tensor3& t) const { return dims_ == t.dims(); }

private:
    Dims dims_{0, 0, 0};
    std::vector<std::uint8_t> bits_;
};

// Mode-i permutation: the i-th mode moves to the third dimension, the
// other two keep their order. permute(X,1)(j,s,l) = permute(X,2)(l,s,j)
// = permute(X,3)(l,j,s) = X(l,j,s). Axis is 1-based.
Tensor3 permute(const Tensor3& t, int axis);

// Inverse of permute along the same axis: ipermute(permute(X,i), i) = X.
Tensor3 ipermute(const Tensor3& t, int axis);

// Concatenation of three same-shape tensors along the third mode,
// (n1,n2,n3) x3 -> (n1,n2,3*n3).
Tensor3 concat3(const Tensor3& a, const Tensor3& b, const Tensor3& c);

// Splits a tensor with third dim divisible by 3 into its three bands;
// exact inverse of concat3.
std::array<Tensor3, 3> split3(const Tensor3& t);

// Mode-3 tensor-matrix product: out(l,j,p) = sum_q M(p,q) * t(l,j,q).
Tensor3 mode3_product(const Tensor3& t, const Matrix& m);

// Mode-i frontal slice k as a dense matrix:
//   i=1 -> X(k,:,:) of shape n2 x n3
//   i=2 -> X(:,k,:) of shape n1 x n3
//   i=3 -> X(:,:,k) of shape n1 x n2
Matrix frontal_slice(const Tensor3& t, int axis, Index k);
void set_frontal_slice(Tensor3& t, int axis, Index k, const Matrix& m);
void add_to_frontal_slice(Tensor3& t, int axis, Index k, const Matrix& m);
Index frontal_slice_count(const Tensor3& t, int axis);

// Sampling projector P_Omega: keeps observed entries, zeros the rest.
Tensor3 project_omega(const Tensor3& t, const Mask& m);

// Squared Frobenius norm: sum of squared entries.
double frobenius_sq(const Tensor3& t);

namespace detail {
void check_axis(int axis);
void check_same_dims(const Tensor3& a, const Tensor3& b, const char* where);
}  // namespace detail

}  // namespace deeprep
