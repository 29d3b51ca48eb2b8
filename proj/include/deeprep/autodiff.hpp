#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "deeprep/tensor.hpp"

namespace deeprep::ad {

// Define-by-run reverse-mode graph over Tensor3 values. A graph is built
// fresh for every evaluation, backward() visits each node once in reverse
// topological order, and leaf adjoints accumulate additively. Scalars are
// carried as 1x1x1 tensors.
class Node {
public:
    Node(Tensor3 v, bool needs_grad, const char* op_name)
        : value(std::move(v)), requires_grad(needs_grad), op(op_name) {}

    Tensor3 value;
    Tensor3 adjoint;  // empty until the first contribution arrives
    bool requires_grad;
    const char* op;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;

    void accumulate(const Tensor3& contribution);
    bool is_scalar() const {
        return value.n1() == 1 && value.n2() == 1 && value.n3() == 1;
    }
};

using NodePtr = std::shared_ptr<Node>;

NodePtr leaf(Tensor3 value);
NodePtr constant(Tensor3 value);

// Returns the leaf's accumulated adjoint, or zeros if nothing reached it.
Tensor3 grad_or_zeros(const NodePtr& node);

double scalar_value(const NodePtr& node);
Tensor3 make_scalar(double v);

// Per-slice 3x3 convolution: frontal slice k of x is correlated with
// kernel k (kernels stored as a (3,3,m3) tensor), zero padding 1,
// stride 1, no bias.
NodePtr conv3x3_per_slice(NodePtr x, NodePtr kernels);

// Mode-3 product with a learnable matrix; w2 is carried as an
// (m_out, m_in, 1) tensor.
NodePtr fc_mode3(NodePtr x, NodePtr w2);

// Elementwise max(x, slope*x); derivative is slope at exactly zero.
NodePtr leaky_relu(NodePtr x, double slope);

NodePtr permute_node(NodePtr x, int axis);
NodePtr ipermute_node(NodePtr x, int axis);
NodePtr concat3_node(NodePtr a, NodePtr b, NodePtr c);
std::array<NodePtr, 3> split3_node(NodePtr x);

// Scalar node ||P_Omega(x - o)||_F^2.
NodePtr masked_sq_residual(NodePtr x, Tensor3 o, Mask m);

// Scalar node: sum of nuclear norms over the mode-`axis` frontal slices.
// Backward places the Theorem-1 subgradient U_r V_r^T of each slice into
// that slice's position.
NodePtr nuclear_penalty(NodePtr x, int axis, double rank_tol);

NodePtr add(NodePtr a, NodePtr b);
NodePtr scale(NodePtr a, double c);

// Seeds d(loss)/d(loss) = 1 and propagates adjoints to every leaf.
// `loss` must be scalar-valued.
void backward(const NodePtr& loss);

}  // namespace deeprep::ad
