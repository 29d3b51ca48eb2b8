#include "deeprep/autodiff.hpp"

#include <stdexcept>
#include <unordered_set>
#include <utility>

#include "deeprep/linalg.hpp"
#include "deeprep/parallel.hpp"

namespace deeprep::ad {

void Node::accumulate(const Tensor3& contribution) {
    if (adjoint.empty()) {
        adjoint = contribution;
    } else {
        adjoint += contribution;
    }
}

NodePtr leaf(Tensor3 value) {
    return std::make_shared<Node>(std::move(value), true, "leaf");
}

NodePtr constant(Tensor3 value) {
    return std::make_shared<Node>(std::move(value), false, "constant");
}

Tensor3 grad_or_zeros(const NodePtr& node) {
    if (node->adjoint.empty()) {
        const Dims d = node->value.dims();
        return Tensor3(d[0], d[1], d[2]);
    }
    return node->adjoint;
}

Tensor3 make_scalar(double v) {
    Tensor3 t(1, 1, 1);
    t(0, 0, 0) = v;
    return t;
}

double scalar_value(const NodePtr& node) {
    if (!node->is_scalar()) throw std::invalid_argument("scalar_value: node is not scalar");
    return node->value(0, 0, 0);
}

namespace {

NodePtr make_node(Tensor3 value, std::vector<NodePtr> parents, const char* op,
                  std::function<void(Node&)> backward_fn) {
    bool needs = false;
    for (const auto& p : parents) needs = needs || p->requires_grad;
    auto n = std::make_shared<Node>(std::move(value), needs, op);
    n->parents = std::move(parents);
    n->backward_fn = std::move(backward_fn);
    return n;
}

// Correlation-style convolution of one frontal slice with a 3x3 kernel,
// zero padding 1, stride 1.
void conv_slice_forward(const Tensor3& x, const Tensor3& k, Index s, Tensor3& out) {
    const Index n1 = x.n1(), n2 = x.n2();
    for (Index l = 0; l < n1; ++l) {
        for (Index j = 0; j < n2; ++j) {
            double acc = 0.0;
            for (Index a = 0; a < 3; ++a) {
                const Index li = l + a - 1;
                if (li < 0 || li >= n1) continue;
                for (Index b = 0; b < 3; ++b) {
                    const Index ji = j + b - 1;
                    if (ji < 0 || ji >= n2) continue;
                    acc += k(a, b, s) * x(li, ji, s);
                }
            }
            out(l, j, s) = acc;
        }
    }
}

}  // namespace

NodePtr conv3x3_per_slice(NodePtr x, NodePtr kernels) {
    const Tensor3& xv = x->value;
    const Tensor3& kv = kernels->value;
    if (kv.n1() != 3 || kv.n2() != 3) {
        throw std::invalid_argument("conv3x3_per_slice: kernels must be 3x3");
    }
    if (kv.n3() != xv.n3()) {
        throw std::invalid_argument("conv3x3_per_slice: kernel count must equal third dim of input");
    }
    Tensor3 out(xv.n1(), xv.n2(), xv.n3());
    for (Index s = 0; s < xv.n3(); ++s) conv_slice_forward(xv, kv, s, out);

    return make_node(std::move(out), {x, kernels}, "conv3x3_per_slice", [](Node& self) {
        const NodePtr& x = self.parents[0];
        const NodePtr& kernels = self.parents[1];
        const Tensor3& up = self.adjoint;
        const Tensor3& xv = x->value;
        const Tensor3& kv = kernels->value;
        const Index n1 = xv.n1(), n2 = xv.n2(), n3 = xv.n3();
        if (x->requires_grad) {
            Tensor3 gx(n1, n2, n3);
            for (Index s = 0; s < n3; ++s) {
                for (Index l = 0; l < n1; ++l) {
                    for (Index j = 0; j < n2; ++j) {
                        double acc = 0.0;
                        // x(l,j,s) feeds out(l-a+1, j-b+1, s) with weight k(a,b,s).
                        for (Index a = 0; a < 3; ++a) {
                            const Index lo = l - a + 1;
                            if (lo < 0 || lo >= n1) continue;
                            for (Index b = 0; b < 3; ++b) {
                                const Index jo = j - b + 1;
                                if (jo < 0 || jo >= n2) continue;
                                acc += kv(a, b, s) * up(lo, jo, s);
                            }
                        }
                        gx(l, j, s) = acc;
                    }
                }
            }
            x->accumulate(gx);
        }
        if (kernels->requires_grad) {
            Tensor3 gk(3, 3, n3);
            for (Index s = 0; s < n3; ++s) {
                for (Index a = 0; a < 3; ++a) {
                    for (Index b = 0; b < 3; ++b) {
                        double acc = 0.0;
                        for (Index l = 0; l < n1; ++l) {
                            const Index li = l + a - 1;
                            if (li < 0 || li >= n1) continue;
                            for (Index j = 0; j < n2; ++j) {
                                const Index ji = j + b - 1;
                                if (ji < 0 || ji >= n2) continue;
                                acc += up(l, j, s) * xv(li, ji, s);
                            }
                        }
                        gk(a, b, s) = acc;
                    }
                }
            }
            kernels->accumulate(gk);
        }
    });
}

namespace {

Matrix w2_as_matrix(const Tensor3& w2) {
    Matrix m(w2.n1(), w2.n2());
    for (Index p = 0; p < w2.n1(); ++p)
        for (Index q = 0; q < w2.n2(); ++q) m(p, q) = w2(p, q, 0);
    return m;
}

}  // namespace

NodePtr fc_mode3(NodePtr x, NodePtr w2) {
    const Tensor3& wv = w2->value;
    if (wv.n3() != 1) throw std::invalid_argument("fc_mode3: w2 must have third dim 1");
    if (wv.n2() != x->value.n3()) {
        throw std::invalid_argument("fc_mode3: w2 columns must equal input third dim");
    }
    Tensor3 out = mode3_product(x->value, w2_as_matrix(wv));

    return make_node(std::move(out), {x, w2}, "fc_mode3", [](Node& self) {
        const NodePtr& x = self.parents[0];
        const NodePtr& w2 = self.parents[1];
        const Tensor3& up = self.adjoint;
        const Matrix w = w2_as_matrix(w2->value);
        if (x->requires_grad) {
            x->accumulate(mode3_product(up, w.transpose()));
        }
        if (w2->requires_grad) {
            const Tensor3& xv = x->value;
            const Index rows = w.rows(), cols = w.cols(), spatial = xv.n1() * xv.n2();
            Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
                upm(up.data(), spatial, rows);
            Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
                xm(xv.data(), spatial, cols);
            const Matrix gw = upm.transpose() * xm;
            Tensor3 gt(rows, cols, 1);
            for (Index p = 0; p < rows; ++p)
                for (Index q = 0; q < cols; ++q) gt(p, q, 0) = gw(p, q);
            w2->accumulate(gt);
        }
    });
}

NodePtr leaky_relu(NodePtr x, double slope) {
    if (slope <= 0.0 || slope >= 1.0) {
        throw std::invalid_argument("leaky_relu: slope must be in (0,1)");
    }
    const Tensor3& xv = x->value;
    Tensor3 out = xv;
    double* d = out.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (d[i] < 0.0) d[i] *= slope;
    }
    return make_node(std::move(out), {x}, "leaky_relu", [slope](Node& self) {
        const NodePtr& x = self.parents[0];
        if (!x->requires_grad) return;
        Tensor3 gx = self.adjoint;
        const double* xd = x->value.data();
        double* gd = gx.data();
        for (std::size_t i = 0; i < gx.size(); ++i) {
            if (xd[i] <= 0.0) gd[i] *= slope;
        }
        x->accumulate(gx);
    });
}

NodePtr permute_node(NodePtr x, int axis) {
    Tensor3 out = permute(x->value, axis);
    return make_node(std::move(out), {x}, "permute", [axis](Node& self) {
        const NodePtr& x = self.parents[0];
        if (x->requires_grad) x->accumulate(ipermute(self.adjoint, axis));
    });
}

NodePtr ipermute_node(NodePtr x, int axis) {
    Tensor3 out = ipermute(x->value, axis);
    return make_node(std::move(out), {x}, "ipermute", [axis](Node& self) {
        const NodePtr& x = self.parents[0];
        if (x->requires_grad) x->accumulate(permute(self.adjoint, axis));
    });
}

NodePtr concat3_node(NodePtr a, NodePtr b, NodePtr c) {
    Tensor3 out = concat3(a->value, b->value, c->value);
    return make_node(std::move(out), {a, b, c}, "concat3", [](Node& self) {
        auto parts = split3(self.adjoint);
        for (int i = 0; i < 3; ++i) {
            if (self.parents[i]->requires_grad) self.parents[i]->accumulate(parts[i]);
        }
    });
}

std::array<NodePtr, 3> split3_node(NodePtr x) {
    auto parts = split3(x->value);
    std::array<NodePtr, 3> nodes;
    for (int i = 0; i < 3; ++i) {
        nodes[i] = make_node(std::move(parts[i]), {x}, "split3", [i](Node& self) {
            const NodePtr& x = self.parents[0];
            if (!x->requires_grad) return;
            const Index n3 = self.adjoint.n3();
            Tensor3 gx(x->value.n1(), x->value.n2(), x->value.n3());
            for (Index l = 0; l < gx.n1(); ++l)
                for (Index j = 0; j < gx.n2(); ++j)
                    for (Index s = 0; s < n3; ++s)
                        gx(l, j, s + i * n3) = self.adjoint(l, j, s);
            x->accumulate(gx);
        });
    }
    return nodes;
}

NodePtr masked_sq_residual(NodePtr x, Tensor3 o, Mask m) {
    detail::check_same_dims(x->value, o, "masked_sq_residual");
    if (!m.same_dims(o)) {
        throw std::invalid_argument("masked_sq_residual: mask dimension mismatch");
    }
    const Tensor3 residual = project_omega(x->value - o, m);
    Tensor3 out = make_scalar(frobenius_sq(residual));
    return make_node(std::move(out), {x}, "masked_sq_residual",
                     [residual](Node& self) {
                         const NodePtr& x = self.parents[0];
                         if (!x->requires_grad) return;
                         const double up = self.adjoint(0, 0, 0);
                         x->accumulate(residual * (2.0 * up));
                     });
}

NodePtr nuclear_penalty(NodePtr x, int axis, double rank_tol) {
    detail::check_axis(axis);
    if (rank_tol <= 0.0) {
        throw std::invalid_argument("nuclear_penalty: rank_tol must be positive");
    }
    const Index count = frontal_slice_count(x->value, axis);
    std::vector<double> norms(count);
    auto subgrads = std::make_shared<std::vector<Matrix>>(count);
    parallel_for(count, [&](Index k) {
        const Matrix slice = frontal_slice(x->value, axis, k);
        const SvdResult f = svd(slice);
        norms[k] = f.S.sum();
        Eigen::Index r = 0;
        if (f.S.size() > 0 && f.S(0) > 0.0) {
            const double cutoff = rank_tol * f.S(0);
            while (r < f.S.size() && f.S(r) > cutoff) ++r;
        }
        (*subgrads)[k] = f.U.leftCols(r) * f.V.leftCols(r).transpose();
    });
    double total = 0.0;
    for (double v : norms) total += v;

    return make_node(make_scalar(total), {x}, "nuclear_penalty",
                     [axis, subgrads](Node& self) {
                         const NodePtr& x = self.parents[0];
                         if (!x->requires_grad) return;
                         const double up = self.adjoint(0, 0, 0);
                         const Dims d = x->value.dims();
                         Tensor3 gx(d[0], d[1], d[2]);
                         for (Index k = 0; k < static_cast<Index>(subgrads->size()); ++k) {
                             add_to_frontal_slice(gx, axis, k, (*subgrads)[k] * up);
                         }
                         x->accumulate(gx);
                     });
}

NodePtr add(NodePtr a, NodePtr b) {
    detail::check_same_dims(a->value, b->value, "add");
    Tensor3 out = a->value + b->value;
    return make_node(std::move(out), {a, b}, "add", [](Node& self) {
        for (const auto& p : self.parents) {
            if (p->requires_grad) p->accumulate(self.adjoint);
        }
    });
}

NodePtr scale(NodePtr a, double c) {
    Tensor3 out = a->value * c;
    return make_node(std::move(out), {a}, "scale", [c](Node& self) {
        const NodePtr& a = self.parents[0];
        if (a->requires_grad) a->accumulate(self.adjoint * c);
    });
}

void backward(const NodePtr& loss) {
    if (!loss->is_scalar()) {
        throw std::invalid_argument("backward: loss node must be scalar");
    }
    // Iterative post-order DFS; reversed it yields a topological order.
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(loss.get(), 0);
    visited.insert(loss.get());
    while (!stack.empty()) {
        auto& [node, next_child] = stack.back();
        if (next_child < node->parents.size()) {
            Node* child = node->parents[next_child].get();
            ++next_child;
            if (visited.insert(child).second) {
                stack.emplace_back(child, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    loss->accumulate(make_scalar(1.0));
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* node = *it;
        if (!node->requires_grad || node->adjoint.empty()) continue;
        if (node->backward_fn) node->backward_fn(*node);
    }
}

}  // namespace deeprep::ad
