#include "deeprep/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "deeprep/rng.hpp"

namespace deeprep {

std::vector<Tensor3*> ModelParams::flat() {
    std::vector<Tensor3*> out;
    for (auto& l : latents) out.push_back(&l);
    for (auto& t : theta) {
        out.push_back(&t.kernels);
        out.push_back(&t.w2);
    }
    out.push_back(&theta_g.kernels);
    out.push_back(&theta_g.w2);
    return out;
}

std::vector<const Tensor3*> ModelParams::flat() const {
    std::vector<const Tensor3*> out;
    for (auto& l : latents) out.push_back(&l);
    for (auto& t : theta) {
        out.push_back(&t.kernels);
        out.push_back(&t.w2);
    }
    out.push_back(&theta_g.kernels);
    out.push_back(&theta_g.w2);
    return out;
}

void HyperParams::validate() const {
    if (beta < 0.0 || theta < 0.0 || gamma < 0.0) {
        throw std::invalid_argument("HyperParams: beta, theta, gamma must be non-negative");
    }
    if (k < 1) throw std::invalid_argument("HyperParams: expansion ratio k must be >= 1");
    if (rank_tol <= 0.0) throw std::invalid_argument("HyperParams: rank_tol must be positive");
    if (slope <= 0.0 || slope >= 1.0) {
        throw std::invalid_argument("HyperParams: activation slope must be in (0,1)");
    }
    if (iterations < 0) throw std::invalid_argument("HyperParams: iterations must be >= 0");
}

std::array<double, 3> direction_weights(double theta) {
    const double denom = 2.0 + theta;
    return {1.0 / denom, 1.0 / denom, theta / denom};
}

ad::NodePtr ctb_forward(ad::NodePtr x, const CtbNodes& p) {
    auto h = ad::leaky_relu(ad::conv3x3_per_slice(std::move(x), p.kernels), p.slope);
    return ad::leaky_relu(ad::fc_mode3(std::move(h), p.w2), p.slope);
}

ad::NodePtr directional_forward(ad::NodePtr stored_latent, int axis, const CtbNodes& p) {
    detail::check_axis(axis);
    auto y = ctb_forward(std::move(stored_latent), p);
    if (axis == 3) return y;
    return ad::ipermute_node(std::move(y), axis);
}

ad::NodePtr aggregate(ad::NodePtr x1, ad::NodePtr x2, ad::NodePtr x3, const CtbNodes& p_g) {
    return ctb_forward(ad::concat3_node(std::move(x1), std::move(x2), std::move(x3)), p_g);
}

namespace {

CtbNodes ctb_nodes(const CtbParams& p) {
    return {ad::leaf(p.kernels), ad::leaf(p.w2), p.slope};
}

Dims stored_latent_dims(const Dims& dims, int axis, int k) {
    const Index n1 = dims[0], n2 = dims[1], n3 = dims[2];
    switch (axis) {
        case 1: return {n2, n3, k * n1};
        case 2: return {n1, n3, k * n2};
        default: return {n1, n2, k * n3};
    }
}

void check_params_shape(const ModelParams& params, const Dims& dims, const HyperParams& h) {
    for (int i = 0; i < 3; ++i) {
        const Dims want = stored_latent_dims(dims, i + 1, h.k);
        if (params.latents[i].dims() != want) {
            throw std::invalid_argument("model: latent dims do not match observation/k");
        }
        const Index m_in = want[2];
        const Index m_out = dims[i];
        if (params.theta[i].kernels.dims() != Dims{3, 3, m_in} ||
            params.theta[i].w2.dims() != Dims{m_out, m_in, 1}) {
            throw std::invalid_argument("model: directional CTB parameter shape mismatch");
        }
    }
    const Index n3 = dims[2];
    if (params.theta_g.kernels.dims() != Dims{3, 3, 3 * n3} ||
        params.theta_g.w2.dims() != Dims{n3, 3 * n3, 1}) {
        throw std::invalid_argument("model: aggregation CTB parameter shape mismatch");
    }
}

}  // namespace

ModelGraph build_model_graph(const ModelParams& params, const Tensor3& o, const Mask& m,
                             const HyperParams& h) {
    h.validate();
    if (!m.same_dims(o)) throw std::invalid_argument("model: mask dimension mismatch");
    check_params_shape(params, o.dims(), h);

    ModelGraph g;
    for (int i = 0; i < 3; ++i) {
        g.latents[i] = ad::leaf(params.latents[i]);
        g.theta[i] = ctb_nodes(params.theta[i]);
        g.x_dir[i] = directional_forward(g.latents[i], i + 1, g.theta[i]);
    }
    g.theta_g = ctb_nodes(params.theta_g);
    g.x_final = aggregate(g.x_dir[0], g.x_dir[1], g.x_dir[2], g.theta_g);

    ad::NodePtr total = ad::masked_sq_residual(g.x_final, o, m);
    g.final_residual = ad::scalar_value(total);

    if (h.gamma > 0.0) {
        ad::NodePtr dir_sum;
        for (int i = 0; i < 3; ++i) {
            auto r = ad::masked_sq_residual(g.x_dir[i], o, m);
            dir_sum = dir_sum ? ad::add(dir_sum, r) : r;
        }
        g.dir_residual_term = h.gamma * ad::scalar_value(dir_sum);
        total = ad::add(total, ad::scale(dir_sum, h.gamma));
    }

    if (h.beta > 0.0) {
        // Latents are stored pre-permuted, so the mode-i slice sum of the
        // original latent is the third-axis slice sum of the stored one.
        const std::array<double, 3> w = direction_weights(h.theta);
        ad::NodePtr nuc_sum;
        for (int i = 0; i < 3; ++i) {
            auto n = ad::scale(ad::nuclear_penalty(g.latents[i], 3, h.rank_tol), w[i]);
            nuc_sum = nuc_sum ? ad::add(nuc_sum, n) : n;
        }
        g.nuclear_term = h.beta * ad::scalar_value(nuc_sum);
        total = ad::add(total, ad::scale(nuc_sum, h.beta));
    }

    g.total = total;
    return g;
}

std::vector<ad::NodePtr> ModelGraph::leaves() const {
    std::vector<ad::NodePtr> out;
    for (const auto& l : latents) out.push_back(l);
    for (const auto& t : theta) {
        out.push_back(t.kernels);
        out.push_back(t.w2);
    }
    out.push_back(theta_g.kernels);
    out.push_back(theta_g.w2);
    return out;
}

ad::NodePtr loss(const ModelParams& params, const Tensor3& o, const Mask& m,
                 const HyperParams& h) {
    return build_model_graph(params, o, m, h).total;
}

namespace {

Tensor3 gaussian_tensor(Rng& rng, const Dims& d, double std_dev) {
    Tensor3 t(d[0], d[1], d[2]);
    double* p = t.data();
    for (std::size_t i = 0; i < t.size(); ++i) p[i] = std_dev * rng.next_normal();
    return t;
}

CtbParams init_ctb(Rng& rng, Index m_in, Index m_out, double slope) {
    CtbParams p;
    p.kernels = gaussian_tensor(rng, {3, 3, m_in}, 1.0 / 3.0);  // fan_in = 9
    p.w2 = gaussian_tensor(rng, {m_out, m_in, 1}, 1.0 / std::sqrt(static_cast<double>(m_in)));
    p.slope = slope;
    return p;
}

}  // namespace

ModelParams init_params(const Dims& dims, const HyperParams& h, const Tensor3& tnn_init) {
    h.validate();
    if (tnn_init.dims() != dims) {
        throw std::invalid_argument("init_params: tnn_init dims mismatch");
    }
    Rng rng(h.seed);
    ModelParams params;
    for (int i = 0; i < 3; ++i) {
        const Index m_in = stored_latent_dims(dims, i + 1, h.k)[2];
        params.theta[i] = init_ctb(rng, m_in, dims[i], h.slope);
    }
    params.theta_g = init_ctb(rng, 3 * dims[2], dims[2], h.slope);

    for (int i = 0; i < 3; ++i) {
        const Tensor3 base = permute(tnn_init, i + 1);
        if (h.k == 1) {
            params.latents[i] = base;
        } else {
            const Dims d = stored_latent_dims(dims, i + 1, h.k);
            Tensor3 latent = gaussian_tensor(rng, d, h.expansion_init_std);
            for (Index l = 0; l < base.n1(); ++l)
                for (Index j = 0; j < base.n2(); ++j)
                    for (Index s = 0; s < base.n3(); ++s) latent(l, j, s) = base(l, j, s);
            params.latents[i] = std::move(latent);
        }
    }
    return params;
}

namespace {

struct LossValues {
    double total, nuclear, dir_residual, final_residual;
};

// Shared Adam loop over an arbitrary graph builder. The builder returns
// the loss node plus the term breakdown for the trace.
template <typename BuildFn, typename FinalFn>
TrainResult run_training(const HyperParams& h, std::vector<Tensor3*> params, BuildFn&& build,
                         FinalFn&& final_output) {
    TrainResult result;
    AdamState adam(params, h.adam);
    std::vector<double> recent_losses;

    for (int it = 1; it <= h.iterations; ++it) {
        auto [total, values, leaves] = build();
        ad::backward(total);

        if (!std::isfinite(values.total)) {
            std::ostringstream oss;
            oss << "train: non-finite loss at iteration " << it << " (nuclear=" << values.nuclear
                << ", dir=" << values.dir_residual << ", final=" << values.final_residual << ")";
            throw std::runtime_error(oss.str());
        }

        std::vector<Tensor3> grads;
        grads.reserve(leaves.size());
        for (const auto& leaf : leaves) grads.push_back(ad::grad_or_zeros(leaf));
        std::vector<const Tensor3*> grad_ptrs;
        grad_ptrs.reserve(grads.size());
        for (const auto& g : grads) grad_ptrs.push_back(&g);
        adam.step(params, grad_ptrs);

        result.history.push_back(
            {it, values.total, values.nuclear, values.dir_residual, values.final_residual});
        result.iterations_run = it;

        if (h.early_stop.enabled) {
            recent_losses.push_back(values.total);
            const int w = h.early_stop.window;
            if (static_cast<int>(recent_losses.size()) > w) {
                const double past = recent_losses[recent_losses.size() - 1 - w];
                if (std::abs(past - values.total) < h.early_stop.tol) {
                    result.early_stopped = true;
                    break;
                }
            }
        }
    }

    result.recovered = final_output();
    if (!result.recovered.all_finite()) {
        throw std::runtime_error("train: recovered tensor has non-finite entries");
    }
    return result;
}

}  // namespace

TrainResult train(const Tensor3& o, const Mask& m, const HyperParams& h, const AdmmConfig& admm) {
    h.validate();
    if (!m.same_dims(o)) throw std::invalid_argument("train: mask dimension mismatch");
    if (m.observed_count() == 0) {
        throw std::invalid_argument("train: mask has no observed entries");
    }

    const Tensor3 tnn_init = tnn_complete(o, m, admm).x;
    ModelParams params = init_params(o.dims(), h, tnn_init);

    auto build = [&]() {
        ModelGraph g = build_model_graph(params, o, m, h);
        LossValues values{ad::scalar_value(g.total), g.nuclear_term, g.dir_residual_term,
                          g.final_residual};
        return std::make_tuple(g.total, values, g.leaves());
    };
    auto final_output = [&]() {
        return build_model_graph(params, o, m, h).x_final->value;
    };

    TrainResult result = run_training(h, params.flat(), build, final_output);
    result.tnn_init = tnn_init;
    return result;
}

TrainResult train_single_direction(const Tensor3& o, const Mask& m, int axis,
                                   const HyperParams& h, const AdmmConfig& admm) {
    h.validate();
    detail::check_axis(axis);
    if (!m.same_dims(o)) throw std::invalid_argument("train: mask dimension mismatch");
    if (m.observed_count() == 0) {
        throw std::invalid_argument("train: mask has no observed entries");
    }

    const Tensor3 tnn_init = tnn_complete(o, m, admm).x;
    Rng rng(h.seed);
    const Index m_in = stored_latent_dims(o.dims(), axis, h.k)[2];
    CtbParams ctb = init_ctb(rng, m_in, o.dims()[axis - 1], h.slope);
    Tensor3 latent = permute(tnn_init, axis);
    if (h.k > 1) {
        const Dims d = stored_latent_dims(o.dims(), axis, h.k);
        Tensor3 expanded = gaussian_tensor(rng, d, h.expansion_init_std);
        for (Index l = 0; l < latent.n1(); ++l)
            for (Index j = 0; j < latent.n2(); ++j)
                for (Index s = 0; s < latent.n3(); ++s) expanded(l, j, s) = latent(l, j, s);
        latent = std::move(expanded);
    }

    std::vector<Tensor3*> params{&latent, &ctb.kernels, &ctb.w2};

    auto forward = [&]() {
        CtbNodes nodes{ad::leaf(ctb.kernels), ad::leaf(ctb.w2), ctb.slope};
        auto latent_node = ad::leaf(latent);
        auto x = directional_forward(latent_node, axis, nodes);
        return std::make_tuple(latent_node, nodes, x);
    };
    auto build = [&]() {
        auto [latent_node, nodes, x] = forward();
        auto residual = ad::masked_sq_residual(x, o, m);
        ad::NodePtr total = residual;
        double nuclear_value = 0.0;
        if (h.beta > 0.0) {
            auto nuc = ad::nuclear_penalty(latent_node, 3, h.rank_tol);
            nuclear_value = h.beta * ad::scalar_value(nuc);
            total = ad::add(total, ad::scale(nuc, h.beta));
        }
        LossValues values{ad::scalar_value(total), nuclear_value, 0.0,
                          ad::scalar_value(residual)};
        std::vector<ad::NodePtr> leaves{latent_node, nodes.kernels, nodes.w2};
        return std::make_tuple(total, values, leaves);
    };
    auto final_output = [&]() { return std::get<2>(forward())->value; };

    TrainResult result = run_training(h, params, build, final_output);
    result.tnn_init = tnn_init;
    return result;
}

std::int64_t param_count(const Dims& dims, int k) {
    if (dims[0] <= 0 || dims[1] <= 0 || dims[2] <= 0 || k < 1) {
        throw std::invalid_argument("param_count: invalid dims or k");
    }
    const std::int64_t n1 = dims[0], n2 = dims[1], n3 = dims[2], kk = k;
    std::int64_t total = 3 * kk * n1 * n2 * n3;  // latents, mode i expanded k-fold
    for (int i = 0; i < 3; ++i) {
        const std::int64_t ni = dims[i];
        total += 9 * kk * ni + ni * kk * ni;  // per-slice kernels + FC matrix
    }
    total += 9 * (3 * n3) + n3 * (3 * n3);  // aggregation CTB
    return total;
}

std::int64_t param_count_single_direction(const Dims& dims, int axis, int k) {
    detail::check_axis(axis);
    if (dims[0] <= 0 || dims[1] <= 0 || dims[2] <= 0 || k < 1) {
        throw std::invalid_argument("param_count_single_direction: invalid dims or k");
    }
    const std::int64_t n1 = dims[0], n2 = dims[1], n3 = dims[2], kk = k;
    const std::int64_t ni = dims[axis - 1];
    return kk * n1 * n2 * n3 + 9 * kk * ni + ni * kk * ni;
}

}  // namespace deeprep
