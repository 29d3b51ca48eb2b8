#include "deeprep/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace deeprep {

AdamState::AdamState(const std::vector<Tensor3*>& params, AdamConfig cfg) : cfg_(cfg) {
    if (cfg_.lr <= 0.0 || cfg_.eps <= 0.0 || cfg_.beta1 < 0.0 || cfg_.beta1 >= 1.0 ||
        cfg_.beta2 < 0.0 || cfg_.beta2 >= 1.0) {
        throw std::invalid_argument("AdamState: invalid optimizer settings");
    }
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const Tensor3* p : params) {
        const Dims d = p->dims();
        m_.emplace_back(d[0], d[1], d[2]);
        v_.emplace_back(d[0], d[1], d[2]);
    }
}

void AdamState::step(const std::vector<Tensor3*>& params,
                     const std::vector<const Tensor3*>& grads) {
    if (params.size() != m_.size() || grads.size() != m_.size()) {
        throw std::invalid_argument("AdamState::step: parameter count mismatch");
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor3& p = *params[i];
        const Tensor3& g = *grads[i];
        if (!p.same_dims(m_[i]) || !g.same_dims(m_[i])) {
            throw std::invalid_argument("AdamState::step: shape mismatch");
        }
        double* pd = p.data();
        const double* gd = g.data();
        double* md = m_[i].data();
        double* vd = v_[i].data();
        for (std::size_t n = 0; n < p.size(); ++n) {
            md[n] = cfg_.beta1 * md[n] + (1.0 - cfg_.beta1) * gd[n];
            vd[n] = cfg_.beta2 * vd[n] + (1.0 - cfg_.beta2) * gd[n] * gd[n];
            const double mhat = md[n] / bc1;
            const double vhat = vd[n] / bc2;
            pd[n] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

}  // namespace deeprep
