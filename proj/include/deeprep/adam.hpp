#pragma once

#include <cstdint>
#include <vector>

#include "deeprep/tensor.hpp"

namespace deeprep {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Bias-corrected Adam over a fixed list of parameter tensors. The state
// is created from the parameter shapes and must be stepped with matching
// shapes from then on.
class AdamState {
public:
    AdamState(const std::vector<Tensor3*>& params, AdamConfig cfg);

    void step(const std::vector<Tensor3*>& params, const std::vector<const Tensor3*>& grads);

    std::int64_t step_count() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    std::vector<Tensor3> m_;
    std::vector<Tensor3> v_;
    std::int64_t t_ = 0;
};

inline void adam_step(std::vector<Tensor3*>& params, const std::vector<const Tensor3*>& grads,
                      AdamState& state) {
    state.step(params, grads);
}

}  // namespace deeprep
