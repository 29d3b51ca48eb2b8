#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "deeprep/adam.hpp"
#include "deeprep/autodiff.hpp"
#include "deeprep/tensor.hpp"
#include "deeprep/tnn.hpp"

namespace deeprep {

// Parameters of one coupled transform block: a 3x3 kernel per input
// slice (stored (3,3,m3_in)) and the mode-3 FC matrix (stored
// (m3_out, m3_in, 1)). No bias terms.
struct CtbParams {
    Tensor3 kernels;
    Tensor3 w2;
    double slope = 0.01;
};

// All learnable scalars of the three-directional model. Latents are kept
// already permuted, third axis = own mode i, so latents[i-1] has dims
//   i=1: (n2, n3, k*n1),  i=2: (n1, n3, k*n2),  i=3: (n1, n2, k*n3).
// With this convention the slice regularizer always runs over third-axis
// slices and the directional transform needs no input permute.
struct ModelParams {
    std::array<Tensor3, 3> latents;
    std::array<CtbParams, 3> theta;
    CtbParams theta_g;

    std::vector<Tensor3*> flat();
    std::vector<const Tensor3*> flat() const;
};

struct EarlyStopConfig {
    bool enabled = true;
    int window = 200;
    double tol = 1e-7;
};

struct HyperParams {
    double beta = 1e-5;   // weight of the low-rank regularizers
    double theta = 0.1;   // spatial/spectral balance inside the weights
    double gamma = 1e-7;  // weight of the directional data-fidelity terms
    int k = 1;            // latent expansion ratio, mode i gets k*n_i slices
    double rank_tol = 1e-6;
    double slope = 0.01;
    double expansion_init_std = 1e-2;
    AdamConfig adam;
    int iterations = 5000;
    EarlyStopConfig early_stop;
    std::uint64_t seed = 0;

    void validate() const;
};

// Normalized direction weights (1, 1, theta) / (2 + theta); they sum to 1.
std::array<double, 3> direction_weights(double theta);

// Node-level view of a CTB's parameters inside one graph.
struct CtbNodes {
    ad::NodePtr kernels;
    ad::NodePtr w2;
    double slope = 0.01;
};

// sigma(fc_mode3(sigma(conv3x3_per_slice(x)))) with sigma = LeakyReLU.
ad::NodePtr ctb_forward(ad::NodePtr x, const CtbNodes& p);

// Directional reconstruction from a latent in stored (pre-permuted)
// convention: ipermute(ctb(latent), axis). For axis 3 the ipermute is
// the identity.
ad::NodePtr directional_forward(ad::NodePtr stored_latent, int axis, const CtbNodes& p);

// Fusion of the three directional candidates: ctb(concat3(x1, x2, x3)).
ad::NodePtr aggregate(ad::NodePtr x1, ad::NodePtr x2, ad::NodePtr x3, const CtbNodes& p_g);

// One full forward/loss graph instance.
struct ModelGraph {
    std::array<ad::NodePtr, 3> latents;
    std::array<CtbNodes, 3> theta;
    CtbNodes theta_g;
    std::array<ad::NodePtr, 3> x_dir;
    ad::NodePtr x_final;
    ad::NodePtr total;
    double nuclear_term = 0.0;       // beta * sum_i w_i * nuclear_i
    double dir_residual_term = 0.0;  // gamma * sum_i ||P(X_i - O)||^2
    double final_residual = 0.0;     // ||P(X - O)||^2

    std::vector<ad::NodePtr> leaves() const;
};

ModelGraph build_model_graph(const ModelParams& params, const Tensor3& o, const Mask& m,
                             const HyperParams& h);

// Scalar loss node of the reparameterized objective
//   beta * sum_i w_i(theta) * nuclear(latent_i)
//   + gamma * sum_i ||P_Omega(X_i - O)||_F^2 + ||P_Omega(X - O)||_F^2.
ad::NodePtr loss(const ModelParams& params, const Tensor3& o, const Mask& m,
                 const HyperParams& h);

// Latents from the TNN-completed tensor (permuted per direction; for
// k > 1 the extra slices are Gaussian at expansion_init_std), network
// weights zero-mean Gaussian at std 1/sqrt(fan_in), all from h.seed.
ModelParams init_params(const Dims& dims, const HyperParams& h, const Tensor3& tnn_init);

struct TraceRecord {
    int iteration = 0;
    double total = 0.0;
    double nuclear = 0.0;
    double dir_residual = 0.0;
    double final_residual = 0.0;
};

struct TrainResult {
    Tensor3 recovered;
    std::vector<TraceRecord> history;
    Tensor3 tnn_init;
    int iterations_run = 0;
    bool early_stopped = false;
};

// Full self-supervised fit: TNN initialization, then Adam on every leaf.
// The recovered tensor is the final aggregation output, unclamped;
// clamping to [0,1] is an export/metric concern.
TrainResult train(const Tensor3& o, const Mask& m, const HyperParams& h,
                  const AdmmConfig& admm = {});

// Single-direction variant (the direction ablation): one latent, one CTB,
// no aggregation; loss = beta * nuclear + ||P_Omega(X_i - O)||_F^2.
TrainResult train_single_direction(const Tensor3& o, const Mask& m, int axis,
                                   const HyperParams& h, const AdmmConfig& admm = {});

// Closed-form learnable-scalar counts.
std::int64_t param_count(const Dims& dims, int k);
std::int64_t param_count_single_direction(const Dims& dims, int axis, int k);

}  // namespace deeprep
