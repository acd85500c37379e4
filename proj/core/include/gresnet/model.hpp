#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gresnet/layers.hpp"
#include "gresnet/param_view.hpp"

namespace gresnet {

enum class Family { classical, resnet, gresnet };

std::string family_name(Family f);
Family family_from_name(const std::string& name);

struct NetworkConfig {
  Family family = Family::gresnet;
  int depth = 10;  // middle dense layers; block families consume two per block
  int width = 50;
  int in_dim = 784;
  int num_classes = 10;
  std::uint64_t seed = 1;
  double bn_momentum = 0.9;
  double bn_epsilon = 1e-5;
};

/// A plain affine map followed by ReLU, no normalization. Only produced by
/// insert_identity_layer; never part of a freshly built network.
struct BareReluLayer {
  DenseParams dense;
};

using MiddleNode =
    std::variant<PlainLayer, BareReluLayer, ResidualBlockParams, GatedBlockParams>;

struct Network {
  NetworkConfig config;
  DenseParams input_layer;  // in_dim -> width, with bias, no BN/ReLU
  std::vector<MiddleNode> middle;
  std::vector<std::uint8_t> active;  // parallel to middle; 0 = pruned away
  DenseParams output_layer;  // width -> num_classes, with bias

  std::size_t active_count() const;
};

/// Builds the requested architecture with He-uniform weights, zero biases,
/// unit gamma, zero beta and every gate scalar at 1, all drawn from the
/// config seed. classical: depth Dot-BN-ReLU layers; resnet: depth/2
/// residual blocks; gresnet: depth/2 gated blocks. Block families require
/// even depth.
Network build_network(const NetworkConfig& config);

struct MiddleNodeCache {
  std::variant<std::monostate, PlainLayerCache, ResidualBlockCache, GatedBlockCache>
      block;
  // BareReluLayer is two stages, so it caches both pieces here instead.
  DenseCache bare_dense;
  ReluCache bare_relu;
  bool is_bare = false;
};

struct NetCache {
  Matrix input{0, 0};
  std::vector<MiddleNodeCache> middle;
  DenseCache output;
  Matrix logits{0, 0};
  Mode mode = Mode::train;
};

struct NetworkGrads {
  struct MiddleGrads {
    std::variant<std::monostate, PlainLayerGrads, DenseGrads, ResidualBlockGrads,
                 GatedBlockGrads>
        grads;
  };
  DenseGrads input_layer;
  std::vector<MiddleGrads> middle;  // parallel to net.middle; monostate = inactive
  DenseGrads output_layer;
};

/// Full pass up to the logits. Train mode updates BN running statistics.
std::pair<Matrix, NetCache> network_forward(Network& net, const Matrix& x, Mode mode);

/// Mean softmax cross-entropy gradients for every learnable parameter,
/// including all gate scalars. Requires a train-mode cache.
NetworkGrads network_backward(const Network& net, const NetCache& cache,
                              std::span<const int> labels);

/// Row-argmax of inference-mode logits. Ties break toward the lower index.
std::vector<int> predict(const Network& net, const Matrix& x);

Matrix network_logits(const Network& net, const Matrix& x);

/// Percentage of predictions that disagree with the labels, evaluated in
/// inference mode over fixed-size batches.
double error_rate(const Network& net, const Matrix& images, const std::vector<int>& labels,
                  std::size_t batch_size = 512);

/// Copy of net with one extra middle layer appended: W = identity, no bias,
/// no BN, ReLU activation. Because the last middle layer's output is already
/// a ReLU image, ReLU(h * I) == h and the logits are unchanged exactly.
/// Classical family only.
Network insert_identity_layer(const Network& net);

/// Arithmetic mean of the raw gate scalars over active gated blocks.
double mean_k(const Network& net);

/// (1-based block index, k) for every gated block in network order,
/// inactive ones included.
std::vector<std::pair<int, double>> k_profile(const Network& net);

/// Learnable parameters in declaration order, skipping inactive nodes.
/// Layout is stable as long as `active` does not change.
std::vector<ParamView> learnable_params(Network& net);

/// Every persistent array: learnables, BN running statistics, inactive
/// nodes. Declaration order; the checkpoint payload.
std::vector<ParamView> state_arrays(Network& net);

/// Gradient views aligned index-for-index with learnable_params(net).
std::vector<GradView> grad_views(const Network& net, const NetworkGrads& grads);

}  // namespace gresnet
