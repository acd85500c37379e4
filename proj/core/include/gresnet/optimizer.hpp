#pragma once

#include <span>
#include <vector>

#include "gresnet/param_view.hpp"

namespace gresnet {

/// Hyperparameters of the Adam-with-Nesterov-momentum update. lr and beta1
/// follow the training protocol (0.002 / 0.9); the rest are the optimizer's
/// conventional defaults. weight_decay applies to tensors, k_decay to gate
/// scalars; both are decoupled (multiplicative, not through the gradient).
struct AdamNesterovConfig {
  double lr = 0.002;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
  double k_decay = 0.0;
};

/// Adam with Nesterov momentum. With t' the 1-based step index:
///
///   m <- b1 m + (1-b1) g          v <- b2 v + (1-b2) g^2
///   m^ = m / (1 - b1^(t'+1))      g^ = g / (1 - b1^t')      v^ = v / (1 - b2^t')
///   theta <- theta - lr (b1 m^ + (1-b1) g^) / (sqrt(v^) + eps)
///
/// with the decoupled decay theta <- theta (1 - lr wd) applied first.
class AdamNesterov {
 public:
  explicit AdamNesterov(AdamNesterovConfig cfg) : cfg_(cfg) {}

  const AdamNesterovConfig& config() const { return cfg_; }
  long long step_count() const { return t_; }

  /// One update. params and grads must be aligned index-for-index and keep the
  /// same layout across calls; the first call sizes the moment accumulators.
  /// A non-finite gradient aborts the whole step (params untouched) with an
  /// error naming the offending parameter.
  void step(std::span<ParamView> params, std::span<const GradView> grads);

 private:
  AdamNesterovConfig cfg_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  long long t_ = 0;
};

}  // namespace gresnet
