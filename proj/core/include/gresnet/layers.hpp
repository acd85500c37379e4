#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "gresnet/matrix.hpp"

namespace gresnet {

enum class Mode { train, infer };

// ---------------------------------------------------------------------------
// Parameter groups
// ---------------------------------------------------------------------------

/// Affine layer weights. W is in_dim x out_dim; bias is optional (layers that
/// feed a batch norm carry none, its shift subsumes it).
struct DenseParams {
  Matrix W;
  std::vector<double> b;  // empty = no bias

  bool has_bias() const { return !b.empty(); }
  std::size_t in_dim() const { return W.rows(); }
  std::size_t out_dim() const { return W.cols(); }
};

/// Per-feature batch normalization state.
struct BatchNormParams {
  std::vector<double> gamma;
  std::vector<double> beta;
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double momentum = 0.9;
  double epsilon = 1e-5;

  static BatchNormParams make(std::size_t width, double momentum = 0.9, double epsilon = 1e-5);
  std::size_t width() const { return gamma.size(); }
};

/// One Dot-BN-ReLU unit: the middle-layer primitive of all three families.
struct PlainLayer {
  DenseParams dense;  // no bias
  BatchNormParams bn;
};

/// Two Dot-BN-ReLU layers behind one shortcut: u = f_r(x) + x.
struct ResidualBlockParams {
  PlainLayer l1;
  PlainLayer l2;
};

/// Residual block with a scalar-gated residual path: u = g(k) * f_r(x) + x.
/// k is learnable, initialized to 1.
struct GatedBlockParams {
  PlainLayer l1;
  PlainLayer l2;
  double k = 1.0;
};

// ---------------------------------------------------------------------------
// Scalar gate
// ---------------------------------------------------------------------------

/// g(k) = max(k, 0): the gate closes (identity mapping) for any k <= 0.
inline double gate(double k) { return k > 0.0 ? k : 0.0; }

/// Subgradient of the gate; 0 at k = 0, so a closed gate stays closed.
inline double gate_grad(double k) { return k > 0.0 ? 1.0 : 0.0; }

// ---------------------------------------------------------------------------
// Caches: intermediates saved by forward for the matching backward
// ---------------------------------------------------------------------------

struct DenseCache {
  Matrix x;  // layer input
};

struct BnCache {
  Matrix xhat;                  // normalized input
  std::vector<double> inv_std;  // 1 / sqrt(var + eps), batch stats
  std::size_t batch = 0;
  Mode mode = Mode::train;
};

struct ReluCache {
  Matrix x;  // pre-activation
};

struct PlainLayerCache {
  DenseCache dense;
  BnCache bn;
  ReluCache relu;
};

struct ResidualBlockCache {
  PlainLayerCache l1;
  PlainLayerCache l2;
  Matrix residual;  // f_r(x)
};

struct GatedBlockCache {
  ResidualBlockCache inner;
  double gate_value = 0.0;
  double k = 0.0;
  std::size_t in_rows = 0, in_cols = 0;
  bool skipped = false;  // closed gate in infer mode: f_r never evaluated
};

struct SoftmaxXentCache {
  Matrix probs;
  std::vector<int> labels;
};

// ---------------------------------------------------------------------------
// Gradient bundles
// ---------------------------------------------------------------------------

struct DenseGrads {
  Matrix x;
  Matrix W;
  std::vector<double> b;  // empty when the layer has no bias
};

struct BnGrads {
  Matrix x;
  std::vector<double> gamma;
  std::vector<double> beta;
};

struct PlainLayerGrads {
  Matrix x;
  Matrix W;
  std::vector<double> gamma;
  std::vector<double> beta;
};

struct ResidualBlockGrads {
  Matrix x;
  PlainLayerGrads l1;
  PlainLayerGrads l2;
};

struct GatedBlockGrads {
  Matrix x;
  PlainLayerGrads l1;
  PlainLayerGrads l2;
  double k = 0.0;
};

// ---------------------------------------------------------------------------
// Forward / backward ops
// ---------------------------------------------------------------------------

/// y = x.W (+ b per row). Throws ShapeError on a width mismatch.
std::pair<Matrix, DenseCache> dense_forward(const Matrix& x, const DenseParams& p);

DenseGrads dense_backward(const Matrix& grad_out, const DenseParams& p, const DenseCache& cache);

/// Train mode normalizes with batch statistics (biased variance) and updates
/// the running stats by EMA; infer mode normalizes with the running stats.
/// Train mode requires batch >= 2.
std::pair<Matrix, BnCache> bn_forward(const Matrix& x, BatchNormParams& p, Mode mode);

/// Exact gradients of the train-mode forward. Requires a train-mode cache.
BnGrads bn_backward(const Matrix& grad_out, const BatchNormParams& p, const BnCache& cache);

std::pair<Matrix, ReluCache> relu_forward(const Matrix& x);

Matrix relu_backward(const Matrix& grad_out, const ReluCache& cache);

/// One Dot-BN-ReLU unit.
std::pair<Matrix, PlainLayerCache> plain_layer_forward(const Matrix& x, PlainLayer& p, Mode mode);

PlainLayerGrads plain_layer_backward(const Matrix& grad_out, const PlainLayer& p,
                                     const PlainLayerCache& cache);

/// u = f_r(x) + x with f_r = two Dot-BN-ReLU layers.
std::pair<Matrix, ResidualBlockCache> residual_block_forward(const Matrix& x,
                                                             ResidualBlockParams& p, Mode mode);

ResidualBlockGrads residual_block_backward(const Matrix& grad_out, const ResidualBlockParams& p,
                                           const ResidualBlockCache& cache);

/// u = g(k) * f_r(x) + x. For g(k) == 0 the input is passed through bitwise.
std::pair<Matrix, GatedBlockCache> gated_block_forward(const Matrix& x, GatedBlockParams& p,
                                                       Mode mode);

/// grad_k = gate_grad(k) * sum(grad_out . f_r(x)); the inner parameters see
/// the residual-path gradient scaled by g(k); the shortcut adds grad_out to
/// grad_x unchanged.
GatedBlockGrads gated_block_backward(const Matrix& grad_out, const GatedBlockParams& p,
                                     const GatedBlockCache& cache);

/// Mean cross-entropy over the batch with a numerically stable softmax.
/// Labels must lie in [0, logits.cols).
std::pair<double, SoftmaxXentCache> softmax_xent_forward(const Matrix& logits,
                                                         std::span<const int> labels);

/// d(loss)/d(logits) = (softmax - onehot) / batch.
Matrix softmax_xent_backward(const SoftmaxXentCache& cache);

}  // namespace gresnet
