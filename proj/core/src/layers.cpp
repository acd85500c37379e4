#include "gresnet/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gresnet {

BatchNormParams BatchNormParams::make(std::size_t width, double momentum, double epsilon) {
  BatchNormParams p;
  p.gamma.assign(width, 1.0);
  p.beta.assign(width, 0.0);
  p.running_mean.assign(width, 0.0);
  p.running_var.assign(width, 1.0);
  p.momentum = momentum;
  p.epsilon = epsilon;
  return p;
}

std::pair<Matrix, DenseCache> dense_forward(const Matrix& x, const DenseParams& p) {
  if (x.cols() != p.in_dim())
    throw ShapeError("dense_forward: input " + x.shape_str() + " vs weights " + p.W.shape_str());
  Matrix y = matmul(x, p.W);
  if (p.has_bias()) add_row_vector(y, p.b);
  return {std::move(y), DenseCache{x}};
}

DenseGrads dense_backward(const Matrix& grad_out, const DenseParams& p, const DenseCache& cache) {
  if (grad_out.cols() != p.out_dim() || grad_out.rows() != cache.x.rows())
    throw ShapeError("dense_backward: grad " + grad_out.shape_str() + " vs weights " +
                     p.W.shape_str());
  DenseGrads g;
  g.x = matmul_nt(grad_out, p.W);      // grad_out . WT
  g.W = matmul_tn(cache.x, grad_out);  // xT . grad_out
  if (p.has_bias()) g.b = col_sum(grad_out);
  return g;
}

std::pair<Matrix, BnCache> bn_forward(const Matrix& x, BatchNormParams& p, Mode mode) {
  const std::size_t width = p.width();
  const std::size_t n = x.rows();
  if (x.cols() != width)
    throw ShapeError("bn_forward: input " + x.shape_str() + " vs width " + std::to_string(width));

  Matrix y(n, width);
  BnCache cache;
  cache.batch = n;
  cache.mode = mode;

  if (mode == Mode::infer) {
    for (std::size_t j = 0; j < width; ++j) {
      const double inv = 1.0 / std::sqrt(p.running_var[j] + p.epsilon);
      const double mean = p.running_mean[j];
      const double gam = p.gamma[j];
      const double bet = p.beta[j];
      for (std::size_t i = 0; i < n; ++i) y(i, j) = gam * (x(i, j) - mean) * inv + bet;
    }
    return {std::move(y), std::move(cache)};
  }

  if (n < 2) throw std::invalid_argument("bn_forward: train mode needs a batch of at least 2");

  std::vector<double> mean(width, 0.0), var(width, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = x.row(i);
    for (std::size_t j = 0; j < width; ++j) mean[j] += row[j];
  }
  for (std::size_t j = 0; j < width; ++j) mean[j] /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = x.row(i);
    for (std::size_t j = 0; j < width; ++j) {
      const double d = row[j] - mean[j];
      var[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < width; ++j) var[j] /= static_cast<double>(n);  // biased

  cache.xhat = Matrix(n, width);
  cache.inv_std.resize(width);
  for (std::size_t j = 0; j < width; ++j) cache.inv_std[j] = 1.0 / std::sqrt(var[j] + p.epsilon);

  for (std::size_t i = 0; i < n; ++i) {
    const double* row = x.row(i);
    double* xh = cache.xhat.row(i);
    double* yr = y.row(i);
    for (std::size_t j = 0; j < width; ++j) {
      xh[j] = (row[j] - mean[j]) * cache.inv_std[j];
      yr[j] = p.gamma[j] * xh[j] + p.beta[j];
    }
  }

  for (std::size_t j = 0; j < width; ++j) {
    p.running_mean[j] = p.momentum * p.running_mean[j] + (1.0 - p.momentum) * mean[j];
    p.running_var[j] = p.momentum * p.running_var[j] + (1.0 - p.momentum) * var[j];
  }
  return {std::move(y), std::move(cache)};
}

BnGrads bn_backward(const Matrix& grad_out, const BatchNormParams& p, const BnCache& cache) {
  if (cache.mode != Mode::train)
    throw std::invalid_argument("bn_backward: cache must come from a train-mode forward");
  const std::size_t n = cache.batch;
  const std::size_t width = p.width();
  if (grad_out.rows() != n || grad_out.cols() != width)
    throw ShapeError("bn_backward: grad " + grad_out.shape_str() + " vs cache " +
                     cache.xhat.shape_str());

  BnGrads g;
  g.gamma.assign(width, 0.0);
  g.beta.assign(width, 0.0);
  std::vector<double> sum_gxhat(width, 0.0);  // sum of grad_xhat
  std::vector<double> sum_gxx(width, 0.0);    // sum of grad_xhat * xhat
  for (std::size_t i = 0; i < n; ++i) {
    const double* go = grad_out.row(i);
    const double* xh = cache.xhat.row(i);
    for (std::size_t j = 0; j < width; ++j) {
      g.beta[j] += go[j];
      g.gamma[j] += go[j] * xh[j];
      const double gxh = go[j] * p.gamma[j];
      sum_gxhat[j] += gxh;
      sum_gxx[j] += gxh * xh[j];
    }
  }

  // Compact form of the full chain rule through the batch statistics:
  // grad_x = inv_std / n * (n*grad_xhat - sum(grad_xhat) - xhat * sum(grad_xhat*xhat))
  g.x = Matrix(n, width);
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* go = grad_out.row(i);
    const double* xh = cache.xhat.row(i);
    double* gx = g.x.row(i);
    for (std::size_t j = 0; j < width; ++j) {
      const double gxh = go[j] * p.gamma[j];
      gx[j] = cache.inv_std[j] / dn * (dn * gxh - sum_gxhat[j] - xh[j] * sum_gxx[j]);
    }
  }
  return g;
}

std::pair<Matrix, ReluCache> relu_forward(const Matrix& x) {
  Matrix y(x.rows(), x.cols());
  const double* px = x.data();
  double* py = y.data();
  for (std::size_t i = 0; i < x.size(); ++i) py[i] = px[i] > 0.0 ? px[i] : 0.0;
  return {std::move(y), ReluCache{x}};
}

Matrix relu_backward(const Matrix& grad_out, const ReluCache& cache) {
  if (!grad_out.same_shape(cache.x))
    throw ShapeError("relu_backward: grad " + grad_out.shape_str() + " vs cache " +
                     cache.x.shape_str());
  Matrix g(grad_out.rows(), grad_out.cols());
  const double* pg = grad_out.data();
  const double* px = cache.x.data();
  double* po = g.data();
  for (std::size_t i = 0; i < g.size(); ++i) po[i] = px[i] > 0.0 ? pg[i] : 0.0;
  return g;
}

std::pair<Matrix, PlainLayerCache> plain_layer_forward(const Matrix& x, PlainLayer& p, Mode mode) {
  PlainLayerCache cache;
  auto [z, dense_cache] = dense_forward(x, p.dense);
  cache.dense = std::move(dense_cache);
  auto [zn, bn_cache] = bn_forward(z, p.bn, mode);
  cache.bn = std::move(bn_cache);
  auto [y, relu_cache] = relu_forward(zn);
  cache.relu = std::move(relu_cache);
  return {std::move(y), std::move(cache)};
}

PlainLayerGrads plain_layer_backward(const Matrix& grad_out, const PlainLayer& p,
                                     const PlainLayerCache& cache) {
  Matrix g_bn_out = relu_backward(grad_out, cache.relu);
  BnGrads bn = bn_backward(g_bn_out, p.bn, cache.bn);
  DenseGrads dense = dense_backward(bn.x, p.dense, cache.dense);
  return PlainLayerGrads{std::move(dense.x), std::move(dense.W), std::move(bn.gamma),
                         std::move(bn.beta)};
}

namespace {

// f_r(x) = Dot-BN-ReLU applied twice; cache.residual holds f_r(x).
ResidualBlockCache residual_fn_forward(const Matrix& x, PlainLayer& l1, PlainLayer& l2,
                                       Mode mode) {
  ResidualBlockCache cache;
  auto [h, c1] = plain_layer_forward(x, l1, mode);
  cache.l1 = std::move(c1);
  auto [fr, c2] = plain_layer_forward(h, l2, mode);
  cache.l2 = std::move(c2);
  cache.residual = std::move(fr);
  return cache;
}

}  // namespace

std::pair<Matrix, ResidualBlockCache> residual_block_forward(const Matrix& x,
                                                             ResidualBlockParams& p, Mode mode) {
  ResidualBlockCache cache = residual_fn_forward(x, p.l1, p.l2, mode);
  Matrix u = add(cache.residual, x);
  return {std::move(u), std::move(cache)};
}

ResidualBlockGrads residual_block_backward(const Matrix& grad_out, const ResidualBlockParams& p,
                                           const ResidualBlockCache& cache) {
  PlainLayerGrads g2 = plain_layer_backward(grad_out, p.l2, cache.l2);
  PlainLayerGrads g1 = plain_layer_backward(g2.x, p.l1, cache.l1);
  Matrix gx = add(g1.x, grad_out);  // shortcut path
  return ResidualBlockGrads{std::move(gx), std::move(g1), std::move(g2)};
}

std::pair<Matrix, GatedBlockCache> gated_block_forward(const Matrix& x, GatedBlockParams& p,
                                                       Mode mode) {
  GatedBlockCache cache;
  cache.k = p.k;
  cache.gate_value = gate(p.k);
  cache.in_rows = x.rows();
  cache.in_cols = x.cols();

  // Closed gate: the block is an identity mapping and the input passes
  // through bitwise. In infer mode the residual path is not evaluated at all;
  // in train mode it still runs so the BN running stats see the batch,
  // matching a branch-free implementation.
  if (cache.gate_value == 0.0 && mode == Mode::infer) {
    cache.skipped = true;
    return {x, std::move(cache)};
  }

  cache.inner = residual_fn_forward(x, p.l1, p.l2, mode);
  if (cache.gate_value == 0.0) return {x, std::move(cache)};

  const Matrix& fr = cache.inner.residual;
  Matrix u(x.rows(), x.cols());
  const double gk = cache.gate_value;
  for (std::size_t i = 0; i < u.size(); ++i) u.data()[i] = gk * fr.data()[i] + x.data()[i];
  return {std::move(u), std::move(cache)};
}

GatedBlockGrads gated_block_backward(const Matrix& grad_out, const GatedBlockParams& p,
                                     const GatedBlockCache& cache) {
  if (grad_out.rows() != cache.in_rows || grad_out.cols() != cache.in_cols)
    throw ShapeError("gated_block_backward: grad " + grad_out.shape_str() + " vs cached input " +
                     std::to_string(cache.in_rows) + "x" + std::to_string(cache.in_cols));

  GatedBlockGrads g;
  const std::size_t width = cache.in_cols;

  if (cache.gate_value == 0.0) {
    // gate_grad is 0 wherever the gate is closed, so grad_k vanishes and the
    // residual path receives nothing; the shortcut is transparent.
    g.x = grad_out;
    g.k = 0.0;
    g.l1 = PlainLayerGrads{Matrix(cache.in_rows, width), Matrix(width, width),
                           std::vector<double>(width, 0.0), std::vector<double>(width, 0.0)};
    g.l2 = g.l1;
    return g;
  }

  double dot = 0.0;
  for (std::size_t i = 0; i < grad_out.size(); ++i)
    dot += grad_out.data()[i] * cache.inner.residual.data()[i];
  g.k = gate_grad(cache.k) * dot;

  Matrix grad_res = cache.gate_value == 1.0 ? grad_out : scale(grad_out, cache.gate_value);
  PlainLayerGrads g2 = plain_layer_backward(grad_res, p.l2, cache.inner.l2);
  PlainLayerGrads g1 = plain_layer_backward(g2.x, p.l1, cache.inner.l1);
  g.x = add(g1.x, grad_out);
  g.l1 = std::move(g1);
  g.l2 = std::move(g2);
  return g;
}

std::pair<double, SoftmaxXentCache> softmax_xent_forward(const Matrix& logits,
                                                         std::span<const int> labels) {
  const std::size_t n = logits.rows();
  const std::size_t classes = logits.cols();
  if (labels.size() != n)
    throw ShapeError("softmax_xent_forward: " + std::to_string(labels.size()) + " labels for " +
                     logits.shape_str() + " logits");
  for (int lab : labels)
    if (lab < 0 || static_cast<std::size_t>(lab) >= classes)
      throw std::out_of_range("softmax_xent_forward: label " + std::to_string(lab) +
                              " outside [0, " + std::to_string(classes) + ")");

  SoftmaxXentCache cache;
  cache.probs = Matrix(n, classes);
  cache.labels.assign(labels.begin(), labels.end());

  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* z = logits.row(i);
    double* pr = cache.probs.row(i);
    double zmax = z[0];
    for (std::size_t j = 1; j < classes; ++j) zmax = std::max(zmax, z[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < classes; ++j) {
      pr[j] = std::exp(z[j] - zmax);
      sum += pr[j];
    }
    for (std::size_t j = 0; j < classes; ++j) pr[j] /= sum;
    loss -= std::log(pr[static_cast<std::size_t>(labels[i])]);
  }
  return {loss / static_cast<double>(n), std::move(cache)};
}

Matrix softmax_xent_backward(const SoftmaxXentCache& cache) {
  const std::size_t n = cache.probs.rows();
  Matrix g = cache.probs;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = g.row(i);
    row[static_cast<std::size_t>(cache.labels[i])] -= 1.0;
    for (std::size_t j = 0; j < cache.probs.cols(); ++j) row[j] *= inv_n;
  }
  return g;
}

}  // namespace gresnet
