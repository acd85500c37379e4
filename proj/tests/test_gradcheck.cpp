#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "gresnet/layers.hpp"
#include "gresnet/model.hpp"
#include "gresnet/rng.hpp"
#include "support/oracles.hpp"

using namespace gresnet;
using testsupport::central_diff;
using testsupport::rel_err;

namespace {

constexpr double kKinkMargin = 1e-3;

double weighted_sum(const Matrix& y, const Matrix& c) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y.data()[i] * c.data()[i];
  return s;
}

bool near_kink(const Matrix& pre_activation) {
  for (double v : pre_activation.values())
    if (std::abs(v) < kKinkMargin) return true;
  return false;
}

bool near_kink(const PlainLayerCache& c) { return near_kink(c.relu.x); }

/// Checks every entry the views cover: finite difference of loss() against
/// the matching analytic gradient.
void check_entries(const std::function<double()>& loss, double* values, const double* grads,
                   std::size_t count, double tol) {
  for (std::size_t i = 0; i < count; ++i) {
    const double fd = central_diff(loss, values + i);
    CHECK(rel_err(fd, grads[i]) <= tol);
  }
}

PlainLayer random_plain(Rng& rng, std::size_t width) {
  PlainLayer l;
  l.dense.W = draw_uniform(rng, width, width, -0.9, 0.9);
  l.bn = BatchNormParams::make(width);
  for (double& g : l.bn.gamma) g = rng.uniform(0.5, 1.5);
  for (double& b : l.bn.beta) b = rng.uniform(-0.4, 0.4);
  return l;
}

}  // namespace

TEST_CASE("dense gradients match finite differences") {
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(100 + trial);
    const std::size_t batch = 2 + rng.below(4);
    const std::size_t in = 2 + rng.below(4);
    const std::size_t out = 2 + rng.below(4);
    DenseParams p{draw_uniform(rng, in, out, -1.0, 1.0), {}};
    const bool with_bias = trial % 2 == 0;
    if (with_bias)
      for (std::size_t j = 0; j < out; ++j) p.b.push_back(rng.uniform(-0.5, 0.5));
    Matrix x = draw_uniform(rng, batch, in, -1.0, 1.0);
    const Matrix c = draw_uniform(rng, batch, out, -1.0, 1.0);

    const auto loss = [&] { return weighted_sum(dense_forward(x, p).first, c); };
    const DenseCache cache = dense_forward(x, p).second;
    const DenseGrads g = dense_backward(c, p, cache);

    check_entries(loss, x.data(), g.x.data(), x.size(), 1e-6);
    check_entries(loss, p.W.data(), g.W.data(), p.W.size(), 1e-6);
    if (with_bias) check_entries(loss, p.b.data(), g.b.data(), p.b.size(), 1e-6);
  }
}

TEST_CASE("batch normalization gradients match finite differences") {
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(200 + trial);
    const std::size_t batch = trial == 0 ? 8 : 2 + rng.below(6);
    const std::size_t width = trial == 0 ? 5 : 2 + rng.below(5);
    BatchNormParams p = BatchNormParams::make(width);
    for (double& g : p.gamma) g = rng.uniform(0.5, 1.5);
    for (double& b : p.beta) b = rng.uniform(-0.5, 0.5);
    Matrix x = draw_uniform(rng, batch, width, -2.0, 2.0);
    const Matrix c = draw_uniform(rng, batch, width, -1.0, 1.0);

    const auto loss = [&] { return weighted_sum(bn_forward(x, p, Mode::train).first, c); };
    const BnCache cache = bn_forward(x, p, Mode::train).second;
    const BnGrads g = bn_backward(c, p, cache);

    check_entries(loss, x.data(), g.x.data(), x.size(), 1e-5);
    check_entries(loss, p.gamma.data(), g.gamma.data(), width, 1e-5);
    check_entries(loss, p.beta.data(), g.beta.data(), width, 1e-5);
  }
}

TEST_CASE("relu gradients match finite differences away from the kink") {
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(300 + trial);
    const std::size_t batch = 2 + rng.below(5);
    const std::size_t width = 2 + rng.below(5);
    Matrix x(batch, width);
    for (double& v : x.values())
      v = (rng.below(2) ? 1.0 : -1.0) * rng.uniform(2 * kKinkMargin, 2.0);
    const Matrix c = draw_uniform(rng, batch, width, -1.0, 1.0);

    const auto loss = [&] { return weighted_sum(relu_forward(x).first, c); };
    const ReluCache cache = relu_forward(x).second;
    const Matrix g = relu_backward(c, cache);
    check_entries(loss, x.data(), g.data(), x.size(), 1e-6);
  }
}

TEST_CASE("single Dot-BN-ReLU layer gradients match finite differences") {
  int done = 0;
  for (std::uint64_t seed = 400; done < 20; ++seed) {
    Rng rng(seed);
    const std::size_t batch = 4 + rng.below(5);
    const std::size_t width = 3 + rng.below(5);
    PlainLayer p = random_plain(rng, width);
    Matrix x = draw_uniform(rng, batch, width, -1.0, 1.0);
    const auto [y, cache] = plain_layer_forward(x, p, Mode::train);
    if (near_kink(cache)) continue;  // configuration too close to a ReLU kink
    ++done;

    const Matrix c = draw_uniform(rng, batch, width, -1.0, 1.0);
    const auto loss = [&] { return weighted_sum(plain_layer_forward(x, p, Mode::train).first, c); };
    const PlainLayerGrads g = plain_layer_backward(c, p, cache);

    check_entries(loss, x.data(), g.x.data(), x.size(), 1e-5);
    check_entries(loss, p.dense.W.data(), g.W.data(), p.dense.W.size(), 1e-5);
    check_entries(loss, p.bn.gamma.data(), g.gamma.data(), width, 1e-5);
    check_entries(loss, p.bn.beta.data(), g.beta.data(), width, 1e-5);
  }
}

TEST_CASE("residual block gradients match finite differences") {
  int done = 0;
  for (std::uint64_t seed = 500; done < 20; ++seed) {
    Rng rng(seed);
    const std::size_t batch = 4 + rng.below(5);
    const std::size_t width = 3 + rng.below(5);
    ResidualBlockParams p{random_plain(rng, width), random_plain(rng, width)};
    Matrix x = draw_uniform(rng, batch, width, -1.0, 1.0);
    const auto [u, cache] = residual_block_forward(x, p, Mode::train);
    if (near_kink(cache.l1) || near_kink(cache.l2)) continue;
    ++done;

    const Matrix c = draw_uniform(rng, batch, width, -1.0, 1.0);
    const auto loss = [&] {
      return weighted_sum(residual_block_forward(x, p, Mode::train).first, c);
    };
    const ResidualBlockGrads g = residual_block_backward(c, p, cache);

    check_entries(loss, x.data(), g.x.data(), x.size(), 1e-5);
    check_entries(loss, p.l1.dense.W.data(), g.l1.W.data(), p.l1.dense.W.size(), 1e-5);
    check_entries(loss, p.l1.bn.gamma.data(), g.l1.gamma.data(), width, 1e-5);
    check_entries(loss, p.l1.bn.beta.data(), g.l1.beta.data(), width, 1e-5);
    check_entries(loss, p.l2.dense.W.data(), g.l2.W.data(), p.l2.dense.W.size(), 1e-5);
    check_entries(loss, p.l2.bn.gamma.data(), g.l2.gamma.data(), width, 1e-5);
    check_entries(loss, p.l2.bn.beta.data(), g.l2.beta.data(), width, 1e-5);
  }
}

TEST_CASE("gated block gradients, including the gate scalar, match finite differences") {
  int done = 0;
  for (std::uint64_t seed = 600; done < 20; ++seed) {
    Rng rng(seed);
    const std::size_t batch = 4 + rng.below(5);
    const std::size_t width = 3 + rng.below(5);
    GatedBlockParams p{random_plain(rng, width), random_plain(rng, width),
                       rng.uniform(0.2, 2.5)};
    Matrix x = draw_uniform(rng, batch, width, -1.0, 1.0);
    const auto [u, cache] = gated_block_forward(x, p, Mode::train);
    if (near_kink(cache.inner.l1) || near_kink(cache.inner.l2)) continue;
    ++done;

    const Matrix c = draw_uniform(rng, batch, width, -1.0, 1.0);
    const auto loss = [&] { return weighted_sum(gated_block_forward(x, p, Mode::train).first, c); };
    const GatedBlockGrads g = gated_block_backward(c, p, cache);

    check_entries(loss, &p.k, &g.k, 1, 1e-5);
    check_entries(loss, x.data(), g.x.data(), x.size(), 1e-5);
    check_entries(loss, p.l1.dense.W.data(), g.l1.W.data(), p.l1.dense.W.size(), 1e-5);
    check_entries(loss, p.l1.bn.gamma.data(), g.l1.gamma.data(), width, 1e-5);
    check_entries(loss, p.l1.bn.beta.data(), g.l1.beta.data(), width, 1e-5);
    check_entries(loss, p.l2.dense.W.data(), g.l2.W.data(), p.l2.dense.W.size(), 1e-5);
    check_entries(loss, p.l2.bn.gamma.data(), g.l2.gamma.data(), width, 1e-5);
    check_entries(loss, p.l2.bn.beta.data(), g.l2.beta.data(), width, 1e-5);
  }
}

TEST_CASE("gate gradient at k = 0.7 is tight against finite differences") {
  int done = 0;
  for (std::uint64_t seed = 700; done < 5; ++seed) {
    Rng rng(seed);
    GatedBlockParams p{random_plain(rng, 4), random_plain(rng, 4), 0.7};
    Matrix x = draw_uniform(rng, 5, 4, -1.0, 1.0);
    const auto [u, cache] = gated_block_forward(x, p, Mode::train);
    if (near_kink(cache.inner.l1) || near_kink(cache.inner.l2)) continue;
    ++done;

    const Matrix c = draw_uniform(rng, 5, 4, -1.0, 1.0);
    const auto loss = [&] { return weighted_sum(gated_block_forward(x, p, Mode::train).first, c); };
    const GatedBlockGrads g = gated_block_backward(c, p, cache);
    const double fd = central_diff(loss, &p.k);
    CHECK(rel_err(fd, g.k) <= 1e-6);
  }
}

TEST_CASE("softmax cross-entropy gradient matches finite differences") {
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(800 + trial);
    const std::size_t batch = 2 + rng.below(5);
    const std::size_t classes = 2 + rng.below(5);
    Matrix logits = draw_uniform(rng, batch, classes, -2.0, 2.0);
    std::vector<int> labels(batch);
    for (auto& l : labels) l = static_cast<int>(rng.below(classes));

    const auto loss = [&] { return softmax_xent_forward(logits, labels).first; };
    const auto [value, cache] = softmax_xent_forward(logits, labels);
    const Matrix g = softmax_xent_backward(cache);
    check_entries(loss, logits.data(), g.data(), logits.size(), 1e-6);
  }
}

TEST_CASE("end-to-end network gradients match finite differences") {
  struct Config {
    Family family;
    int depth;
  };
  for (const Config cfg : {Config{Family::gresnet, 6}, Config{Family::resnet, 4},
                           Config{Family::classical, 3}}) {
    bool clean = false;
    for (std::uint64_t seed = 900; !clean; ++seed) {
      NetworkConfig nc;
      nc.family = cfg.family;
      nc.depth = cfg.depth;
      nc.width = 5;
      nc.in_dim = 7;
      nc.num_classes = 4;
      nc.seed = seed;
      Network net = build_network(nc);

      Rng rng(seed * 31 + 1);
      Matrix x = draw_uniform(rng, 4, 7, 0.0, 1.0);
      std::vector<int> labels(4);
      for (auto& l : labels) l = static_cast<int>(rng.below(4));

      const auto [logits, cache] = network_forward(net, x, Mode::train);
      clean = true;
      for (const auto& slot : cache.middle) {
        if (const auto* pc = std::get_if<PlainLayerCache>(&slot.block))
          clean = clean && !near_kink(*pc);
        else if (const auto* rc = std::get_if<ResidualBlockCache>(&slot.block))
          clean = clean && !near_kink(rc->l1) && !near_kink(rc->l2);
        else if (const auto* gc = std::get_if<GatedBlockCache>(&slot.block))
          clean = clean && !near_kink(gc->inner.l1) && !near_kink(gc->inner.l2);
      }
      if (!clean) continue;

      const auto loss = [&] {
        const Matrix l = network_forward(net, x, Mode::train).first;
        return softmax_xent_forward(l, labels).first;
      };
      const NetworkGrads grads = network_backward(net, cache, labels);
      auto params = learnable_params(net);
      auto views = grad_views(net, grads);
      REQUIRE(params.size() == views.size());

      // 50 entries sampled across all parameter arrays.
      Rng pick(seed * 17 + 3);
      for (int checkno = 0; checkno < 50; ++checkno) {
        const std::size_t p = pick.below(params.size());
        const std::size_t i = pick.below(params[p].size);
        const double fd = central_diff(loss, params[p].data + i);
        CHECK(rel_err(fd, views[p].data[i]) <= 1e-4);
      }
    }
  }
}
