#include "gresnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gresnet/rng.hpp"

namespace gresnet {

std::string family_name(Family f) {
  switch (f) {
    case Family::classical: return "classical";
    case Family::resnet: return "resnet";
    case Family::gresnet: return "gresnet";
  }
  throw std::logic_error("family_name: bad enum value");
}

Family family_from_name(const std::string& name) {
  if (name == "classical") return Family::classical;
  if (name == "resnet") return Family::resnet;
  if (name == "gresnet") return Family::gresnet;
  throw std::invalid_argument("unknown architecture '" + name +
                              "' (expected classical, resnet or gresnet)");
}

std::size_t Network::active_count() const {
  return static_cast<std::size_t>(std::count(active.begin(), active.end(), std::uint8_t{1}));
}

namespace {

Matrix draw_he_uniform(Rng& rng, std::size_t fan_in, std::size_t fan_out) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  return draw_uniform(rng, fan_in, fan_out, -limit, limit);
}

PlainLayer make_plain(Rng& rng, std::size_t width, const NetworkConfig& cfg) {
  PlainLayer l;
  l.dense.W = draw_he_uniform(rng, width, width);
  l.bn = BatchNormParams::make(width, cfg.bn_momentum, cfg.bn_epsilon);
  return l;
}

}  // namespace

Network build_network(const NetworkConfig& config) {
  if (config.depth < 1)
    throw std::invalid_argument("depth must be positive, got " + std::to_string(config.depth));
  if (config.width < 1 || config.in_dim < 1 || config.num_classes < 1)
    throw std::invalid_argument("width, in_dim and num_classes must all be positive");
  const bool block_family = config.family != Family::classical;
  if (block_family && config.depth % 2 != 0)
    throw std::invalid_argument(family_name(config.family) + " needs an even depth, got " +
                                std::to_string(config.depth));

  Rng rng(config.seed);
  Network net;
  net.config = config;
  const auto width = static_cast<std::size_t>(config.width);

  net.input_layer.W = draw_he_uniform(rng, static_cast<std::size_t>(config.in_dim), width);
  net.input_layer.b.assign(width, 0.0);

  const int node_count = block_family ? config.depth / 2 : config.depth;
  net.middle.reserve(static_cast<std::size_t>(node_count));
  for (int i = 0; i < node_count; ++i) {
    switch (config.family) {
      case Family::classical:
        net.middle.emplace_back(make_plain(rng, width, config));
        break;
      case Family::resnet: {
        ResidualBlockParams b;
        b.l1 = make_plain(rng, width, config);
        b.l2 = make_plain(rng, width, config);
        net.middle.emplace_back(std::move(b));
        break;
      }
      case Family::gresnet: {
        GatedBlockParams b;
        b.l1 = make_plain(rng, width, config);
        b.l2 = make_plain(rng, width, config);
        b.k = 1.0;
        net.middle.emplace_back(std::move(b));
        break;
      }
    }
  }
  net.active.assign(net.middle.size(), 1);

  net.output_layer.W = draw_he_uniform(rng, width, static_cast<std::size_t>(config.num_classes));
  net.output_layer.b.assign(static_cast<std::size_t>(config.num_classes), 0.0);
  return net;
}

std::pair<Matrix, NetCache> network_forward(Network& net, const Matrix& x, Mode mode) {
  if (x.cols() != net.input_layer.in_dim())
    throw ShapeError("network_forward: input is " + x.shape_str() + ", expected " +
                     std::to_string(net.input_layer.in_dim()) + " columns");

  NetCache cache;
  cache.mode = mode;
  cache.input = x;

  Matrix h = matmul(x, net.input_layer.W);
  add_row_vector(h, net.input_layer.b);

  cache.middle.resize(net.middle.size());
  for (std::size_t i = 0; i < net.middle.size(); ++i) {
    if (!net.active[i]) continue;
    MiddleNodeCache& slot = cache.middle[i];
    MiddleNode& node = net.middle[i];
    if (auto* pl = std::get_if<PlainLayer>(&node)) {
      auto [y, c] = plain_layer_forward(h, *pl, mode);
      h = std::move(y);
      slot.block = std::move(c);
    } else if (auto* bl = std::get_if<BareReluLayer>(&node)) {
      auto [y1, dc] = dense_forward(h, bl->dense);
      auto [y2, rc] = relu_forward(y1);
      h = std::move(y2);
      slot.bare_dense = std::move(dc);
      slot.bare_relu = std::move(rc);
      slot.is_bare = true;
    } else if (auto* rb = std::get_if<ResidualBlockParams>(&node)) {
      auto [y, c] = residual_block_forward(h, *rb, mode);
      h = std::move(y);
      slot.block = std::move(c);
    } else {
      auto [y, c] = gated_block_forward(h, std::get<GatedBlockParams>(node), mode);
      h = std::move(y);
      slot.block = std::move(c);
    }
  }

  auto [logits, oc] = dense_forward(h, net.output_layer);
  cache.output = std::move(oc);
  cache.logits = logits;
  return {std::move(logits), std::move(cache)};
}

NetworkGrads network_backward(const Network& net, const NetCache& cache,
                              std::span<const int> labels) {
  if (cache.mode != Mode::train)
    throw std::logic_error("network_backward needs a train-mode cache");
  if (cache.middle.size() != net.middle.size())
    throw std::invalid_argument("network_backward: cache does not match the network");

  auto [loss, lc] = softmax_xent_forward(cache.logits, labels);
  (void)loss;
  Matrix grad = softmax_xent_backward(lc);

  NetworkGrads g;
  g.middle.resize(net.middle.size());

  g.output_layer = dense_backward(grad, net.output_layer, cache.output);
  grad = std::move(g.output_layer.x);

  for (std::size_t i = net.middle.size(); i-- > 0;) {
    if (!net.active[i]) continue;
    const MiddleNodeCache& slot = cache.middle[i];
    auto& gslot = g.middle[i].grads;
    const MiddleNode& node = net.middle[i];
    if (const auto* pl = std::get_if<PlainLayer>(&node)) {
      PlainLayerGrads pg =
          plain_layer_backward(grad, *pl, std::get<PlainLayerCache>(slot.block));
      grad = std::move(pg.x);
      gslot = std::move(pg);
    } else if (const auto* bl = std::get_if<BareReluLayer>(&node)) {
      Matrix gr = relu_backward(grad, slot.bare_relu);
      DenseGrads dg = dense_backward(gr, bl->dense, slot.bare_dense);
      grad = std::move(dg.x);
      gslot = std::move(dg);
    } else if (const auto* rb = std::get_if<ResidualBlockParams>(&node)) {
      ResidualBlockGrads rg =
          residual_block_backward(grad, *rb, std::get<ResidualBlockCache>(slot.block));
      grad = std::move(rg.x);
      gslot = std::move(rg);
    } else {
      const auto& gb = std::get<GatedBlockParams>(node);
      GatedBlockGrads gg =
          gated_block_backward(grad, gb, std::get<GatedBlockCache>(slot.block));
      grad = std::move(gg.x);
      gslot = std::move(gg);
    }
  }

  // The raw input needs no gradient, so the input layer skips that product.
  g.input_layer.W = matmul_tn(cache.input, grad);
  g.input_layer.b = col_sum(grad);
  return g;
}

Matrix network_logits(const Network& net, const Matrix& x) {
  // Inference mode reads but never writes BN state, so the cast is safe.
  Network& mut = const_cast<Network&>(net);
  return network_forward(mut, x, Mode::infer).first;
}

std::vector<int> predict(const Network& net, const Matrix& x) {
  Matrix logits = network_logits(net, x);
  std::vector<int> out(logits.rows());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const double* row = logits.row(r);
    std::size_t best = 0;
    for (std::size_t c = 1; c < logits.cols(); ++c)
      if (row[c] > row[best]) best = c;
    out[r] = static_cast<int>(best);
  }
  return out;
}

double error_rate(const Network& net, const Matrix& images, const std::vector<int>& labels,
                  std::size_t batch_size) {
  if (images.rows() != labels.size())
    throw std::invalid_argument("error_rate: " + std::to_string(images.rows()) + " images vs " +
                                std::to_string(labels.size()) + " labels");
  if (images.rows() == 0) throw std::invalid_argument("error_rate: empty dataset");
  if (batch_size == 0) throw std::invalid_argument("error_rate: batch_size must be positive");

  std::size_t wrong = 0;
  for (std::size_t start = 0; start < images.rows(); start += batch_size) {
    const std::size_t n = std::min(batch_size, images.rows() - start);
    Matrix batch(n, images.cols());
    std::copy_n(images.row(start), n * images.cols(), batch.data());
    const std::vector<int> preds = predict(net, batch);
    for (std::size_t r = 0; r < n; ++r)
      if (preds[r] != labels[start + r]) ++wrong;
  }
  return 100.0 * static_cast<double>(wrong) / static_cast<double>(images.rows());
}

Network insert_identity_layer(const Network& net) {
  if (net.config.family != Family::classical)
    throw std::invalid_argument(
        "insert_identity_layer: only classical networks stay equivalent, got " +
        family_name(net.config.family));
  Network out = net;
  BareReluLayer layer;
  layer.dense.W = Matrix::identity(static_cast<std::size_t>(net.config.width));
  out.middle.emplace_back(std::move(layer));
  out.active.push_back(1);
  out.config.depth += 1;
  return out;
}

double mean_k(const Network& net) {
  if (net.config.family != Family::gresnet)
    throw std::invalid_argument("mean_k: " + family_name(net.config.family) +
                                " networks have no gate scalars");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < net.middle.size(); ++i) {
    if (!net.active[i]) continue;
    if (const auto* b = std::get_if<GatedBlockParams>(&net.middle[i])) {
      sum += b->k;
      ++n;
    }
  }
  if (n == 0) throw std::logic_error("mean_k: no active gated blocks");
  return sum / static_cast<double>(n);
}

std::vector<std::pair<int, double>> k_profile(const Network& net) {
  if (net.config.family != Family::gresnet)
    throw std::invalid_argument("k_profile: " + family_name(net.config.family) +
                                " networks have no gate scalars");
  std::vector<std::pair<int, double>> out;
  int idx = 0;
  for (const auto& node : net.middle)
    if (const auto* b = std::get_if<GatedBlockParams>(&node)) out.emplace_back(++idx, b->k);
  return out;
}

namespace {

ParamView view(std::string name, Matrix& m) {
  return {std::move(name), m.data(), m.size(), {m.rows(), m.cols()}, ParamKind::tensor};
}

ParamView view(std::string name, std::vector<double>& v) {
  return {std::move(name), v.data(), v.size(), {v.size()}, ParamKind::tensor};
}

ParamView view(std::string name, double& k) {
  return {std::move(name), &k, 1, {1}, ParamKind::gate};
}

void plain_learnables(const std::string& prefix, PlainLayer& l, std::vector<ParamView>& out) {
  out.push_back(view(prefix + ".W", l.dense.W));
  out.push_back(view(prefix + ".gamma", l.bn.gamma));
  out.push_back(view(prefix + ".beta", l.bn.beta));
}

void plain_state(const std::string& prefix, PlainLayer& l, std::vector<ParamView>& out) {
  plain_learnables(prefix, l, out);
  out.push_back(view(prefix + ".running_mean", l.bn.running_mean));
  out.push_back(view(prefix + ".running_var", l.bn.running_var));
}

GradView gv(const Matrix& m) { return {m.data(), m.size()}; }
GradView gv(const std::vector<double>& v) { return {v.data(), v.size()}; }
GradView gv(const double& k) { return {&k, 1}; }

void plain_grads(const PlainLayerGrads& g, std::vector<GradView>& out) {
  out.push_back(gv(g.W));
  out.push_back(gv(g.gamma));
  out.push_back(gv(g.beta));
}

}  // namespace

std::vector<ParamView> learnable_params(Network& net) {
  std::vector<ParamView> out;
  out.push_back(view("input.W", net.input_layer.W));
  out.push_back(view("input.b", net.input_layer.b));
  for (std::size_t i = 0; i < net.middle.size(); ++i) {
    if (!net.active[i]) continue;
    const std::string p = "middle" + std::to_string(i);
    MiddleNode& node = net.middle[i];
    if (auto* pl = std::get_if<PlainLayer>(&node)) {
      plain_learnables(p, *pl, out);
    } else if (auto* bl = std::get_if<BareReluLayer>(&node)) {
      out.push_back(view(p + ".W", bl->dense.W));
      if (bl->dense.has_bias()) out.push_back(view(p + ".b", bl->dense.b));
    } else if (auto* rb = std::get_if<ResidualBlockParams>(&node)) {
      plain_learnables(p + ".l1", rb->l1, out);
      plain_learnables(p + ".l2", rb->l2, out);
    } else {
      auto& gb = std::get<GatedBlockParams>(node);
      plain_learnables(p + ".l1", gb.l1, out);
      plain_learnables(p + ".l2", gb.l2, out);
      out.push_back(view(p + ".k", gb.k));
    }
  }
  out.push_back(view("output.W", net.output_layer.W));
  out.push_back(view("output.b", net.output_layer.b));
  return out;
}

std::vector<ParamView> state_arrays(Network& net) {
  std::vector<ParamView> out;
  out.push_back(view("input.W", net.input_layer.W));
  out.push_back(view("input.b", net.input_layer.b));
  for (std::size_t i = 0; i < net.middle.size(); ++i) {
    const std::string p = "middle" + std::to_string(i);
    MiddleNode& node = net.middle[i];
    if (auto* pl = std::get_if<PlainLayer>(&node)) {
      plain_state(p, *pl, out);
    } else if (auto* bl = std::get_if<BareReluLayer>(&node)) {
      out.push_back(view(p + ".W", bl->dense.W));
      if (bl->dense.has_bias()) out.push_back(view(p + ".b", bl->dense.b));
    } else if (auto* rb = std::get_if<ResidualBlockParams>(&node)) {
      plain_state(p + ".l1", rb->l1, out);
      plain_state(p + ".l2", rb->l2, out);
    } else {
      auto& gb = std::get<GatedBlockParams>(node);
      plain_state(p + ".l1", gb.l1, out);
      plain_state(p + ".l2", gb.l2, out);
      out.push_back(view(p + ".k", gb.k));
    }
  }
  out.push_back(view("output.W", net.output_layer.W));
  out.push_back(view("output.b", net.output_layer.b));
  return out;
}

std::vector<GradView> grad_views(const Network& net, const NetworkGrads& grads) {
  if (grads.middle.size() != net.middle.size())
    throw std::invalid_argument("grad_views: gradient bundle does not match the network");
  std::vector<GradView> out;
  out.push_back(gv(grads.input_layer.W));
  out.push_back(gv(grads.input_layer.b));
  for (std::size_t i = 0; i < net.middle.size(); ++i) {
    if (!net.active[i]) continue;
    const auto& slot = grads.middle[i].grads;
    if (const auto* pg = std::get_if<PlainLayerGrads>(&slot)) {
      plain_grads(*pg, out);
    } else if (const auto* dg = std::get_if<DenseGrads>(&slot)) {
      out.push_back(gv(dg->W));
      if (!dg->b.empty()) out.push_back(gv(dg->b));
    } else if (const auto* rg = std::get_if<ResidualBlockGrads>(&slot)) {
      plain_grads(rg->l1, out);
      plain_grads(rg->l2, out);
    } else if (const auto* gg = std::get_if<GatedBlockGrads>(&slot)) {
      plain_grads(gg->l1, out);
      plain_grads(gg->l2, out);
      out.push_back(gv(gg->k));
    } else {
      throw std::logic_error("grad_views: no gradients for active node " + std::to_string(i));
    }
  }
  out.push_back(gv(grads.output_layer.W));
  out.push_back(gv(grads.output_layer.b));
  return out;
}

}  // namespace gresnet
