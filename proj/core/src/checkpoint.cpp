#include "gresnet/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "gresnet/rng.hpp"

namespace gresnet {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload is little-endian; big-endian hosts need byte swaps");
static_assert(sizeof(double) == 8);

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'G', 'R', 'N', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

std::string node_kind(const MiddleNode& node) {
  if (std::holds_alternative<PlainLayer>(node)) return "plain";
  if (std::holds_alternative<BareReluLayer>(node)) return "bare_relu";
  if (std::holds_alternative<ResidualBlockParams>(node)) return "residual";
  return "gated";
}

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t read_u32(std::istream& in, const std::filesystem::path& path) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
    throw std::runtime_error(path.string() + ": truncated checkpoint header");
  return v;
}

json config_to_json(const NetworkConfig& c) {
  return json{{"family", family_name(c.family)}, {"depth", c.depth},
              {"width", c.width},               {"in_dim", c.in_dim},
              {"num_classes", c.num_classes},   {"seed", c.seed},
              {"bn_momentum", c.bn_momentum},   {"bn_epsilon", c.bn_epsilon}};
}

NetworkConfig config_from_json(const json& j) {
  NetworkConfig c;
  c.family = family_from_name(j.at("family").get<std::string>());
  c.depth = j.at("depth").get<int>();
  c.width = j.at("width").get<int>();
  c.in_dim = j.at("in_dim").get<int>();
  c.num_classes = j.at("num_classes").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.bn_momentum = j.at("bn_momentum").get<double>();
  c.bn_epsilon = j.at("bn_epsilon").get<double>();
  return c;
}

json optimizer_to_json(const AdamNesterovConfig& o) {
  return json{{"lr", o.lr},           {"beta1", o.beta1},
              {"beta2", o.beta2},     {"epsilon", o.epsilon},
              {"weight_decay", o.weight_decay}, {"k_decay", o.k_decay}};
}

AdamNesterovConfig optimizer_from_json(const json& j) {
  AdamNesterovConfig o;
  o.lr = j.at("lr").get<double>();
  o.beta1 = j.at("beta1").get<double>();
  o.beta2 = j.at("beta2").get<double>();
  o.epsilon = j.at("epsilon").get<double>();
  o.weight_decay = j.at("weight_decay").get<double>();
  o.k_decay = j.at("k_decay").get<double>();
  return o;
}

/// Parameter arrays shaped like a fresh network of this structure, values
/// zeroed; the payload fills them in.
Network make_skeleton(const NetworkConfig& config, const std::vector<std::string>& kinds,
                      const std::vector<std::uint8_t>& active) {
  if (kinds.size() != active.size())
    throw std::runtime_error("checkpoint header: node_kinds and active lengths differ");
  const auto width = static_cast<std::size_t>(config.width);
  Network net;
  net.config = config;
  net.input_layer.W = Matrix(static_cast<std::size_t>(config.in_dim), width);
  net.input_layer.b.assign(width, 0.0);
  for (const std::string& kind : kinds) {
    auto zero_plain = [&] {
      PlainLayer l;
      l.dense.W = Matrix(width, width);
      l.bn = BatchNormParams::make(width, config.bn_momentum, config.bn_epsilon);
      return l;
    };
    if (kind == "plain") {
      net.middle.emplace_back(zero_plain());
    } else if (kind == "bare_relu") {
      BareReluLayer l;
      l.dense.W = Matrix(width, width);
      net.middle.emplace_back(std::move(l));
    } else if (kind == "residual") {
      ResidualBlockParams b;
      b.l1 = zero_plain();
      b.l2 = zero_plain();
      net.middle.emplace_back(std::move(b));
    } else if (kind == "gated") {
      GatedBlockParams b;
      b.l1 = zero_plain();
      b.l2 = zero_plain();
      net.middle.emplace_back(std::move(b));
    } else {
      throw std::runtime_error("checkpoint header: unknown node kind '" + kind + "'");
    }
  }
  net.active = active;
  net.output_layer.W = Matrix(width, static_cast<std::size_t>(config.num_classes));
  net.output_layer.b.assign(static_cast<std::size_t>(config.num_classes), 0.0);
  return net;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Network& net,
                     const AdamNesterovConfig& optimizer, const std::string& init_scheme) {
  // state_arrays needs mutable access for the views; saving only reads them.
  auto views = state_arrays(const_cast<Network&>(net));

  json header;
  header["format_version"] = kFormatVersion;
  header["config"] = config_to_json(net.config);
  header["init_scheme"] = init_scheme;
  header["rng_algorithm"] = Rng::kAlgorithm;
  header["optimizer"] = optimizer_to_json(optimizer);
  json kinds = json::array();
  for (const auto& node : net.middle) kinds.push_back(node_kind(node));
  header["node_kinds"] = std::move(kinds);
  header["active"] = net.active;
  json arrays = json::array();
  for (const auto& v : views) arrays.push_back(json{{"name", v.name}, {"shape", v.shape}});
  header["arrays"] = std::move(arrays);

  const std::string header_text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(kMagic, sizeof kMagic);
  write_u32(out, kFormatVersion);
  write_u32(out, static_cast<std::uint32_t>(header_text.size()));
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  for (const auto& v : views)
    out.write(reinterpret_cast<const char*>(v.data),
              static_cast<std::streamsize>(v.size * sizeof(double)));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());

  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw std::runtime_error(path.string() + ": not a checkpoint file");
  const std::uint32_t version = read_u32(in, path);
  if (version != kFormatVersion)
    throw std::runtime_error(path.string() + ": unsupported checkpoint version " +
                             std::to_string(version));
  const std::uint32_t header_len = read_u32(in, path);
  std::string header_text(header_len, '\0');
  if (!in.read(header_text.data(), header_len))
    throw std::runtime_error(path.string() + ": truncated checkpoint header");

  json header;
  try {
    header = json::parse(header_text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": bad checkpoint header: " + e.what());
  }

  Checkpoint ck;
  ck.init_scheme = header.at("init_scheme").get<std::string>();
  ck.rng_algorithm = header.at("rng_algorithm").get<std::string>();
  ck.optimizer = optimizer_from_json(header.at("optimizer"));
  ck.net = make_skeleton(config_from_json(header.at("config")),
                         header.at("node_kinds").get<std::vector<std::string>>(),
                         header.at("active").get<std::vector<std::uint8_t>>());

  auto views = state_arrays(ck.net);
  const auto& arrays = header.at("arrays");
  if (arrays.size() != views.size())
    throw std::runtime_error(path.string() + ": header lists " + std::to_string(arrays.size()) +
                             " arrays, structure implies " + std::to_string(views.size()));
  for (std::size_t i = 0; i < views.size(); ++i) {
    const std::string name = arrays[i].at("name").get<std::string>();
    const auto shape = arrays[i].at("shape").get<std::vector<std::size_t>>();
    if (name != views[i].name || shape != views[i].shape)
      throw std::runtime_error(path.string() + ": array " + std::to_string(i) + " is " + name +
                               ", expected " + views[i].name);
    if (!in.read(reinterpret_cast<char*>(views[i].data),
                 static_cast<std::streamsize>(views[i].size * sizeof(double))))
      throw std::runtime_error(path.string() + ": truncated payload at " + name);
  }
  in.peek();
  if (!in.eof())
    throw std::runtime_error(path.string() + ": trailing bytes after payload");
  return ck;
}

}  // namespace gresnet
