#include "gresnet/report.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace gresnet {

namespace {
using nlohmann::json;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

std::string report_to_json(const RunReport& r) {
  json j;
  j["format_version"] = r.format_version;
  j["arch"] = family_name(r.options.net.family);
  j["depth"] = r.options.net.depth;
  j["width"] = r.options.net.width;
  j["in_dim"] = r.options.net.in_dim;
  j["num_classes"] = r.options.net.num_classes;
  j["seed"] = r.options.net.seed;
  j["bn_momentum"] = r.options.net.bn_momentum;
  j["bn_epsilon"] = r.options.net.bn_epsilon;
  j["epochs"] = r.options.epochs;
  j["batch_size"] = r.options.batch_size;
  j["optimizer"] = json{{"lr", r.options.opt.lr},
                        {"beta1", r.options.opt.beta1},
                        {"beta2", r.options.opt.beta2},
                        {"epsilon", r.options.opt.epsilon},
                        {"weight_decay", r.options.opt.weight_decay},
                        {"k_decay", r.options.opt.k_decay}};
  j["init_scheme"] = r.init_scheme;
  j["rng_algorithm"] = r.rng_algorithm;
  json rows = json::array();
  for (const EpochRow& e : r.per_epoch)
    rows.push_back(json{{"epoch", e.epoch},
                        {"train_loss", e.train_loss},
                        {"train_error", e.train_error},
                        {"test_error", e.test_error}});
  j["per_epoch"] = std::move(rows);
  j["final_test_error"] = r.final_test_error;
  if (r.mean_k) j["mean_k"] = *r.mean_k;
  if (!r.k_profile.empty()) {
    json kp = json::array();
    for (const auto& [idx, k] : r.k_profile) kp.push_back(json::array({idx, k}));
    j["k_profile"] = std::move(kp);
  }
  j["wall_time_seconds"] = r.wall_time_seconds;
  return j.dump(2) + "\n";
}

RunReport report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("bad report JSON: ") + e.what());
  }
  RunReport r;
  r.format_version = j.at("format_version").get<int>();
  r.options.net.family = family_from_name(j.at("arch").get<std::string>());
  r.options.net.depth = j.at("depth").get<int>();
  r.options.net.width = j.at("width").get<int>();
  r.options.net.in_dim = j.at("in_dim").get<int>();
  r.options.net.num_classes = j.at("num_classes").get<int>();
  r.options.net.seed = j.at("seed").get<std::uint64_t>();
  r.options.net.bn_momentum = j.at("bn_momentum").get<double>();
  r.options.net.bn_epsilon = j.at("bn_epsilon").get<double>();
  r.options.epochs = j.at("epochs").get<int>();
  r.options.batch_size = j.at("batch_size").get<std::size_t>();
  const json& o = j.at("optimizer");
  r.options.opt.lr = o.at("lr").get<double>();
  r.options.opt.beta1 = o.at("beta1").get<double>();
  r.options.opt.beta2 = o.at("beta2").get<double>();
  r.options.opt.epsilon = o.at("epsilon").get<double>();
  r.options.opt.weight_decay = o.at("weight_decay").get<double>();
  r.options.opt.k_decay = o.at("k_decay").get<double>();
  r.init_scheme = j.at("init_scheme").get<std::string>();
  r.rng_algorithm = j.at("rng_algorithm").get<std::string>();
  for (const json& e : j.at("per_epoch")) {
    EpochRow row;
    row.epoch = e.at("epoch").get<int>();
    row.train_loss = e.at("train_loss").get<double>();
    row.train_error = e.at("train_error").get<double>();
    row.test_error = e.at("test_error").get<double>();
    r.per_epoch.push_back(row);
  }
  r.final_test_error = j.at("final_test_error").get<double>();
  if (j.contains("mean_k")) r.mean_k = j.at("mean_k").get<double>();
  if (j.contains("k_profile"))
    for (const json& kp : j.at("k_profile"))
      r.k_profile.emplace_back(kp.at(0).get<int>(), kp.at(1).get<double>());
  r.wall_time_seconds = j.at("wall_time_seconds").get<double>();
  return r;
}

void write_report_json(const std::filesystem::path& path, const RunReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << report_to_json(report);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

RunReport read_report_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return report_from_json(buf.str());
}

std::string metrics_csv_header() { return "epoch,train_loss,train_error,test_error"; }

std::string metrics_csv_row(const EpochRow& row) {
  return std::to_string(row.epoch) + "," + format_double(row.train_loss) + "," +
         format_double(row.train_error) + "," + format_double(row.test_error);
}

}  // namespace gresnet
