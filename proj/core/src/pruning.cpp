#include "gresnet/pruning.hpp"

#include <algorithm>
#include <stdexcept>
#include <variant>

namespace gresnet {

std::string strategy_name(PruneStrategy s) {
  return s == PruneStrategy::greedy_k ? "greedy_k" : "random";
}

PruneStrategy strategy_from_name(const std::string& name) {
  if (name == "greedy_k") return PruneStrategy::greedy_k;
  if (name == "random") return PruneStrategy::random;
  throw std::invalid_argument("unknown pruning strategy '" + name +
                              "' (expected greedy_k or random)");
}

Network remove_block(const Network& net, std::size_t block_index) {
  if (net.config.family == Family::classical)
    throw std::invalid_argument("remove_block: classical networks have no removable blocks");
  if (block_index >= net.middle.size())
    throw std::out_of_range("remove_block: index " + std::to_string(block_index) +
                            " out of range for " + std::to_string(net.middle.size()) +
                            " blocks");
  if (!net.active[block_index])
    throw std::invalid_argument("remove_block: block " + std::to_string(block_index) +
                                " already removed");
  Network out = net;
  out.active[block_index] = 0;
  return out;
}

PruneReport prune_curve(const Network& net, const Dataset& test, PruneStrategy strategy,
                        Rng& rng) {
  if (net.config.family == Family::classical)
    throw std::invalid_argument("prune_curve: classical networks have no removable blocks");
  if (strategy == PruneStrategy::greedy_k && net.config.family != Family::gresnet)
    throw std::invalid_argument("prune_curve: greedy ranking needs gate scalars, " +
                                family_name(net.config.family) + " has none");

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < net.middle.size(); ++i)
    if (net.active[i]) order.push_back(i);

  if (strategy == PruneStrategy::greedy_k) {
    auto k_of = [&](std::size_t i) { return std::get<GatedBlockParams>(net.middle[i]).k; };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return k_of(a) < k_of(b); });
  } else {
    rng.shuffle(order);
  }

  PruneReport rep;
  rep.strategy = strategy;
  rep.seed = rng.seed();
  rep.removal_order = order;

  Network work = net;
  rep.accuracy_curve.emplace_back(0, 100.0 - error_rate(work, test.images, test.labels));
  for (std::size_t r = 0; r < order.size(); ++r) {
    work.active[order[r]] = 0;
    rep.accuracy_curve.emplace_back(r + 1,
                                    100.0 - error_rate(work, test.images, test.labels));
  }
  return rep;
}

double curve_auc(const PruneReport& report) {
  double auc = 0.0;
  for (std::size_t i = 0; i + 1 < report.accuracy_curve.size(); ++i)
    auc += (report.accuracy_curve[i].second + report.accuracy_curve[i + 1].second) / 2.0;
  return auc;
}

std::vector<double> mean_accuracy(std::span<const PruneReport> reports) {
  if (reports.empty()) throw std::invalid_argument("mean_accuracy: no reports");
  const std::size_t n = reports[0].accuracy_curve.size();
  std::vector<double> out(n, 0.0);
  for (const auto& rep : reports) {
    if (rep.accuracy_curve.size() != n)
      throw std::invalid_argument("mean_accuracy: curves have different lengths");
    for (std::size_t j = 0; j < n; ++j) out[j] += rep.accuracy_curve[j].second;
  }
  for (double& v : out) v /= static_cast<double>(reports.size());
  return out;
}

}  // namespace gresnet
