#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gresnet/data.hpp"
#include "gresnet/model.hpp"
#include "gresnet/rng.hpp"

namespace gresnet {

/// greedy_k removes the smallest-k block first (gresnet only); random
/// removes in a seed-deterministic permutation drawn up front.
enum class PruneStrategy { greedy_k, random };

std::string strategy_name(PruneStrategy s);
PruneStrategy strategy_from_name(const std::string& name);

struct PruneReport {
  PruneStrategy strategy = PruneStrategy::random;
  std::uint64_t seed = 0;
  std::vector<std::size_t> removal_order;  // middle indices, removal sequence
  // (blocks removed so far, test accuracy %); first point is the unpruned net.
  std::vector<std::pair<std::size_t, double>> accuracy_curve;
};

/// Copy of net with one block marked inactive, making it pass-through.
/// Parameters stay in place so the removal is reversible and checkpoints
/// keep the full model. Block families only.
Network remove_block(const Network& net, std::size_t block_index);

/// Removes active blocks one at a time per the strategy, evaluating test
/// accuracy after every removal with BN running statistics frozen. Greedy
/// order is ascending k, ties broken by ascending block index.
PruneReport prune_curve(const Network& net, const Dataset& test, PruneStrategy strategy,
                        Rng& rng);

/// Trapezoidal area under the accuracy curve over the removal counts.
double curve_auc(const PruneReport& report);

/// Pointwise mean accuracy across reports; all curves must be equally long.
std::vector<double> mean_accuracy(std::span<const PruneReport> reports);

}  // namespace gresnet
