#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace gresnet {

/// Symmetric uniform weight initialization, described either by the fan-in
/// rule used for networks ("he_uniform": U on +-sqrt(6/fan_in)) or by an
/// explicit half-width ("uniform:<a>": U on +-a).
struct InitScheme {
  enum class Kind { he_uniform, uniform };

  Kind kind = Kind::he_uniform;
  double a = 0.0;  // half-width, Kind::uniform only

  static InitScheme he_uniform() { return {Kind::he_uniform, 0.0}; }
  static InitScheme uniform(double a) { return {Kind::uniform, a}; }

  /// "he_uniform" or "uniform:<a>"; parse() inverts name().
  std::string name() const;
  static InitScheme parse(const std::string& text);

  double half_width(std::size_t fan_in) const;

  /// Per-component variance: half_width^2 / 3.
  double variance(std::size_t fan_in) const;
};

/// How far a freshly drawn n x n weight tensor sits from the all-zeros
/// tensor, empirically. Per-component E[W^2] estimates the scheme variance;
/// the totals are means over trials of the summed squared / absolute
/// component distances. Under a 1/n-variance scheme the summed squared
/// distance grows linearly in n.
struct InitDistanceReport {
  std::string scheme;
  std::size_t n = 0;
  std::size_t trials = 0;
  double per_component_mean_sq = 0.0;
  double analytic_variance = 0.0;
  double total_sq_distance = 0.0;
  double total_abs_distance = 0.0;
};

/// Draws `trials` independent n x n tensors and averages the distance
/// statistics. Requires trials >= 1000 so the 3% variance check has
/// headroom. A degenerate zero-width scheme draws nothing and reports
/// exact zeros.
InitDistanceReport init_distance_report(const InitScheme& scheme, std::size_t n,
                                        std::size_t trials, std::uint64_t seed = 1);

}  // namespace gresnet
