#include "gresnet/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "gresnet/rng.hpp"

namespace gresnet {

std::string InitScheme::name() const {
  if (kind == Kind::he_uniform) return "he_uniform";
  char buf[64];
  std::snprintf(buf, sizeof buf, "uniform:%.17g", a);
  return buf;
}

InitScheme InitScheme::parse(const std::string& text) {
  if (text == "he_uniform") return he_uniform();
  if (text.rfind("uniform:", 0) == 0) {
    std::size_t used = 0;
    const std::string num = text.substr(8);
    const double a = std::stod(num, &used);
    if (used != num.size() || !(a >= 0.0))
      throw std::invalid_argument("bad init scheme half-width in '" + text + "'");
    return uniform(a);
  }
  throw std::invalid_argument("unknown init scheme '" + text +
                              "' (expected he_uniform or uniform:<a>)");
}

double InitScheme::half_width(std::size_t fan_in) const {
  if (kind == Kind::uniform) return a;
  if (fan_in == 0) throw std::invalid_argument("he_uniform needs fan_in >= 1");
  return std::sqrt(6.0 / static_cast<double>(fan_in));
}

double InitScheme::variance(std::size_t fan_in) const {
  const double l = half_width(fan_in);
  return l * l / 3.0;
}

InitDistanceReport init_distance_report(const InitScheme& scheme, std::size_t n,
                                        std::size_t trials, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("init_distance_report: n must be positive");
  if (trials < 1000)
    throw std::invalid_argument("init_distance_report: need at least 1000 trials, got " +
                                std::to_string(trials));

  InitDistanceReport rep;
  rep.scheme = scheme.name();
  rep.n = n;
  rep.trials = trials;
  rep.analytic_variance = scheme.variance(n);

  const double limit = scheme.half_width(n);
  if (limit == 0.0) return rep;  // every draw would be exactly 0

  Rng rng(seed);
  double sum_sq = 0.0;
  double sum_abs = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    for (std::size_t i = 0; i < n * n; ++i) {
      const double w = rng.uniform(-limit, limit);
      sum_sq += w * w;
      sum_abs += std::abs(w);
    }
  }
  const auto components = static_cast<double>(trials * n * n);
  rep.per_component_mean_sq = sum_sq / components;
  rep.total_sq_distance = sum_sq / static_cast<double>(trials);
  rep.total_abs_distance = sum_abs / static_cast<double>(trials);
  return rep;
}

}  // namespace gresnet
