#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "gresnet/matrix.hpp"

namespace gresnet {

/// Seedable random stream. The core generator is std::mt19937_64, whose output
/// sequence is fixed bit-for-bit by the C++ standard, so uniform and integer
/// draws are reproducible across platforms for a given seed. normal() uses the
/// polar method and is exact up to libm's log/sqrt.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64";

  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return gen_(); }

  /// Unbiased draw on [0, n) via rejection.
  std::uint64_t below(std::uint64_t n);

  /// Uniform real on [lo, hi). Derived from the top 53 bits of one draw.
  double uniform(double lo, double hi);

  /// Standard normal.
  double normal();

  /// Seed-deterministic Fisher-Yates permutation of idx.
  void shuffle(std::span<std::size_t> idx);

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// rows x cols matrix of i.i.d. uniforms on [lo, hi). Throws if lo >= hi.
Matrix draw_uniform(Rng& rng, std::size_t rows, std::size_t cols, double lo, double hi);

}  // namespace gresnet
