#include "gresnet/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace gresnet {

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
  // Reject draws from the tail that would bias the modulo.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = gen_();
  } while (x >= limit);
  return x % n;
}

double Rng::uniform(double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("Rng::uniform: requires lo < hi");
  const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;  // [0, 1)
  double v = lo + (hi - lo) * u;
  if (v >= hi) v = std::nextafter(hi, lo);
  return v;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = uniform(-1.0, 1.0);
    v = uniform(-1.0, 1.0);
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double r = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * r;
  has_spare_ = true;
  return u * r;
}

void Rng::shuffle(std::span<std::size_t> idx) {
  if (idx.size() < 2) return;
  for (std::size_t i = idx.size() - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(below(i + 1));
    std::swap(idx[i], idx[j]);
  }
}

Matrix draw_uniform(Rng& rng, std::size_t rows, std::size_t cols, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("draw_uniform: requires lo < hi");
  Matrix m(rows, cols);
  double* p = m.data();
  for (std::size_t i = 0; i < m.size(); ++i) p[i] = rng.uniform(lo, hi);
  return m;
}

}  // namespace gresnet
