#include "gresnet/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace gresnet {

void AdamNesterov::step(std::span<ParamView> params, std::span<const GradView> grads) {
  if (params.size() != grads.size())
    throw std::invalid_argument("AdamNesterov::step: " + std::to_string(params.size()) +
                                " params vs " + std::to_string(grads.size()) + " grads");

  if (m_.empty()) {
    m_.resize(params.size());
    v_.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i].assign(params[i].size, 0.0);
      v_[i].assign(params[i].size, 0.0);
    }
  } else if (m_.size() != params.size()) {
    throw std::invalid_argument("AdamNesterov::step: parameter layout changed between steps");
  }

  // Scan everything first so a bad gradient leaves the parameters untouched.
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (m_[i].size() != params[i].size)
      throw std::invalid_argument("AdamNesterov::step: parameter layout changed between steps");
    if (params[i].size != grads[i].size)
      throw std::invalid_argument("AdamNesterov::step: size mismatch for " + params[i].name);
    for (std::size_t j = 0; j < grads[i].size; ++j)
      if (!std::isfinite(grads[i].data[j]))
        throw std::runtime_error("AdamNesterov::step: non-finite gradient for parameter " +
                                 params[i].name);
  }

  const long long t = t_ + 1;
  const double b1 = cfg_.beta1;
  const double b2 = cfg_.beta2;
  const double m_corr = 1.0 - std::pow(b1, static_cast<double>(t + 1));
  const double g_corr = 1.0 - std::pow(b1, static_cast<double>(t));
  const double v_corr = 1.0 - std::pow(b2, static_cast<double>(t));

  for (std::size_t i = 0; i < params.size(); ++i) {
    const double wd = params[i].kind == ParamKind::gate ? cfg_.k_decay : cfg_.weight_decay;
    const double decay_mul = 1.0 - cfg_.lr * wd;
    double* theta = params[i].data;
    const double* g = grads[i].data;
    double* m = m_[i].data();
    double* v = v_[i].data();
    for (std::size_t j = 0; j < params[i].size; ++j) {
      if (wd != 0.0) theta[j] *= decay_mul;
      m[j] = b1 * m[j] + (1.0 - b1) * g[j];
      v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
      const double m_hat = m[j] / m_corr;
      const double g_hat = g[j] / g_corr;
      const double v_hat = v[j] / v_corr;
      theta[j] -= cfg_.lr * (b1 * m_hat + (1.0 - b1) * g_hat) / (std::sqrt(v_hat) + cfg_.epsilon);
    }
  }
  t_ = t;
}

}  // namespace gresnet
