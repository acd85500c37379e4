#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "gresnet/optimizer.hpp"
#include "gresnet/rng.hpp"

using namespace gresnet;

namespace {

ParamView view(const std::string& name, std::vector<double>& v, ParamKind kind = ParamKind::tensor) {
  return ParamView{name, v.data(), v.size(), {v.size()}, kind};
}

GradView gview(const std::vector<double>& v) { return GradView{v.data(), v.size()}; }

}  // namespace

TEST_CASE("zero gradients leave parameters unchanged with no decay") {
  std::vector<double> theta = {1.5, -2.0, 0.25};
  std::vector<double> grads = {0.0, 0.0, 0.0};
  std::vector<ParamView> params = {view("w", theta)};
  std::vector<GradView> gs = {gview(grads)};

  AdamNesterov opt(AdamNesterovConfig{});
  for (int i = 0; i < 10; ++i) opt.step(params, gs);
  CHECK(theta == std::vector<double>{1.5, -2.0, 0.25});
  CHECK(opt.step_count() == 10);
}

TEST_CASE("first step matches the update formula by hand") {
  // Single parameter theta = 3, gradient 2, default hyperparameters.
  std::vector<double> theta = {3.0};
  std::vector<double> grads = {2.0};
  std::vector<ParamView> params = {view("w", theta)};
  std::vector<GradView> gs = {gview(grads)};

  AdamNesterovConfig cfg;
  AdamNesterov opt(cfg);
  opt.step(params, gs);

  const double g = 2.0;
  const double m = (1 - cfg.beta1) * g;
  const double v = (1 - cfg.beta2) * g * g;
  const double m_hat = m / (1 - std::pow(cfg.beta1, 2));
  const double g_hat = g / (1 - cfg.beta1);
  const double v_hat = v / (1 - cfg.beta2);
  const double expect =
      3.0 - cfg.lr * (cfg.beta1 * m_hat + (1 - cfg.beta1) * g_hat) / (std::sqrt(v_hat) + cfg.epsilon);
  CHECK(theta[0] == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("decay shrinks the parameter before the gradient update") {
  std::vector<double> theta = {3.0};
  std::vector<double> grads = {2.0};
  std::vector<ParamView> params = {view("w", theta)};
  std::vector<GradView> gs = {gview(grads)};

  AdamNesterovConfig cfg;
  cfg.weight_decay = 0.1;
  AdamNesterov opt(cfg);
  opt.step(params, gs);

  const double g = 2.0;
  const double m_hat = (1 - cfg.beta1) * g / (1 - std::pow(cfg.beta1, 2));
  const double g_hat = g / (1 - cfg.beta1);
  const double v_hat = (1 - cfg.beta2) * g * g / (1 - cfg.beta2);
  const double expect = 3.0 * (1 - cfg.lr * cfg.weight_decay) -
                        cfg.lr * (cfg.beta1 * m_hat + (1 - cfg.beta1) * g_hat) /
                            (std::sqrt(v_hat) + cfg.epsilon);
  CHECK(theta[0] == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("weight_decay touches tensors only, k_decay touches gates only") {
  std::vector<double> w = {1.0};
  std::vector<double> k = {1.0};
  std::vector<double> zero = {0.0};
  std::vector<ParamView> params = {view("w", w), view("k", k, ParamKind::gate)};
  std::vector<GradView> gs = {gview(zero), gview(zero)};

  SUBCASE("weight_decay only") {
    AdamNesterovConfig cfg;
    cfg.weight_decay = 0.5;
    AdamNesterov opt(cfg);
    opt.step(params, gs);
    CHECK(w[0] == doctest::Approx(1.0 * (1 - cfg.lr * 0.5)).epsilon(1e-15));
    CHECK(k[0] == 1.0);
  }
  SUBCASE("k_decay only") {
    AdamNesterovConfig cfg;
    cfg.k_decay = 0.5;
    AdamNesterov opt(cfg);
    opt.step(params, gs);
    CHECK(w[0] == 1.0);
    CHECK(k[0] == doctest::Approx(1.0 * (1 - cfg.lr * 0.5)).epsilon(1e-15));
  }
  SUBCASE("both, routed independently") {
    AdamNesterovConfig cfg;
    cfg.weight_decay = 0.25;
    cfg.k_decay = 0.5;
    AdamNesterov opt(cfg);
    opt.step(params, gs);
    CHECK(w[0] == doctest::Approx(1 - cfg.lr * 0.25).epsilon(1e-15));
    CHECK(k[0] == doctest::Approx(1 - cfg.lr * 0.5).epsilon(1e-15));
  }
}

TEST_CASE("repeated steps shrink a quadratic objective") {
  // min theta^2 from theta = 5; gradient is 2 theta.
  std::vector<double> theta = {5.0};
  std::vector<double> grads = {0.0};
  std::vector<ParamView> params = {view("w", theta)};
  std::vector<GradView> gs = {gview(grads)};

  AdamNesterovConfig cfg;
  cfg.lr = 0.01;
  AdamNesterov opt(cfg);
  for (int i = 0; i < 2000; ++i) {
    grads[0] = 2.0 * theta[0];
    opt.step(params, gs);
  }
  CHECK(std::abs(theta[0]) < 0.5);
}

TEST_CASE("a non-finite gradient aborts the step and names the parameter") {
  std::vector<double> a = {1.0};
  std::vector<double> b = {2.0};
  std::vector<double> ga = {0.5};
  std::vector<double> gb = {std::numeric_limits<double>::quiet_NaN()};
  std::vector<ParamView> params = {view("alpha", a), view("middle3.l2.W", b)};
  std::vector<GradView> gs = {gview(ga), gview(gb)};

  AdamNesterovConfig cfg;
  cfg.weight_decay = 0.1;  // decay must not fire either
  AdamNesterov opt(cfg);
  CHECK_THROWS_WITH_AS(opt.step(params, gs),
                       doctest::Contains("middle3.l2.W"), std::runtime_error);
  // Nothing moved, not even the first (finite) parameter.
  CHECK(a[0] == 1.0);
  CHECK(b[0] == 2.0);
  CHECK(opt.step_count() == 0);

  gb[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(opt.step(params, gs), std::runtime_error);
  CHECK(a[0] == 1.0);
  CHECK(b[0] == 2.0);
}

TEST_CASE("identical seeds and gradients yield identical trajectories") {
  auto run = [] {
    Rng rng(42);
    std::vector<double> theta(20);
    for (double& t : theta) t = rng.uniform(-1.0, 1.0);
    std::vector<double> grads(20);
    std::vector<ParamView> params = {ParamView{"w", theta.data(), 20, {4, 5}, ParamKind::tensor}};
    std::vector<GradView> gs = {GradView{grads.data(), 20}};
    AdamNesterovConfig cfg;
    cfg.weight_decay = 0.01;
    AdamNesterov opt(cfg);
    for (int i = 0; i < 50; ++i) {
      for (std::size_t j = 0; j < 20; ++j) grads[j] = rng.uniform(-1.0, 1.0) + theta[j];
      opt.step(params, gs);
    }
    return theta;
  };
  CHECK(run() == run());
}

TEST_CASE("changing the parameter layout between steps is rejected") {
  std::vector<double> a = {1.0, 2.0};
  std::vector<double> ga = {0.1, 0.1};
  std::vector<ParamView> params = {view("w", a)};
  std::vector<GradView> gs = {gview(ga)};
  AdamNesterov opt(AdamNesterovConfig{});
  opt.step(params, gs);

  std::vector<double> b = {1.0, 2.0, 3.0};
  std::vector<double> gb = {0.1, 0.1, 0.1};
  std::vector<ParamView> params2 = {view("w", b)};
  std::vector<GradView> gs2 = {gview(gb)};
  CHECK_THROWS_AS(opt.step(params2, gs2), std::exception);
}
