#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "gresnet/analysis.hpp"

using namespace gresnet;

TEST_CASE("init scheme names parse back to themselves") {
  CHECK(InitScheme::he_uniform().name() == "he_uniform");
  CHECK(InitScheme::parse("he_uniform").kind == InitScheme::Kind::he_uniform);
  const InitScheme u = InitScheme::uniform(0.25);
  CHECK(InitScheme::parse(u.name()).a == 0.25);
  CHECK_THROWS_AS(InitScheme::parse("gaussian"), std::exception);
  CHECK_THROWS_AS(InitScheme::parse("uniform:abc"), std::exception);
}

TEST_CASE("half-width and variance follow the fan-in rule") {
  const InitScheme he = InitScheme::he_uniform();
  CHECK(he.half_width(6) == doctest::Approx(1.0));  // sqrt(6/6)
  CHECK(he.half_width(24) == doctest::Approx(0.5));
  CHECK(he.variance(6) == doctest::Approx(1.0 / 3.0));
  // For an n x n tensor the per-component variance is 2/n.
  CHECK(he.variance(50) == doctest::Approx(2.0 / 50.0));

  const InitScheme u = InitScheme::uniform(0.3);
  CHECK(u.half_width(999) == 0.3);
  CHECK(u.variance(999) == doctest::Approx(0.09 / 3.0));
}

TEST_CASE("measured per-component variance tracks the analytic value") {
  const auto rep = init_distance_report(InitScheme::he_uniform(), 20, 2000, 5);
  CHECK(rep.n == 20);
  CHECK(rep.trials == 2000);
  CHECK(rep.analytic_variance == doctest::Approx(2.0 / 20.0));
  CHECK(std::abs(rep.per_component_mean_sq - rep.analytic_variance) <=
        0.03 * rep.analytic_variance);
  // n^2 components at variance 2/n: the summed square concentrates near 2n.
  CHECK(rep.total_sq_distance == doctest::Approx(2.0 * 20).epsilon(0.05));
}

TEST_CASE("doubling n doubles the summed squared distance, not the absolute one") {
  const auto small = init_distance_report(InitScheme::he_uniform(), 10, 2000, 9);
  const auto big = init_distance_report(InitScheme::he_uniform(), 20, 2000, 9);
  const double sq_ratio = big.total_sq_distance / small.total_sq_distance;
  const double abs_ratio = big.total_abs_distance / small.total_abs_distance;
  CHECK(sq_ratio == doctest::Approx(2.0).epsilon(0.10));
  // The absolute distance grows like n^1.5 instead.
  CHECK(abs_ratio == doctest::Approx(std::pow(2.0, 1.5)).epsilon(0.10));
  CHECK(abs_ratio > 2.5);
}

TEST_CASE("a fixed-width scheme scales quadratically instead") {
  const auto small = init_distance_report(InitScheme::uniform(0.4), 10, 1500, 11);
  const auto big = init_distance_report(InitScheme::uniform(0.4), 20, 1500, 11);
  CHECK(big.total_sq_distance / small.total_sq_distance == doctest::Approx(4.0).epsilon(0.10));
}

TEST_CASE("report inputs are validated") {
  CHECK_THROWS_AS(init_distance_report(InitScheme::he_uniform(), 0, 2000), std::exception);
  CHECK_THROWS_AS(init_distance_report(InitScheme::he_uniform(), 10, 10), std::exception);
  const auto zero = init_distance_report(InitScheme::uniform(0.0), 10, 2000);
  CHECK(zero.total_sq_distance == 0.0);
  CHECK(zero.total_abs_distance == 0.0);
  CHECK(zero.per_component_mean_sq == 0.0);
}

TEST_CASE("identical seeds reproduce the measurement") {
  const auto a = init_distance_report(InitScheme::he_uniform(), 12, 1200, 3);
  const auto b = init_distance_report(InitScheme::he_uniform(), 12, 1200, 3);
  CHECK(a.total_sq_distance == b.total_sq_distance);
  CHECK(a.total_abs_distance == b.total_abs_distance);
}
