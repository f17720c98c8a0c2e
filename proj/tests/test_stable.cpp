#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fluct/stable.hpp"

using namespace fluct;
using std::numbers::pi;

TEST_CASE("positivity index closed form") {
  CHECK(rho_from(1.0, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(rho_from(2.0, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(rho_from(1.5, 1.0) == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(rho_from(1.5, -1.0) == doctest::Approx(2.0 / 3).epsilon(1e-12));
}

TEST_CASE("admissible set is enforced") {
  CHECK_THROWS_AS(rho_from(1.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(rho_from(0.5, 1.0), std::domain_error);
  CHECK_THROWS_AS(rho_from(2.0, 0.3), std::domain_error);
  CHECK_THROWS_AS(rho_from(2.5, 0.0), std::domain_error);
  CHECK_THROWS_AS(StableParams(1.5, 0.0, -1.0), std::domain_error);
  // rho stays in (0,1) across the admissible set
  for (double alpha : {0.3, 0.7, 1.2, 1.5, 1.8, 2.0}) {
    for (double beta : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
      if (!admissible(alpha, beta)) continue;
      const double r = rho_from(alpha, beta);
      CHECK(r > 0.0);
      CHECK(r < 1.0);
    }
  }
}

TEST_CASE("characteristic function") {
  const StableParams normal(2.0, 0.0, 0.5);
  CHECK(normal.cf(0.0) == std::complex<double>(1.0, 0.0));
  CHECK(std::abs(normal.cf(1.0) - std::exp(-0.5)) < 1e-15);
  const StableParams cauchy(1.0, 0.0, 1.0);
  CHECK(std::abs(cauchy.cf(-2.0) - std::exp(-2.0)) < 1e-15);
  const StableParams skew(1.5, 0.7, 0.9);
  for (double t : {-3.0, -0.4, 0.2, 1.7, 9.0}) CHECK(std::abs(skew.cf(t)) <= 1.0);
}

TEST_CASE("density matches Gaussian and Cauchy closed forms") {
  const StableParams normal(2.0, 0.0, 0.5);
  CHECK(normal.density(0.0) == doctest::Approx(1.0 / std::sqrt(2 * pi)).epsilon(1e-8));
  const StableParams cauchy(1.0, 0.0, 1.0);
  CHECK(cauchy.density(0.0) == doctest::Approx(1.0 / pi).epsilon(1e-8));
  for (double x = -10.0; x <= 10.0; x += 2.5) {
    const double phi = std::exp(-x * x / 2) / std::sqrt(2 * pi);
    CHECK(std::fabs(normal.density(x) - phi) < 1e-7);
    CHECK(std::fabs(cauchy.density(x) - 1.0 / (pi * (1 + x * x))) < 1e-7);
  }
}

TEST_CASE("density symmetry for beta = 0") {
  const StableParams p(1.5, 0.0, calibrated_scale(1.5));
  for (double x : {0.3, 1.1, 4.0}) CHECK(p.density(x) == doctest::Approx(p.density(-x)).epsilon(1e-9));
  CHECK(p.density_at_zero() == doctest::Approx(p.density(0.0)).epsilon(1e-12));
}

TEST_CASE("calibrated scale") {
  CHECK(calibrated_scale(2.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(calibrated_scale(1.0) == doctest::Approx(pi / 2).epsilon(1e-12));
  // continuity at alpha -> 2
  CHECK(calibrated_scale(1.999) == doctest::Approx(0.5).epsilon(2e-3));
  // tail route: with the calibrated c, g(y)+g(-y) ~ (2-alpha) y^{-alpha-1}
  const double alpha = 1.5;
  const StableParams p(alpha, 0.3, calibrated_scale(alpha));
  const double y = 50.0;
  const double tail_level = (p.density(y) + p.density(-y)) * std::pow(y, alpha + 1);
  CHECK(tail_level == doctest::Approx(2 - alpha).epsilon(0.02));
}

namespace {
// Simpson integral of the density over [a, b]
double simpson_density(const StableParams& p, double a, double b, int intervals) {
  double acc = p.density(a) + p.density(b);
  for (int i = 1; i < intervals; ++i) {
    const double x = a + (b - a) * i / intervals;
    acc += p.density(x) * (i % 2 ? 4.0 : 2.0);
  }
  return acc * (b - a) / intervals / 3.0;
}
}  // namespace

TEST_CASE("normalization and rho consistency") {
  SUBCASE("gaussian window") {
    const StableParams p(2.0, 0.0, 0.5);
    CHECK(simpson_density(p, -6.0, 6.0, 240) == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(simpson_density(p, 0.0, 6.0, 120) == doctest::Approx(0.5).epsilon(1e-5));
  }
  SUBCASE("skewed heavy tail with analytic remainder") {
    const double alpha = 1.5, beta = 0.5;
    const StableParams p(alpha, beta, calibrated_scale(alpha));
    const double L = 100.0;
    const double body = simpson_density(p, -L, L, 2000);
    const double k_right = p.density(L) * std::pow(L, alpha + 1);
    const double k_left = p.density(-L) * std::pow(L, alpha + 1);
    const double tails = (k_right + k_left) / alpha * std::pow(L, -alpha);
    CHECK(body + tails == doctest::Approx(1.0).epsilon(1e-5));
    const double pos = simpson_density(p, 0.0, L, 1000) + k_right / alpha * std::pow(L, -alpha);
    CHECK(pos == doctest::Approx(rho_from(alpha, beta)).epsilon(1e-5));
  }
}

TEST_CASE("quadrature reports its accuracy") {
  const StableParams p(1.2, -0.4, calibrated_scale(1.2));
  const QuadResult q = p.density_quad(3.7);
  CHECK(q.converged);
  CHECK(q.error_estimate < 1e-9);
  CHECK(p.density(3.7) >= 0.0);
}
