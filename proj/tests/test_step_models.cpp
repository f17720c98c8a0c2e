#include <cmath>
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "fluct/step_models.hpp"

using namespace fluct;

TEST_CASE("truncated second moment") {
  auto simple = make_simple_rw();
  CHECK(simple->mu(3.0) == doctest::Approx(1.0 / 9).epsilon(1e-14));
  CHECK(simple->mu(0.5) == 0.0);
  auto gauss = make_gaussian();
  const double v = gauss->mu(10.0) * 100.0;
  CHECK(v >= 0.99);
  CHECK(v <= 1.0);
}

TEST_CASE("normalizing sequence") {
  SUBCASE("simple random walk: c_n = sqrt(n)") {
    NormSeq cn(make_simple_rw());
    CHECK(cn.c(100) == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(cn.c(64) == doctest::Approx(8.0).epsilon(1e-9));
    // monotone on the cached range
    double prev = 0.0;
    for (long n : {2L, 4L, 16L, 64L, 256L}) {
      const double c = cn.c(n);
      CHECK(c >= prev);
      prev = c;
    }
  }
  SUBCASE("unit-variance continuous steps") {
    NormSeq cn(make_gaussian());
    CHECK(cn.c(10000) == doctest::Approx(100.0).epsilon(0.02));
    // n mu(c_n) ~ 1 at continuity points
    auto gauss = make_gaussian();
    for (long n : {100L, 1000L}) CHECK(n * gauss->mu(cn.c(n)) == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("lattice jump points bracket 1/n") {
    auto simple = make_simple_rw();
    NormSeq cn(simple);
    const long n = 49;
    const double c = cn.c(n);
    CHECK(n * simple->mu(c * (1 + 1e-9)) <= 1.0 + 1e-9);
    CHECK(n * simple->mu(c * (1 - 1e-9)) >= 1.0 - 1e-9);
  }
  SUBCASE("pareto slope") {
    NormSeq cn(make_pareto_sym(1.5));
    std::vector<double> lx, ly;
    for (long n = 256; n <= 65536; n *= 2) {
      lx.push_back(std::log(static_cast<double>(n)));
      ly.push_back(std::log(cn.c(n)));
    }
    CHECK(fit_slope(lx, ly) == doctest::Approx(1.0 / 1.5).epsilon(0.05 / (1.0 / 1.5)));
  }
}

TEST_CASE("pareto tail calibration against c_n") {
  auto pareto = make_pareto_sym(1.5);
  NormSeq cn(pareto);
  const long n = 65536;
  const double c = cn.c(n);
  const double tail = 1.0 - pareto->cdf_leq(c) + pareto->cdf_leq(-c - 1e-9);
  const double ratio = tail * static_cast<double>(n) * 1.5 / 0.5;
  CHECK(ratio == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("lattice structure") {
  auto info = lattice_info(*make_simple_rw());
  CHECK(info.is_lattice);
  CHECK(info.span_h == doctest::Approx(2.0));
  CHECK(info.shift_a == doctest::Approx(1.0));
  info = lattice_info(*make_lazy_rw());
  CHECK(info.span_h == doctest::Approx(1.0));
  CHECK(info.shift_a == doctest::Approx(0.0));
  CHECK_FALSE(lattice_info(*make_gaussian()).is_lattice);
  info = lattice_info(*make_shift_lattice(Rational(1, 3)));
  CHECK(info.span_h == doctest::Approx(1.0));
  CHECK(info.shift_a == doctest::Approx(1.0 / 3));
  // stored spans are already maximal on every lattice registry model
  for (const auto& m : {make_simple_rw(), make_lazy_rw(), make_pareto_sym(1.5, 256),
                        make_pareto_asym(1.5, 0.75, 256), make_shift_lattice(Rational(1, 3))}) {
    const auto li = lattice_info(*m);
    CHECK(li.span_h == doctest::Approx(m->span_h));
    CHECK(li.shift_a == doctest::Approx(m->shift_a));
  }
}

TEST_CASE("declared mean-zero models have mean zero") {
  SUBCASE("small supports, exact rational weights") {
    for (const auto& m : {make_simple_rw(), make_lazy_rw(), make_shift_lattice(Rational(1, 3))}) {
      double mean = 0.0;
      for (std::size_t i = 0; i < m->step_probs.size(); ++i)
        mean += m->support_value(m->k_min + static_cast<long long>(i)) * m->step_probs[i];
      CHECK(std::fabs(mean) < 1e-15);
      CHECK(m->mean_zero);
    }
  }
  SUBCASE("asymmetric pareto centered including the analytic tail") {
    const double alpha = 1.5, p = 0.75, q = 0.25;
    auto m = make_pareto_asym(alpha, p);
    double mean = 0.0;
    for (std::size_t i = 0; i < m->step_probs.size(); ++i)
      mean += m->support_value(m->k_min + static_cast<long long>(i)) * m->step_probs[i];
    const auto K = static_cast<std::uint64_t>(-m->k_min);
    mean += (p - q) * power_tail_sum(alpha, K) / zeta(alpha + 1);
    CHECK(std::fabs(mean) < 1e-10);
  }
}

TEST_CASE("pmf bookkeeping sums to one") {
  auto pareto = make_pareto_sym(1.5, 2048);
  CHECK(pareto->stored_mass() + pareto->trunc_mass_left + pareto->trunc_mass_right ==
        doctest::Approx(1.0).epsilon(1e-12));
  auto asym = make_pareto_asym(1.5, 0.75, 2048);
  CHECK(asym->stored_mass() + asym->trunc_mass_left + asym->trunc_mass_right ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("samplers are deterministic and calibrated") {
  auto simple = make_simple_rw();
  SUBCASE("identical seed stream gives identical output") {
    RngStream a(42, 0), b(42, 0);
    for (int i = 0; i < 100; ++i) CHECK(simple->sample(a) == simple->sample(b));
  }
  SUBCASE("simple RW frequencies") {
    RngStream rng(7, 0);
    const int n = 1'000'000;
    long minus = 0;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = simple->sample(rng);
      sum += x;
      if (x < 0) ++minus;
    }
    CHECK(std::fabs(sum / n) < 0.005);
    CHECK(std::fabs(static_cast<double>(minus) / n - 0.5) < 0.002);
  }
  SUBCASE("pareto magnitudes match the analytic law") {
    auto pareto = make_pareto_sym(1.5);
    RngStream rng(11, 0);
    const int n = 400'000;
    long ones = 0, big = 0;
    for (int i = 0; i < n; ++i) {
      const double x = std::fabs(pareto->sample(rng));
      if (x == 1.0) ++ones;
      if (x > 100.0) ++big;
    }
    const double p1 = 1.0 / zeta(2.5);
    CHECK(static_cast<double>(ones) / n ==
          doctest::Approx(p1).epsilon(3.0 * std::sqrt(p1 * (1 - p1) / n) / p1));
    const double ptail = power_tail_sum(2.5, 100) / zeta(2.5);
    CHECK(static_cast<double>(big) / n == doctest::Approx(ptail).epsilon(0.2));
  }
}

TEST_CASE("cdf closures agree with stored atoms") {
  auto pareto = make_pareto_sym(1.5, 4096);
  double acc = pareto->trunc_mass_left;
  const double v = -3.0;
  for (std::size_t i = 0; i < pareto->step_probs.size(); ++i) {
    const double x = pareto->support_value(pareto->k_min + static_cast<long long>(i));
    if (x <= v) acc += pareto->step_probs[i];
  }
  CHECK(pareto->cdf_leq(v) == doctest::Approx(acc).epsilon(1e-12));
  auto lazy = make_lazy_rw();
  CHECK(lazy->cdf_leq(0.0) == doctest::Approx(0.75));
  CHECK(lazy->cdf_leq(-1.0) == doctest::Approx(0.25));
  CHECK(lazy->cdf_leq(-1.5) == 0.0);
}

TEST_CASE("scaled model") {
  auto half = scale_model(make_simple_rw(), 0.5);
  CHECK(half->span_h == doctest::Approx(1.0));
  CHECK(half->shift_a == doctest::Approx(0.5));
  RngStream rng(3, 0);
  for (int i = 0; i < 10; ++i) CHECK(std::fabs(half->sample(rng)) == doctest::Approx(0.5));
  NormSeq cn(half);
  CHECK(cn.c(100) == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("model definition files") {
  const std::string path = "test_model_tmp.model";
  SUBCASE("round trip with rational weights") {
    std::ofstream out(path);
    out << "name file-lazy\n"
        << "kind lattice\n"
        << "alpha 2\n"
        << "beta 0\n"
        << "support -1 0 1\n"
        << "weights 1/4 1/2 1/4\n"
        << "h 1\n"
        << "a 0\n";
    out.close();
    auto m = load_model_file(path);
    CHECK(m->name == "file-lazy");
    CHECK(m->span_h == doctest::Approx(1.0));
    CHECK(m->shift_a == doctest::Approx(0.0));
    CHECK(m->step_probs.size() == 3);
    CHECK(m->step_probs[1] == doctest::Approx(0.5));
    CHECK(m->mean_zero);
  }
  SUBCASE("maximal span recomputed from support") {
    std::ofstream out(path);
    out << "kind lattice\nsupport -2 0 2\nweights 1/4 1/2 1/4\n";
    out.close();
    auto m = load_model_file(path);
    CHECK(m->span_h == doctest::Approx(2.0));
    CHECK(m->shift_a == doctest::Approx(0.0));
  }
  SUBCASE("declared span mismatch is rejected") {
    std::ofstream out(path);
    out << "kind lattice\nsupport -1 1\nweights 1/2 1/2\nh 1\n";
    out.close();
    CHECK_THROWS_WITH_AS(load_model_file(path), doctest::Contains("declared h"),
                         std::runtime_error);
  }
  SUBCASE("parse errors cite line numbers") {
    std::ofstream out(path);
    out << "kind lattice\n"
        << "bogus-key 1\n";
    out.close();
    CHECK_THROWS_WITH_AS(load_model_file(path), doctest::Contains(":2:"), std::runtime_error);
  }
  SUBCASE("fractional shift support") {
    std::ofstream out(path);
    out << "kind lattice\nsupport -2/3 1/3 4/3\nweights 1/2 1/3 1/6\n";
    out.close();
    auto m = load_model_file(path);
    CHECK(m->span_h == doctest::Approx(1.0));
    CHECK(m->shift_a == doctest::Approx(1.0 / 3));
    CHECK(m->shift_is_rational);
    CHECK(m->shift_frac.num == 1);
    CHECK(m->shift_frac.den == 3);
  }
  std::remove(path.c_str());
}

TEST_CASE("registry lookup") {
  CHECK(model_from_name("simple-rw")->name == "simple-rw");
  CHECK(model_from_name("pareto:1.5")->tail.alpha == doctest::Approx(1.5));
  CHECK(model_from_name("pareto-asym:1.5:0.75")->tail.beta == doctest::Approx(0.5));
  CHECK(model_from_name("shift:1/3")->shift_frac.den == 3);
  CHECK(model_from_name("scale:1/2:simple-rw")->span_h == doctest::Approx(1.0));
  CHECK_FALSE(model_from_name("pareto-cont:1.5")->is_lattice());
  CHECK_THROWS_AS(model_from_name("no-such-model"), std::invalid_argument);
}
