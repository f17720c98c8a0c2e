#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "fluct/exact_dp.hpp"

using namespace fluct;

namespace {

// independent oracle: enumerate every path of a small lattice walk and
// accumulate P(S_n = value, tau^- > n) plus the tau^- pmf
struct Enumerated {
  std::vector<std::map<long long, double>> alive;  // [n] offset -> prob
  std::vector<double> tau_pmf;                     // [n]
};

Enumerated enumerate_paths(const StepModel& m, int n_max) {
  Enumerated out;
  out.alive.resize(static_cast<std::size_t>(n_max) + 1);
  out.tau_pmf.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  out.alive[0][0] = 1.0;
  for (int n = 1; n <= n_max; ++n) {
    for (const auto& [k, p] : out.alive[static_cast<std::size_t>(n - 1)]) {
      for (std::size_t j = 0; j < m.step_probs.size(); ++j) {
        if (m.step_probs[j] == 0.0) continue;
        const long long k2 = k + m.k_min + static_cast<long long>(j);
        const double value = m.shift_a * n + static_cast<double>(k2) * m.span_h;
        const double mass = p * m.step_probs[j];
        if (value <= 1e-12) out.tau_pmf[static_cast<std::size_t>(n)] += mass;
        else out.alive[static_cast<std::size_t>(n)][k2] += mass;
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("unconditioned pmf") {
  auto simple = make_simple_rw();
  const auto two = unconditioned_pmf(*simple, 2);
  // S_2 = 2 + 2k in offset units k
  CHECK(two.at(-2) == doctest::Approx(0.25));
  CHECK(two.at(-1) == doctest::Approx(0.5));
  CHECK(two.at(0) == doctest::Approx(0.25));

  auto lazy = make_lazy_rw();
  const auto one = unconditioned_pmf(*lazy, 1);
  CHECK(one.at(-1) == doctest::Approx(0.25));
  CHECK(one.at(0) == doctest::Approx(0.5));
  CHECK(one.at(1) == doctest::Approx(0.25));

  const auto ten = unconditioned_pmf(*simple, 10);
  CHECK(ten.at(-5) == doctest::Approx(252.0 / 1024).epsilon(1e-14));  // P(S_10 = 0)

  CHECK_THROWS_AS(unconditioned_pmf(*make_gaussian(), 3), std::invalid_argument);

  // mass bookkeeping under step truncation
  auto pareto = make_pareto_sym(1.5, 512);
  const long n = 6;
  const auto rows = unconditioned_rows(*pareto, n);
  KahanSum mass;
  for (double p : rows.back().probs) mass.add(p);
  const double step_trunc = pareto->trunc_mass_left + pareto->trunc_mass_right;
  CHECK(mass.value() == doctest::Approx(1.0).epsilon(n * step_trunc + 1e-12));
}

TEST_CASE("survival table basics") {
  auto simple = make_simple_rw();
  SurvivalTable table(simple, 16);
  const DpRow& r1 = table.row(1);
  CHECK(r1.probs.size() == 1);
  CHECK(table.value(1, r1.k_lo) == doctest::Approx(1.0));
  CHECK(r1.probs[0] == doctest::Approx(0.5));
  CHECK(table.survival(1) == doctest::Approx(0.5));
  CHECK(table.survival(2) == doctest::Approx(0.25));

  auto lazy = make_lazy_rw();
  SurvivalTable lt(lazy, 8);
  CHECK(lt.survival(2) == doctest::Approx(3.0 / 16).epsilon(1e-14));

  // survival is non-increasing, all probabilities nonnegative, and rows sum
  // to the survival within the defect bound
  for (long n = 1; n <= 16; ++n) {
    CHECK(table.survival(n) <= table.survival(n - 1) + 1e-15);
    KahanSum s;
    for (double p : table.row(n).probs) {
      CHECK(p >= 0.0);
      s.add(p);
    }
    CHECK(std::fabs(s.value() - table.survival(n)) <= table.row(n).mass_defect + 1e-12);
  }
}

TEST_CASE("survival table against the path-enumeration oracle") {
  for (auto model : {make_simple_rw(), make_lazy_rw(), make_shift_lattice(Rational(1, 3))}) {
    const int n_max = 9;
    const auto oracle = enumerate_paths(*model, n_max);
    SurvivalTable table(model, n_max);
    for (int n = 1; n <= n_max; ++n) {
      const DpRow& row = table.row(n);
      double oracle_mass = 0.0;
      for (const auto& [k, p] : oracle.alive[static_cast<std::size_t>(n)]) {
        oracle_mass += p;
        const bool in_range =
            k >= row.k_lo && k < row.k_lo + static_cast<long long>(row.probs.size());
        REQUIRE(in_range);
        CHECK(row.probs[static_cast<std::size_t>(k - row.k_lo)] ==
              doctest::Approx(p).epsilon(1e-13));
      }
      CHECK(table.survival(n) == doctest::Approx(oracle_mass).epsilon(1e-13));
    }
  }
}

TEST_CASE("tau pmf: exact values and parity zeros") {
  auto simple = make_simple_rw();
  SurvivalTable table(simple, 256);
  const auto pmf = tau_minus_pmf_exact(table, 256);
  CHECK(pmf[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(pmf[2] == doctest::Approx(0.25).epsilon(1e-15));
  for (long n = 3; n <= 255; n += 2) CHECK(pmf[static_cast<std::size_t>(n)] == 0.0);

  KahanSum total;
  for (long n = 1; n <= 256; ++n) total.add(pmf[static_cast<std::size_t>(n)]);
  CHECK(total.value() + table.survival(256) == doctest::Approx(1.0).epsilon(1e-10));

  auto lazy = make_lazy_rw();
  SurvivalTable lt(lazy, 8);
  const auto lp = tau_minus_pmf_exact(lt, 8);
  CHECK(lp[1] == doctest::Approx(0.75).epsilon(1e-15));

  const auto oracle = enumerate_paths(*lazy, 8);
  for (long n = 1; n <= 8; ++n)
    CHECK(lp[static_cast<std::size_t>(n)] ==
          doctest::Approx(oracle.tau_pmf[static_cast<std::size_t>(n)]).epsilon(1e-13));
}

TEST_CASE("conditional local probabilities") {
  auto simple = make_simple_rw();
  SurvivalTable table(simple, 4);
  // n=1: the only surviving state is S_1 = 1, offset 0
  CHECK(table.conditional_local(1, 0) == doctest::Approx(1.0));
  // n=2: only S_2 = 2 survives
  const DpRow& r2 = table.row(2);
  CHECK(table.conditional_local(2, r2.k_lo) == doctest::Approx(1.0));
  // n=4 against enumeration over the 16 paths
  const auto oracle = enumerate_paths(*simple, 4);
  double surv = 0.0;
  for (const auto& [k, p] : oracle.alive[4]) surv += p;
  for (const auto& [k, p] : oracle.alive[4])
    CHECK(table.conditional_local(4, k) == doctest::Approx(p / surv).epsilon(1e-13));
}

TEST_CASE("recurrence residuals") {
  CHECK(verify_recurrence(*make_simple_rw(), 64) < 1e-10);
  CHECK(verify_recurrence(*make_lazy_rw(), 64) < 1e-10);
  CHECK(verify_recurrence(*make_simple_rw(), 1) == 0.0);
  // fractional and irrational shifts exercise the strict window boundaries
  CHECK(verify_recurrence(*make_shift_lattice(Rational(1, 3)), 48) < 1e-10);
  CHECK(verify_recurrence(*make_shift_lattice_irrational(0.70710678118654752, 0.2), 32) <
        1e-10);
}

TEST_CASE("distributional recurrence for B_n") {
  CHECK(verify_recurrence_rep2(*make_simple_rw(), 64) < 1e-9);
  CHECK(verify_recurrence_rep2(*make_lazy_rw(), 64) < 1e-9);
  CHECK(verify_recurrence_rep2(*make_shift_lattice(Rational(1, 3)), 32) < 1e-9);
}

TEST_CASE("scaling limit shape settles (Kolmogorov halving)") {
  auto simple = make_simple_rw();
  SurvivalTable table(simple, 4096);
  NormSeq cn(simple);
  auto cdf_at = [&](long n, double u) {
    const DpRow& r = table.row(n);
    const double c = cn.c(n);
    KahanSum acc;
    for (std::size_t i = 0; i < r.probs.size(); ++i) {
      if (table.value(n, r.k_lo + static_cast<long long>(i)) / c > u) break;
      acc.add(r.probs[i]);
    }
    return acc.value() / r.alive;
  };
  auto dist = [&](long n1, long n2) {
    double worst = 0.0;
    for (double u = 0.05; u <= 8.0; u += 0.05)
      worst = std::max(worst, std::fabs(cdf_at(n1, u) - cdf_at(n2, u)));
    return worst;
  };
  const double k1 = dist(1024, 2048);
  const double k2 = dist(2048, 4096);
  CHECK(k2 < 0.85 * k1);
}

TEST_CASE("csv export schema") {
  auto simple = make_simple_rw();
  SurvivalTable table(simple, 3);
  std::ostringstream os;
  table.export_csv(os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "n,offset,prob,survival,mass_defect");
  std::getline(is, line);
  CHECK(line.substr(0, 4) == "0,0,");
}

TEST_CASE("partial table on memory budget") {
  DpOptions opts;
  opts.max_row_width = 64;
  auto pareto = make_pareto_sym(1.5, 256);
  SurvivalTable table(pareto, 100, opts);
  CHECK(table.partial());
  CHECK(table.max_n() < 100);
  CHECK_THROWS_WITH_AS(table.row(table.max_n() + 1), doctest::Contains("partial"),
                       std::out_of_range);
}
