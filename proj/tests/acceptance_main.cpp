// Acceptance suite: one line per criterion, exit 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "fluct/exact_dp.hpp"
#include "fluct/experiments.hpp"
#include "fluct/ladder.hpp"
#include "fluct/meander.hpp"
#include "fluct/montecarlo.hpp"
#include "fluct/stable.hpp"
#include "fluct/wiener_hopf.hpp"

using namespace fluct;

namespace {

int g_failures = 0;

double now() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void report(int criterion, bool ok, const std::string& what, double elapsed, double budget) {
  const bool in_budget = elapsed <= budget;
  const bool pass = ok && in_budget;
  if (!pass) ++g_failures;
  std::printf("[%s] criterion %2d: %s (%.1fs of %.0fs budget)\n", pass ? "PASS" : "FAIL",
              criterion, what.c_str(), elapsed, budget);
  std::fflush(stdout);
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

struct WhPmfs {
  std::vector<double> minus, plus;
};

WhPmfs wh_pmfs(StepModelPtr model, long n_max) {
  const auto seq = positivity_from_dp(*model, n_max);
  const auto wh = wh_input_from_dp(seq, model->tail.left_mass_q);
  WhPmfs out;
  out.minus = tau_pmf_from_positivity(wh.q_minus, static_cast<std::size_t>(n_max),
                                      LadderSign::minus);
  out.plus =
      tau_pmf_from_positivity(wh.q_plus, static_cast<std::size_t>(n_max), LadderSign::plus);
  return out;
}

void criterion_1() {
  const double t0 = now();
  double worst = 0.0;
  for (auto model : {make_simple_rw(), make_lazy_rw(), make_pareto_sym(1.5)}) {
    const auto p = wh_pmfs(model, 200);
    worst = std::max(worst, verify_factorization(p.plus, p.minus, 200));
  }
  report(1, worst <= 1e-9,
         fmt("wiener-hopf factorization residual %.2e <= 1e-9 over 3 models, order 200", worst),
         now() - t0, 5);
}

void criterion_2() {
  const double t0 = now();
  double worst = 0.0;
  for (auto model : {make_simple_rw(), make_lazy_rw()}) {
    SurvivalTable table(model, 200);
    const auto exact = tau_minus_pmf_exact(table, 200);
    const auto p = wh_pmfs(model, 200);
    for (long n = 1; n <= 200; ++n)
      worst = std::max(worst, std::fabs(exact[static_cast<std::size_t>(n)] -
                                        p.minus[static_cast<std::size_t>(n)]));
  }
  report(2, worst <= 1e-9, fmt("DP vs series tau pmf agree to %.2e <= 1e-9, n <= 200", worst),
         now() - t0, 10);
}

void criterion_3() {
  const double t0 = now();
  double worst = 0.0;
  for (auto model : {make_simple_rw(), make_lazy_rw()}) {
    worst = std::max(worst, verify_recurrence(*model, 64));
    worst = std::max(worst, verify_recurrence_rep2(*model, 64));
  }
  report(3, worst <= 1e-9, fmt("recurrence residuals %.2e <= 1e-9, n <= 64", worst), now() - t0,
         5);
}

void criterion_4() {
  const double t0 = now();
  bool ok = true;
  double h_exact_err = 0.0;
  for (auto model : {make_simple_rw(), make_lazy_rw()}) {
    SurvivalTable table(model, 3000);
    const auto chi = ladder_height_pmf(model, 8192, 40.0);
    const RenewalFunction H(chi, 32.0);
    for (int i = 1; i <= 20; ++i) {
      const double x = 1.0 + 0.5 * i;
      const auto iv = renewal_via_duality(table, x, 3000);
      // the direct bracket and the duality interval must overlap
      if (H.at_low(x) > iv.high + 1e-9 || iv.low > H.at_high(x) + 1e-9) ok = false;
    }
    if (model->name == "simple-rw")
      for (int m = 1; m <= 20; ++m)
        h_exact_err = std::max(
            h_exact_err, std::fabs(H.at(static_cast<double>(m)) - static_cast<double>(m)));
  }
  ok = ok && h_exact_err < 1e-12;
  report(4, ok,
         fmt("renewal duality agrees at 20 points per model; simple-RW H(m)=m to %.1e",
             h_exact_err),
         now() - t0, 30);
}

void criterion_5() {
  const double t0 = now();
  auto model = make_simple_rw();
  SurvivalTable table(model, 4096);
  NormSeq cn(model);
  auto err_at = [&](long n) {
    const DpRow& row = table.row(n);
    const double c = cn.c(n);
    double e = 0.0;
    for (std::size_t i = 0; i < row.probs.size(); ++i) {
      const double v = table.value(n, row.k_lo + static_cast<long long>(i));
      e = std::max(e, std::fabs(c * row.probs[i] / row.alive -
                                2.0 * meander_density_normal(v / c)));
    }
    return e;
  };
  const double e10 = err_at(1024), e12 = err_at(4096);
  report(5, e12 < 0.02 && e12 < e10,
         fmt("conditional LLT sup error %.2e < 0.02 at n=4096, down from %.2e at n=1024", e12,
             e10),
         now() - t0, 60);
}

void criterion_6() {
  const double t0 = now();
  auto model = make_simple_rw();
  SurvivalTable table(model, 4096);
  NormSeq cn(model);
  const double g0 = 1.0 / std::sqrt(2 * 3.14159265358979323846);
  auto dev_at = [&](long n) {
    const DpRow& row = table.row(n);
    const double c = cn.c(n);
    const double bound = std::pow(c, 0.7);
    double dev = 0.0;
    for (std::size_t i = 0; i < row.probs.size(); ++i) {
      const double v = table.value(n, row.k_lo + static_cast<long long>(i));
      if (v <= 0 || v > bound) continue;
      const double denom = 2.0 * g0 * v / (static_cast<double>(n) * row.alive);
      dev = std::max(dev, std::fabs(c * row.probs[i] / row.alive / denom - 1.0));
    }
    return dev;
  };
  const double d10 = dev_at(1024), d12 = dev_at(4096);
  report(6, d12 < 0.10 && d12 < d10,
         fmt("small-deviation ratio |r-1| max %.3f < 0.10 at n=4096 (%.3f at n=1024)", d12, d10),
         now() - t0, 60);
}

void criterion_7() {
  const double t0 = now();
  // lazy walk, case (b)
  const auto lazy = wh_pmfs(make_lazy_rw(), 512);
  const auto tail_lazy = tau_tail(lazy.minus, 512);
  const double r_lazy = 512.0 * lazy.minus[512] / (0.5 * tail_lazy[512]);
  // symmetric continuous walk, closed-form positivity
  std::vector<double> q(201, 0.5);
  const auto pmf_cont = tau_pmf_from_positivity(q, 200, LadderSign::plus);
  const auto tail_cont = tau_tail(pmf_cont, 200);
  const double r_cont = 200.0 * pmf_cont[200] / (0.5 * tail_cont[200]);
  // simple walk: odd epochs beyond the first carry exactly zero mass
  auto simple = make_simple_rw();
  SurvivalTable table(simple, 512);
  const auto exact = tau_minus_pmf_exact(table, 512);
  double odd = 0.0;
  for (long n = 3; n <= 512; n += 2) odd = std::max(odd, exact[static_cast<std::size_t>(n)]);
  const bool ok = r_lazy >= 0.9 && r_lazy <= 1.1 && r_cont >= 0.98 && r_cont <= 1.02 && odd == 0.0;
  report(7, ok,
         fmt("ladder-epoch ratios r-(512)=%.4f in [0.9,1.1], r+(200)=%.4f in [0.98,1.02], "
             "odd pmf max %.1e == 0",
             r_lazy, r_cont, odd),
         now() - t0, 10);
}

void criterion_8() {
  const double t0 = now();
  const auto grid = default_meander_grid();
  const StableParams normal(2.0, 0.0, 0.5);
  const auto d20 = meander_fixed_point(normal, grid);
  double sup = 0.0;
  for (std::size_t i = 0; i < d20.z.size(); ++i) {
    if (d20.z[i] > 4.0) break;
    sup = std::max(sup, std::fabs(d20.p[i] - meander_density_normal(d20.z[i])));
  }
  const double e20 = small_z_exponent(d20, 1e-3, 1e-2);

  const StableParams half(1.5, 0.0, calibrated_scale(1.5));
  const auto d150 = meander_fixed_point(half, grid);
  const double e150 = small_z_exponent(d150, 1e-3, 5e-2);

  const StableParams skew(1.5, -1.0, calibrated_scale(1.5));
  const auto d15m = meander_fixed_point(skew, grid);
  const double e15m = small_z_exponent(d15m, 1e-3, 5e-2);

  const bool ok = d20.converged && d150.converged && d15m.converged && sup < 5e-3 &&
                  std::fabs(e20 - 1.0) <= 0.05 && std::fabs(e150 - 0.75) <= 0.10 &&
                  std::fabs(e15m - 1.0) <= 0.10;
  report(8, ok,
         fmt("meander: sup %.1e < 5e-3; exponents %.3f/1.00, %.3f/0.75, %.3f/1.00", sup, e20,
             e150, e15m),
         now() - t0, 120);
}

// shared so criterion 11 can rerun with controlled seeds
McEstimate identity_estimate(long n, std::uint64_t seed, std::uint64_t target) {
  return estimate_negative_moment(make_pareto_sym(1.5), n, 1.5, target, McOptions{seed, 1});
}

double histogram_tv(std::uint64_t seed, std::uint64_t target) {
  auto model = make_simple_rw();
  const auto hist = meander_hist(model, 4096, 24, target, McOptions{seed, 1});
  double tv = 0.0;
  for (std::size_t b = 0; b < hist.density.size(); ++b) {
    const double z0 = hist.edges[b], z1 = hist.edges[b + 1];
    const double ref = std::exp(-z0 * z0 / 2) - std::exp(-z1 * z1 / 2);
    tv += std::fabs(hist.bin_mass(b) - ref);
  }
  return 0.5 * tv;
}

void criterion_9() {
  const double t0 = now();
  const std::uint64_t seed = 20260801;
  std::vector<double> dist;
  double est128 = 0.0;
  for (long n : {32L, 64L, 128L}) {
    const auto est = identity_estimate(n, seed, 200000);
    dist.push_back(std::fabs(est.value - 3.0));
    if (n == 128) est128 = est.value;
  }
  const bool monotone = dist[1] <= dist[0] && dist[2] <= dist[1];
  const bool in_band = dist[2] <= 0.30 * 3.0;
  report(9, in_band && monotone,
         fmt("identity: estimate %.4f at n=128 vs 3.0 (off %.1f%%, band 30%%); distances "
             "%.3f >= %.3f >= %.3f %s",
             est128, 100 * dist[2] / 3.0, dist[0], dist[1], dist[2],
             monotone ? "monotone" : "NOT monotone"),
         now() - t0, 600);
}

void criterion_10() {
  const double t0 = now();
  const double tv = histogram_tv(424242, 100000);
  report(10, tv < 0.08, fmt("meander histogram TV %.4f < 0.08 (n=4096, 1e5 accepted)", tv),
         now() - t0, 300);
}

void criterion_11() {
  const double t0 = now();
  // bit-identical reruns at the same seed
  const auto a = identity_estimate(64, 777, 40000);
  const auto b = identity_estimate(64, 777, 40000);
  const bool identity_identical = a.value == b.value && a.n_samples == b.n_samples;
  const double tv1 = histogram_tv(31, 30000);
  const double tv2 = histogram_tv(31, 30000);
  const bool tv_identical = tv1 == tv2;
  // a different seed moves the numbers but stays within the stated bands
  const auto c = identity_estimate(64, 778, 40000);
  const bool seed_shift_ok = std::fabs(c.value - a.value) <= 6 * (a.std_err + c.std_err) &&
                             histogram_tv(32, 30000) < 0.08;
  report(11, identity_identical && tv_identical && seed_shift_ok,
         fmt("reproducibility: same-seed reruns bit-identical (%d/%d), reseeded runs in band (%d)",
             identity_identical, tv_identical, seed_shift_ok),
         now() - t0, 300);
}

}  // namespace

int main() {
  const double t0 = now();
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  std::printf("%d of 11 criteria passed in %.0fs\n", 11 - g_failures, now() - t0);
  return g_failures == 0 ? 0 : 1;
}
