#include "fluct/wiener_hopf.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "fluct/exact_dp.hpp"

namespace fluct {

std::vector<double> tau_pmf_from_positivity(const std::vector<double>& q, std::size_t n_max,
                                            LadderSign) {
  if (q.size() < n_max + 1)
    throw std::invalid_argument("tau_pmf_from_positivity: q too short (need q[1..N])");
  PowerSeries a(n_max);
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double qn = q[n];
    if (!(qn >= 0.0 && qn <= 1.0))
      throw std::domain_error("tau_pmf_from_positivity: q out of [0,1] at n=" + std::to_string(n));
    a[n] = -qn / static_cast<double>(n);
  }
  const PowerSeries e = series_exp(a);  // 1 - E z^tau
  std::vector<double> pmf(n_max + 1, 0.0);
  for (std::size_t n = 1; n <= n_max; ++n) {
    double v = -e[n];
    if (v < 0) {
      if (v < -1e-12) throw std::runtime_error("tau_pmf_from_positivity: negative pmf");
      v = 0.0;
    }
    pmf[n] = v;
  }
  return pmf;
}

std::vector<double> tau_pmf_std_err(const std::vector<double>& q_std_err,
                                    const std::vector<double>& pmf, std::size_t n_max) {
  // e_0 = 1, e_m = -pmf_m; d pmf_n / d q_j = e_{n-j} / j
  std::vector<double> se(n_max + 1, 0.0);
  for (std::size_t n = 1; n <= n_max; ++n) {
    double var = 0.0;
    for (std::size_t j = 1; j <= n && j < q_std_err.size(); ++j) {
      const double e = (n == j) ? 1.0 : -pmf[n - j];
      const double s = q_std_err[j] * e / static_cast<double>(j);
      var += s * s;
    }
    se[n] = std::sqrt(var);
  }
  return se;
}

double verify_factorization(const std::vector<double>& pmf_plus,
                            const std::vector<double>& pmf_minus, std::size_t n_max) {
  PowerSeries fp(n_max), fm(n_max);
  fp[0] = fm[0] = 1.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    fp[n] = -(n < pmf_plus.size() ? pmf_plus[n] : 0.0);
    fm[n] = -(n < pmf_minus.size() ? pmf_minus[n] : 0.0);
  }
  const PowerSeries prod = series_mul(fp, fm);
  double worst = std::fabs(prod[0] - 1.0);
  if (n_max >= 1) worst = std::max(worst, std::fabs(prod[1] + 1.0));
  for (std::size_t n = 2; n <= n_max; ++n) worst = std::max(worst, std::fabs(prod[n]));
  return worst;
}

std::vector<double> tau_tail(const std::vector<double>& pmf, std::size_t n_max) {
  std::vector<double> tail(n_max + 1, 1.0);
  KahanSum acc;
  for (std::size_t n = 1; n <= n_max; ++n) {
    if (n < pmf.size()) acc.add(pmf[n]);
    tail[n] = 1.0 - acc.value();
  }
  return tail;
}

PositivitySeq positivity_from_dp(const StepModel& model, long n_max, long long range_cap) {
  if (!model.is_lattice())
    throw std::invalid_argument("positivity_from_dp: lattice model required");
  PositivitySeq out;
  out.leq0.assign(n_max + 1, 0.0);
  out.lt0.assign(n_max + 1, 0.0);
  out.eq0.assign(n_max + 1, 0.0);
  out.gt0.assign(n_max + 1, 0.0);

  DpRow row;
  row.k_lo = 0;
  row.probs = {1.0};
  DpOptions opts;
  std::unique_ptr<FftConvolver> conv;
  for (long n = 1; n <= n_max; ++n) {
    convolve_with_step(row, model, opts, conv);
    // cap the range symmetrically; capped mass bounds the error of every count
    if (range_cap > 0 && static_cast<long long>(row.probs.size()) > 2 * range_cap) {
      KahanSum dropped;
      const long long front = std::min<long long>(
          std::max<long long>(0, -range_cap - row.k_lo), static_cast<long long>(row.probs.size()));
      for (long long i = 0; i < front; ++i) dropped.add(row.probs[static_cast<std::size_t>(i)]);
      row.probs.erase(row.probs.begin(), row.probs.begin() + front);
      row.k_lo += front;
      while (row.k_lo + static_cast<long long>(row.probs.size()) - 1 > range_cap &&
             !row.probs.empty()) {
        dropped.add(row.probs.back());
        row.probs.pop_back();
      }
      row.mass_defect += dropped.value();
    }
    KahanSum leq, lt, eq, gt;
    for (std::size_t i = 0; i < row.probs.size(); ++i) {
      const double p = row.probs[i];
      if (p == 0.0) continue;
      const long long k = row.k_lo + static_cast<long long>(i);
      int cmp;  // sign of a*n + k*h
      if (model.shift_is_rational) {
        const long long lhs = model.shift_frac.num * n + k * model.shift_frac.den;
        cmp = lhs > 0 ? 1 : (lhs < 0 ? -1 : 0);
      } else {
        const double v = model.shift_a * static_cast<double>(n) +
                         static_cast<double>(k) * model.span_h;
        cmp = v > 0 ? 1 : (v < 0 ? -1 : 0);
      }
      if (cmp <= 0) leq.add(p);
      if (cmp < 0) lt.add(p);
      if (cmp == 0) eq.add(p);
      if (cmp > 0) gt.add(p);
    }
    out.leq0[n] = leq.value();
    out.lt0[n] = lt.value();
    out.eq0[n] = eq.value();
    out.gt0[n] = gt.value();
  }
  out.defect = row.mass_defect;
  return out;
}

WhInput wh_input_from_dp(const PositivitySeq& seq, double left_mass_q) {
  const std::size_t n_max = seq.leq0.size() - 1;
  WhInput out;
  out.q_minus.assign(n_max + 1, 0.0);
  out.q_plus.assign(n_max + 1, 0.0);
  for (std::size_t n = 1; n <= n_max; ++n) {
    // mass the capped DP lost lives in the far tails; split it by the
    // model's tail balance (exact for symmetric models)
    const double missing = std::max(0.0, 1.0 - seq.leq0[n] - seq.gt0[n]);
    double q = seq.leq0[n] + left_mass_q * missing;
    q = std::min(1.0, std::max(0.0, q));
    out.q_minus[n] = q;
    out.q_plus[n] = 1.0 - q;
  }
  return out;
}

std::vector<double> spitzer_average(const PositivitySeq& seq) {
  const std::size_t n_max = seq.gt0.size() - 1;
  std::vector<double> avg(n_max + 1, 0.0);
  KahanSum acc;
  for (std::size_t n = 1; n <= n_max; ++n) {
    acc.add(seq.gt0[n]);
    avg[n] = acc.value() / static_cast<double>(n);
  }
  return avg;
}

void export_wh_csv(std::ostream& out, const std::vector<double>& pmf_plus,
                   const std::vector<double>& pmf_minus) {
  const std::size_t n_max = std::min(pmf_plus.size(), pmf_minus.size()) - 1;
  const auto tp = tau_tail(pmf_plus, n_max);
  const auto tm = tau_tail(pmf_minus, n_max);
  const double resid = verify_factorization(pmf_plus, pmf_minus, n_max);
  out << "n,pmf_plus,pmf_minus,tail_plus,tail_minus,factorization_residual\n";
  for (std::size_t n = 1; n <= n_max; ++n)
    out << n << ',' << pmf_plus[n] << ',' << pmf_minus[n] << ',' << tp[n] << ',' << tm[n] << ','
        << resid << '\n';
}

}  // namespace fluct
