#include "fluct/ladder.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace fluct {

double ChiPmf::mass() const {
  KahanSum s;
  for (double p : probs) s.add(p);
  return s.value();
}

ChiPmf ladder_height_pmf(StepModelPtr model, long n_max, double x_max, DpOptions opts) {
  if (!model->is_lattice())
    throw std::invalid_argument("ladder_height_pmf: lattice model required");
  if (!model->shift_is_rational)
    throw std::invalid_argument("ladder_height_pmf: rational lattice shift required");
  const long long q = model->shift_frac.den;
  const long long p = model->shift_frac.num;
  ChiPmf chi;
  chi.delta = model->span_h / static_cast<double>(q);
  const auto size = static_cast<std::size_t>(std::ceil(x_max / chi.delta));
  chi.probs.assign(size, 0.0);

  opts.rule = AbsorbRule::gt0;
  LatticeDp dp(model, opts);
  double above_xmax = 0.0;
  for (long n = 1; n <= n_max; ++n) {
    const auto absorbed = dp.step();
    if (dp.partial()) break;
    for (std::size_t i = 0; i < absorbed.probs.size(); ++i) {
      if (absorbed.probs[i] == 0.0) continue;
      // chi value = a n + k h = (p n + k q) * delta
      const long long idx = p * n + (absorbed.k_lo + static_cast<long long>(i)) * q;
      if (idx < 1) throw std::logic_error("ladder_height_pmf: non-positive absorbed value");
      if (static_cast<std::size_t>(idx) > size) above_xmax += absorbed.probs[i];
      else chi.probs[static_cast<std::size_t>(idx - 1)] += absorbed.probs[i];
    }
  }
  chi.defect = dp.row().alive + dp.row().mass_defect;
  chi.known_above = above_xmax;
  return chi;
}

std::vector<double> RenewalFunction::renewal_cum(const std::vector<double>& pmf) {
  const std::size_t m = pmf.size();
  // u(v) = pmf(v) + sum_{w<v} u(w) pmf(v-w), values in delta units 1..m
  std::vector<double> u(m + 1, 0.0);
  for (std::size_t v = 1; v <= m; ++v) {
    double acc = pmf[v - 1];
    for (std::size_t w = 1; w < v; ++w) acc += u[w] * pmf[v - w - 1];
    u[v] = acc;
  }
  // cum[i] = H on (i*delta, (i+1)*delta] = 1 + sum_{w<=i} u(w)
  std::vector<double> cum(m + 1, 1.0);
  KahanSum s;
  for (std::size_t i = 1; i <= m; ++i) {
    s.add(u[i]);
    cum[i] = 1.0 + s.value();
  }
  return cum;
}

RenewalFunction::RenewalFunction(const ChiPmf& chi, double u_max) : delta_(chi.delta) {
  const auto m = static_cast<std::size_t>(std::ceil(u_max / chi.delta)) + 1;
  std::vector<double> trunc(chi.probs.begin(),
                            chi.probs.begin() + std::min(m, chi.probs.size()));
  trunc.resize(m, 0.0);
  low_ = renewal_cum(trunc);

  // point estimate: unknown-location defect renormalized away; mass known to
  // sit beyond the grid kept sub-stochastic (it produces no renewals below)
  const double known = chi.mass() + chi.known_above;
  std::vector<double> norm = trunc;
  if (known > 0)
    for (auto& x : norm) x /= known;
  point_ = renewal_cum(norm);

  // upper bound: the unknown mass placed at the smallest positive chi value
  std::vector<double> hi = trunc;
  std::size_t first = 0;
  while (first < hi.size() && hi[first] == 0.0) ++first;
  if (first == hi.size()) first = 0;
  hi[first] += std::max(0.0, chi.defect);
  high_ = renewal_cum(hi);
}

double RenewalFunction::eval(const std::vector<double>& cum, double u) const {
  if (!(u > 0)) return 0.0;
  // H(u) counts renewal mass strictly below u; the epsilon pulls values that
  // are a rounding error above a grid point back onto it (left continuity)
  const double pos = u / delta_;
  long long i = static_cast<long long>(std::ceil(pos - 1e-9)) - 1;
  if (i < 0) i = 0;
  if (static_cast<std::size_t>(i) >= cum.size())
    throw std::out_of_range("RenewalFunction: u beyond built grid");
  return cum[static_cast<std::size_t>(i)];
}

double RenewalFunction::small_dev_integral(double x) const {
  if (x < 0) throw std::invalid_argument("small_dev_integral: x must be >= 0");
  // integrate the step function H over [x, x+1], then subtract H(x)
  double acc = 0.0;
  double pos = x;
  const double end = x + 1.0;
  while (pos < end - 1e-15) {
    const double next_grid = (std::floor(pos / delta_ + 1e-12) + 1.0) * delta_;
    const double seg_end = std::min(end, next_grid);
    // on (pos, seg_end) the function equals H evaluated just right of pos
    const double mid = 0.5 * (pos + seg_end);
    acc += (seg_end - pos) * at(mid);
    pos = seg_end;
  }
  return acc - at(x);
}

void RenewalFunction::export_csv(std::ostream& out) const {
  out << "u,H_low,H_high\n";
  for (std::size_t i = 0; i + 1 < point_.size(); ++i) {
    const double u = (static_cast<double>(i) + 0.5) * delta_;
    out << u << ',' << low_[i] << ',' << high_[i] << '\n';
  }
}

DualityInterval renewal_via_duality(const SurvivalTable& table, double x, long j_max) {
  if (j_max > table.max_n()) throw std::out_of_range("renewal_via_duality: table too short");
  DualityInterval out;
  const double kappa = 1.0 + 1.0 / table.model().tail.alpha;
  KahanSum low;
  low.add(1.0);
  // level of b_j(x) j^kappa over the two halves of the last octave; parity
  // oscillation averages out in the window means
  double k_a = 0.0, k_b = 0.0;
  long n_a = 0, n_b = 0;
  for (long j = 1; j <= j_max; ++j) {
    const double b = table.b_open(j, x);
    low.add(b);
    const double scaled = b * std::pow(static_cast<double>(j), kappa);
    if (4 * j > 3 * j_max) { k_b += scaled; ++n_b; }
    else if (2 * j > j_max) { k_a += scaled; ++n_a; }
  }
  out.low = low.value();
  if (n_a > 0) k_a /= static_cast<double>(n_a);
  if (n_b > 0) k_b /= static_cast<double>(n_b);
  // monotone extrapolation: the scaled level still drifts up toward its
  // limit; push the fitted constant by twice the observed drift
  const double drift = (k_a > 0 && k_b > k_a) ? k_b / k_a - 1.0 : 0.0;
  const double k_hat = k_b * (1.0 + 2.0 * drift);
  out.high = out.low + k_hat * power_tail_sum(kappa, static_cast<std::uint64_t>(j_max));
  return out;
}

DescentMoment expected_descent(const StepModel& model, const RenewalFunction& H, double x_max) {
  DescentMoment out;
  const double alpha = model.tail.alpha;
  if (alpha < 2.0) {
    const double rho = rho_from(alpha, model.tail.beta);
    const double d = alpha - alpha * rho;  // integrand tail exponent is -(d) relative to x^-1
    if (d < 1.0 - 0.05) {
      out.status = DescentMoment::Status::likely_infinite;
      return out;
    }
    if (d < 1.0 + 0.05) {
      out.status = DescentMoment::Status::inconclusive;
      return out;
    }
  }
  out.status = DescentMoment::Status::finite;
  const double delta = H.delta();
  const auto m = static_cast<std::size_t>(std::floor(x_max / delta));
  KahanSum acc;
  for (std::size_t i = 0; i < m; ++i) {
    const double x_hi = (static_cast<double>(i) + 1.0) * delta;
    const double p_left = model.cdf_leq(-x_hi);
    if (p_left == 0.0 && i > 0) break;
    acc.add(delta * H.at(x_hi) * p_left);
  }
  out.value = acc.value();
  const double beyond = model.cdf_leq(-(static_cast<double>(m) * delta));
  if (beyond > 0) {
    // crude linear-growth remainder; finite-status models in the registry
    // have bounded left support, so this stays zero for them
    const double c_lin = H.at(1.0) + 1.0;
    out.error_bound = beyond * (H.at(static_cast<double>(m) * delta) + c_lin) *
                      (static_cast<double>(m) * delta);
  }
  return out;
}

LadderData build_ladder(StepModelPtr model, LadderOptions opts) {
  LadderData data;
  data.model = model;
  data.chi = ladder_height_pmf(model, opts.chi_n_max, opts.u_max + 1.0, opts.chi_dp);
  data.H = RenewalFunction(data.chi, opts.u_max);
  data.descent = expected_descent(*model, data.H, opts.u_max);
  const StableParams params(model->tail.alpha, model->tail.beta,
                            calibrated_scale(model->tail.alpha));
  data.g0 = params.density_at_zero();

  SurvivalTable table(model, opts.survival_n);
  NormSeq cn(model);
  // geometric-mean plateau of (c_n / h) P(tau^- > n) over the top octave
  double log_acc = 0.0, mn = 0.0, mx = 0.0;
  const int points = 9;
  int used = 0;
  for (int i = 0; i < points; ++i) {
    const long n = static_cast<long>(std::lround(
        static_cast<double>(opts.survival_n) * std::pow(2.0, -1.0 + static_cast<double>(i) /
                                                                        (points - 1))));
    if (n < 1 || n > table.max_n()) continue;
    const double v = cn.c(n) / model->span_h * table.survival(n);
    log_acc += std::log(v);
    mn = used == 0 ? v : std::min(mn, v);
    mx = used == 0 ? v : std::max(mx, v);
    ++used;
  }
  data.C0_hat = std::exp(log_acc / std::max(1, used));
  data.C0_spread = used > 0 && mn > 0 ? mx / mn : 0.0;
  return data;
}

double omega_big(const LadderData& ladder, double s, long j_max) {
  if (ladder.descent.status == DescentMoment::Status::likely_infinite)
    throw std::domain_error("omega_big: model flagged likely-infinite descent");
  if (!(s >= 0.0 && s < 1.0)) throw std::invalid_argument("omega_big: s must be in [0,1)");
  const StepModel& m = *ladder.model;
  const double h = m.span_h;
  KahanSum acc;
  for (long j = 0; j <= j_max; ++j) {
    const double t = s + static_cast<double>(j);  // position in h units
    const double p_left = m.cdf_leq(-t * h);
    if (p_left == 0.0 && j > 0) break;
    if (t * h >= ladder.H.u_max()) break;  // grid exhausted; remainder bounded by monotone tail
    if (t > 0) acc.add(ladder.H.at(t * h) * p_left);
  }
  return acc.value();
}

long q_n_residue(const LadderData& ladder, long n) {
  const StepModel& m = *ladder.model;
  if (!m.shift_is_rational) throw std::domain_error("q_n_minus: rational lattice shift required");
  const long long p = m.shift_frac.num, q = m.shift_frac.den;
  const long long r = ((p * static_cast<long long>(n - 1)) % q + q) % q;
  return static_cast<long>(r);
}

double q_n_minus(const LadderData& ladder, long n) {
  const long long q = ladder.model->shift_frac.den;
  const double s = static_cast<double>(q_n_residue(ladder, n)) / static_cast<double>(q);
  return ladder.g0 * omega_big(ladder, s) / ladder.C0_hat;
}

void export_qn_csv(std::ostream& out, const LadderData& ladder, long n_max) {
  out << "n,Q_n_minus,residue_class\n";
  for (long n = 1; n <= n_max; ++n)
    out << n << ',' << q_n_minus(ladder, n) << ',' << q_n_residue(ladder, n) << '\n';
}

}  // namespace fluct
