#include "fluct/exact_dp.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "fluct/fft.hpp"

namespace fluct {

namespace {

long long floor_div(long long a, long long b) {
  // b > 0
  long long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

// convolve row with the step pmf; direct or FFT depending on cost
void convolve_with_step(DpRow& row, const StepModel& m, const DpOptions& opts,
                  std::unique_ptr<FftConvolver>& conv) {
  const auto& step = m.step_probs;
  const std::size_t w = row.probs.size(), k = step.size();
  std::vector<double> out;
  if (w * k <= opts.fft_threshold || k < 16) {
    out.assign(w + k - 1, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      const double p = step[j];
      if (p == 0.0) continue;
      for (std::size_t i = 0; i < w; ++i) out[i + j] += p * row.probs[i];
    }
  } else {
    if (!conv || conv->capacity() < w)
      conv = std::make_unique<FftConvolver>(step, std::max<std::size_t>(2 * w, 1u << 12));
    out = conv->convolve(row.probs);
    double neg = 0.0;
    for (auto& v : out) {
      if (v < 0) { neg -= v; v = 0.0; }
    }
    row.mass_defect += neg;
  }
  row.probs = std::move(out);
  row.k_lo += m.k_min;
  // each step loses the analytic tail mass that the stored pmf truncates
  row.mass_defect += (m.trunc_mass_left + m.trunc_mass_right) * row.alive;
}

LatticeDp::LatticeDp(StepModelPtr model, DpOptions opts)
    : model_(std::move(model)), opts_(opts) {
  if (!model_->is_lattice()) throw std::invalid_argument("LatticeDp: lattice model required");
  row_.n = 0;
  row_.k_lo = 0;
  row_.probs = {1.0};
  row_.alive = 1.0;
}

long long LatticeDp::boundary_killed_max(long n) const {
  // largest k with value killed, for prefix-killing rules
  const StepModel& m = *model_;
  if (m.shift_is_rational) {
    const long long p = m.shift_frac.num, q = m.shift_frac.den;
    // value <= 0  <=>  k*q <= -p*n
    const long long t = -p * static_cast<long long>(n);
    if (opts_.rule == AbsorbRule::leq0) return floor_div(t, q);
    // value < 0  <=>  k*q < -p*n
    return (t % q == 0) ? t / q - 1 : floor_div(t, q);
  }
  const double t = -m.shift_a * static_cast<double>(n) / m.span_h;
  return static_cast<long long>(std::floor(t));  // irrational shift never hits 0 exactly
}

long long LatticeDp::boundary_killed_min(long n) const {
  // smallest k with value killed under gt0
  const StepModel& m = *model_;
  if (m.shift_is_rational) {
    const long long p = m.shift_frac.num, q = m.shift_frac.den;
    // value > 0  <=>  k*q > -p*n
    return floor_div(-p * static_cast<long long>(n), q) + 1;
  }
  const double t = -m.shift_a * static_cast<double>(n) / m.span_h;
  return static_cast<long long>(std::floor(t)) + 1;
}

LatticeDp::Absorbed LatticeDp::step() {
  Absorbed abs;
  if (partial_) return abs;
  const long next = row_.n + 1;
  if (row_.probs.size() + model_->step_probs.size() > opts_.max_row_width) {
    partial_ = true;
    return abs;
  }
  convolve_with_step(row_, *model_, opts_, conv_);
  row_.n = next;

  const long long lo = row_.k_lo;
  const long long hi = row_.k_lo + static_cast<long long>(row_.probs.size()) - 1;
  long long cut_lo = lo - 1, cut_hi = hi + 1;  // killed ranges: [lo..cut_lo], [cut_hi..hi]
  if (opts_.rule == AbsorbRule::gt0) cut_hi = std::max(boundary_killed_min(next), lo);
  else cut_lo = std::min(boundary_killed_max(next), hi);

  // collect absorbed boundary mass
  KahanSum total;
  if (opts_.rule == AbsorbRule::gt0) {
    if (cut_hi <= hi) {
      abs.k_lo = cut_hi;
      abs.probs.assign(row_.probs.begin() + (cut_hi - lo), row_.probs.end());
      row_.probs.resize(cut_hi - lo);
    }
  } else {
    if (cut_lo >= lo) {
      abs.k_lo = lo;
      const auto cnt = std::min<long long>(cut_lo - lo + 1, static_cast<long long>(row_.probs.size()));
      abs.probs.assign(row_.probs.begin(), row_.probs.begin() + cnt);
      row_.probs.erase(row_.probs.begin(), row_.probs.begin() + cnt);
      row_.k_lo = lo + cnt;
    }
  }
  for (double p : abs.probs) total.add(p);
  abs.total = total.value();

  // trim the far tail (away from the absorbing boundary) within range_eps,
  // then enforce the hard width cap on the same side
  double trimmed = 0.0;
  if (opts_.rule == AbsorbRule::gt0) {
    std::size_t cnt = 0;
    while (cnt < row_.probs.size() && trimmed + row_.probs[cnt] < opts_.range_eps)
      trimmed += row_.probs[cnt++];
    if (opts_.width_cap > 0 && row_.probs.size() - cnt > opts_.width_cap)
      while (row_.probs.size() - cnt > opts_.width_cap) trimmed += row_.probs[cnt++];
    if (cnt > 0) {
      row_.probs.erase(row_.probs.begin(), row_.probs.begin() + static_cast<long>(cnt));
      row_.k_lo += static_cast<long long>(cnt);
    }
  } else {
    while (!row_.probs.empty() && trimmed + row_.probs.back() < opts_.range_eps) {
      trimmed += row_.probs.back();
      row_.probs.pop_back();
    }
    if (opts_.width_cap > 0)
      while (row_.probs.size() > opts_.width_cap) {
        trimmed += row_.probs.back();
        row_.probs.pop_back();
      }
  }
  row_.mass_defect += trimmed;

  KahanSum alive;
  for (double p : row_.probs) alive.add(p);
  row_.alive = alive.value();
  return abs;
}

SurvivalTable::SurvivalTable(StepModelPtr model, long n_max, DpOptions opts)
    : model_(model) {
  if (opts.rule == AbsorbRule::gt0)
    throw std::invalid_argument("SurvivalTable: descent rules only");
  LatticeDp dp(model, opts);
  rows_.reserve(static_cast<std::size_t>(n_max) + 1);
  rows_.push_back(dp.row());
  for (long n = 1; n <= n_max; ++n) {
    dp.step();
    if (dp.partial()) { partial_ = true; break; }
    rows_.push_back(dp.row());
  }
}

const DpRow& SurvivalTable::row(long n) const {
  if (n < 0 || n > max_n())
    throw std::out_of_range("SurvivalTable: row " + std::to_string(n) + " not built (max " +
                            std::to_string(max_n()) + (partial_ ? ", partial table)" : ")"));
  return rows_[static_cast<std::size_t>(n)];
}

double SurvivalTable::conditional_local(long n, long long x) const {
  const DpRow& r = row(n);
  const double surv = r.alive;
  if (surv <= 0) return 0.0;
  if (x < r.k_lo || x >= r.k_lo + static_cast<long long>(r.probs.size())) return 0.0;
  return r.probs[static_cast<std::size_t>(x - r.k_lo)] / surv;
}

double SurvivalTable::b_open(long n, double x) const {
  const DpRow& r = row(n);
  KahanSum s;
  for (std::size_t i = 0; i < r.probs.size(); ++i) {
    const double v = value(n, r.k_lo + static_cast<long long>(i));
    if (v > 0 && v < x) s.add(r.probs[i]);
    if (v >= x) break;
  }
  return s.value();
}

void SurvivalTable::export_csv(std::ostream& out) const {
  out << "n,offset,prob,survival,mass_defect\n";
  for (long n = 0; n <= max_n(); ++n) {
    const DpRow& r = rows_[static_cast<std::size_t>(n)];
    for (std::size_t i = 0; i < r.probs.size(); ++i) {
      if (r.probs[i] == 0.0) continue;
      out << n << ',' << (r.k_lo + static_cast<long long>(i)) << ',' << r.probs[i] << ','
          << r.alive << ',' << r.mass_defect << '\n';
    }
  }
}

std::map<long long, double> unconditioned_pmf(const StepModel& model, long n) {
  const auto rows = unconditioned_rows(model, n);
  const DpRow& r = rows.back();
  std::map<long long, double> out;
  for (std::size_t i = 0; i < r.probs.size(); ++i)
    if (r.probs[i] != 0.0) out[r.k_lo + static_cast<long long>(i)] = r.probs[i];
  return out;
}

std::vector<DpRow> unconditioned_rows(const StepModel& model, long n_max) {
  if (!model.is_lattice()) throw std::invalid_argument("unconditioned_pmf: lattice model required");
  std::vector<DpRow> rows;
  DpRow row;
  row.n = 0;
  row.k_lo = 0;
  row.probs = {1.0};
  rows.push_back(row);
  DpOptions opts;
  std::unique_ptr<FftConvolver> conv;
  for (long n = 1; n <= n_max; ++n) {
    convolve_with_step(row, model, opts, conv);
    row.n = n;
    KahanSum s;
    for (double p : row.probs) s.add(p);
    row.alive = s.value();
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> tau_minus_pmf_exact(const SurvivalTable& table, long n_max) {
  if (n_max > table.max_n() + 1)
    throw std::out_of_range("tau_minus_pmf_exact: table too short");
  const StepModel& m = table.model();
  std::vector<double> pmf(static_cast<std::size_t>(n_max) + 1, 0.0);
  for (long n = 1; n <= n_max; ++n) {
    const DpRow& prev = table.row(n - 1);
    KahanSum s;
    for (std::size_t i = 0; i < prev.probs.size(); ++i) {
      if (prev.probs[i] == 0.0) continue;
      const double v = table.value(n - 1, prev.k_lo + static_cast<long long>(i));
      s.add(prev.probs[i] * m.cdf_leq(-v));
    }
    pmf[static_cast<std::size_t>(n)] = s.value();
  }
  return pmf;
}

namespace {

// strict window I_x(k,n) = { y : -abar(n-k) < y < abar*k + x } in offset units
struct WindowTest {
  bool rational;
  long long p, q;
  double abar;
  bool inside(long long y, long k, long n, long long x) const {
    if (rational) {
      const long long lhs = y * q;
      return lhs > -p * static_cast<long long>(n - k) &&
             lhs < p * static_cast<long long>(k) + x * q;
    }
    const double yd = static_cast<double>(y);
    return yd > -abar * static_cast<double>(n - k) &&
           yd < abar * static_cast<double>(k) + static_cast<double>(x);
  }
};

WindowTest window_for(const StepModel& m) {
  WindowTest w{};
  w.rational = m.shift_is_rational;
  w.p = m.shift_frac.num;
  w.q = m.shift_frac.den == 0 ? 1 : m.shift_frac.den;
  w.abar = m.span_h > 0 ? m.shift_a / m.span_h : 0.0;
  return w;
}

}  // namespace

double verify_recurrence(const StepModel& model, long n_max) {
  auto model_ptr = std::make_shared<StepModel>(model);
  SurvivalTable table(model_ptr, n_max);
  const auto un = unconditioned_rows(model, n_max);
  const auto w = window_for(model);

  auto un_at = [&](long m, long long y) -> double {
    const DpRow& r = un[static_cast<std::size_t>(m)];
    if (y < r.k_lo || y >= r.k_lo + static_cast<long long>(r.probs.size())) return 0.0;
    return r.probs[static_cast<std::size_t>(y - r.k_lo)];
  };
  auto bbar_at = [&](long m, long long x) -> double {
    const DpRow& r = table.row(m);
    if (x < r.k_lo || x >= r.k_lo + static_cast<long long>(r.probs.size())) return 0.0;
    return r.probs[static_cast<std::size_t>(x - r.k_lo)];
  };

  double worst = 0.0;
  for (long n = 1; n <= n_max; ++n) {
    const DpRow& r = table.row(n);
    for (std::size_t i = 0; i < r.probs.size(); ++i) {
      const long long x = r.k_lo + static_cast<long long>(i);
      KahanSum rhs;
      rhs.add(un_at(n, x));
      for (long k = 1; k <= n - 1; ++k) {
        const DpRow& u = un[static_cast<std::size_t>(n - k)];
        for (std::size_t j = 0; j < u.probs.size(); ++j) {
          if (u.probs[j] == 0.0) continue;
          const long long y = u.k_lo + static_cast<long long>(j);
          if (!w.inside(y, k, n, x)) continue;
          const double b = bbar_at(k, x - y);
          if (b != 0.0) rhs.add(b * u.probs[j]);
        }
      }
      const double res = std::fabs(static_cast<double>(n) * r.probs[i] - rhs.value());
      worst = std::max(worst, res);
    }
  }
  return worst;
}

double verify_recurrence_rep2(const StepModel& model, long n_max) {
  auto model_ptr = std::make_shared<StepModel>(model);
  SurvivalTable table(model_ptr, n_max);
  const auto un = unconditioned_rows(model, n_max);

  // prefix sums of table rows for B_m(.) evaluation at offset thresholds
  // B_m(value at offset t) = sum of row m atoms with offset < t and value > 0;
  // stored rows hold only value > 0 atoms already.
  auto b_strict_before = [&](long m, long long t) -> double {
    if (m == 0) return 0.0;
    const DpRow& r = table.row(m);
    KahanSum s;
    for (std::size_t i = 0; i < r.probs.size(); ++i) {
      if (r.k_lo + static_cast<long long>(i) >= t) break;
      s.add(r.probs[i]);
    }
    return s.value();
  };

  double worst = 0.0;
  for (long n = 1; n <= n_max; ++n) {
    const DpRow& r = table.row(n);
    // evaluate at x = values of the alive grid (plus one step beyond the top)
    for (long long xo = r.k_lo; xo <= r.k_lo + static_cast<long long>(r.probs.size()); ++xo) {
      KahanSum lhs;
      for (std::size_t i = 0; i < r.probs.size(); ++i) {
        if (r.k_lo + static_cast<long long>(i) >= xo) break;
        lhs.add(r.probs[i]);
      }
      // P(S_n in (0, x)): unconditioned atoms, positive value, offset < xo
      const DpRow& u_n = un[static_cast<std::size_t>(n)];
      KahanSum rhs;
      for (std::size_t j = 0; j < u_n.probs.size(); ++j) {
        const long long y = u_n.k_lo + static_cast<long long>(j);
        if (y >= xo) break;
        const double v = model.shift_a * static_cast<double>(n) +
                         static_cast<double>(y) * model.span_h;
        if (v > 0) rhs.add(u_n.probs[j]);
      }
      const double x_val = model.shift_a * static_cast<double>(n) +
                           static_cast<double>(xo) * model.span_h;
      for (long k = 1; k <= n - 1; ++k) {
        const DpRow& u = un[static_cast<std::size_t>(k)];
        for (std::size_t j = 0; j < u.probs.size(); ++j) {
          if (u.probs[j] == 0.0) continue;
          const long long y = u.k_lo + static_cast<long long>(j);
          const double vy = model.shift_a * static_cast<double>(k) +
                            static_cast<double>(y) * model.span_h;
          if (!(vy > 0)) continue;
          if (vy >= x_val) break;
          const double b = b_strict_before(n - k, xo - y);
          if (b != 0.0) rhs.add(b * u.probs[j]);
        }
      }
      const double res = std::fabs(static_cast<double>(n) * lhs.value() - rhs.value());
      worst = std::max(worst, res);
    }
  }
  return worst;
}

}  // namespace fluct
