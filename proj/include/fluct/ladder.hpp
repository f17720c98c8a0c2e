#ifndef FLUCT_LADDER_HPP
#define FLUCT_LADDER_HPP

#include <iosfwd>
#include <vector>

#include "fluct/exact_dp.hpp"
#include "fluct/stable.hpp"
#include "fluct/step_models.hpp"

namespace fluct {

/// Ladder-height pmf on the sub-lattice grid delta = h / den(a/h):
/// probs[i] = P(chi+ = (i+1)*delta). Requires a rational lattice shift.
struct ChiPmf {
  double delta = 1.0;
  std::vector<double> probs;
  double defect = 0.0;       // unknown-location mass: P(tau+ > n_max) + DP losses
  double known_above = 0.0;  // mass observed at values beyond the grid end
  double mass() const;
};

ChiPmf ladder_height_pmf(StepModelPtr model, long n_max, double x_max, DpOptions opts = {});

/// Renewal function H(u) = I{u>0} + sum_k P(chi_1+...+chi_k < u) as a
/// left-continuous step function on the chi grid. `point` uses the
/// defect-normalized pmf; [low, high] bracket the true H (defect sent to
/// +infinity resp. to the smallest positive chi value).
class RenewalFunction {
 public:
  RenewalFunction() = default;
  RenewalFunction(const ChiPmf& chi, double u_max);

  double at(double u) const { return eval(point_, u); }
  double at_low(double u) const { return eval(low_, u); }
  double at_high(double u) const { return eval(high_, u); }
  double delta() const { return delta_; }
  double u_max() const { return delta_ * static_cast<double>(point_.size()); }

  /// I(x) = int_x^{x+1} H(y) dy - H(x), by exact piecewise integration.
  double small_dev_integral(double x) const;

  /// CSV schema: u,H_low,H_high
  void export_csv(std::ostream& out) const;

 private:
  double eval(const std::vector<double>& cum, double u) const;
  static std::vector<double> renewal_cum(const std::vector<double>& pmf);

  double delta_ = 1.0;
  // cum[i] = H(u) for u in (i*delta, (i+1)*delta]
  std::vector<double> point_, low_, high_;
};

/// Duality route: [low, high] bracketing H(x) from 1 + sum_{j<=J} B_j(x)
/// plus a fitted monotone tail bound.
struct DualityInterval {
  double low = 0.0;
  double high = 0.0;
};
DualityInterval renewal_via_duality(const SurvivalTable& table, double x, long j_max);

/// E(-S_{tau^-}) = int_0^infty H(x) P(X <= -x) dx, or an integrability flag
/// from the tail-exponent comparison.
struct DescentMoment {
  enum class Status { finite, likely_infinite, inconclusive };
  Status status = Status::finite;
  double value = 0.0;
  double error_bound = 0.0;
};
DescentMoment expected_descent(const StepModel& model, const RenewalFunction& H, double x_max);

/// Ladder bundle for one model: chi+, H, the descent moment, and the
/// C0 plateau of (c_n/h) P(tau^- > n) with its top-octave spread.
struct LadderData {
  StepModelPtr model;
  ChiPmf chi;
  RenewalFunction H;
  DescentMoment descent;
  double C0_hat = 0.0;
  double C0_spread = 0.0;  // max/min ratio over the fitted octave
  double g0 = 0.0;         // stable density at zero for the model's limit law
};

struct LadderOptions {
  long chi_n_max = 4096;
  double u_max = 64.0;
  long survival_n = 2048;
  DpOptions chi_dp;
};
LadderData build_ladder(StepModelPtr model, LadderOptions opts = {});

/// Omega(s) = sum_{j>=0} H(s+j) P(X <= -s-j) in span-h units, s in [0,1);
/// truncated at j_max with a reported remainder bound inside the value when
/// the step's left support is exhausted. Rejects likely-infinite descent.
double omega_big(const LadderData& ladder, double s, long j_max = 1 << 14);

/// Q_n^- = g(0) * Omega({a-bar (n-1)}) / C0 (finite-descent lattice models).
double q_n_minus(const LadderData& ladder, long n);
/// residue index of {a-bar (n-1)} over den(a-bar), for grouping Q_n values
long q_n_residue(const LadderData& ladder, long n);

/// CSV schema: n,Q_n_minus,residue_class
void export_qn_csv(std::ostream& out, const LadderData& ladder, long n_max);

}  // namespace fluct

#endif
