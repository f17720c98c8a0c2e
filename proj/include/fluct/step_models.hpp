#ifndef FLUCT_STEP_MODELS_HPP
#define FLUCT_STEP_MODELS_HPP

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "fluct/rng.hpp"
#include "fluct/util.hpp"

namespace fluct {

enum class StepKind { lattice, continuous };

/// Domain-of-attraction metadata: X in D(alpha, beta), q = lim F(-x)/P(|X|>x).
struct TailInfo {
  double alpha = 2.0;
  double beta = 0.0;
  double left_mass_q = 0.5;
};

/// A step distribution. Lattice models carry an exact pmf on the grid
/// {shift_a + k*span_h}; continuous models carry closures only. Immutable
/// after construction; samplers draw from an explicit caller-owned stream.
struct StepModel {
  std::string name;
  StepKind kind = StepKind::lattice;
  TailInfo tail;
  bool mean_zero = true;

  // lattice structure (valid when kind == lattice)
  double span_h = 0.0;
  double shift_a = 0.0;           // in [0, span_h)
  bool shift_is_rational = true;  // a/h representable exactly
  Rational shift_frac;            // a/h when rational
  long long k_min = 0;
  std::vector<double> step_probs;  // P(X = shift_a + (k_min+i)*span_h)
  // analytic pmf mass beyond the stored atoms (heavy-tail truncation)
  double trunc_mass_left = 0.0;
  double trunc_mass_right = 0.0;

  std::function<double(RngStream&)> sampler;
  std::function<double(double)> mu_closed;   // optional exact mu(u)
  std::function<double(double)> cdf_closed;  // optional exact P(X <= v)

  bool is_lattice() const { return kind == StepKind::lattice; }
  double support_value(long long k) const { return shift_a + static_cast<double>(k) * span_h; }
  double stored_mass() const;
  /// smallest |v| over support with positive mass (0 if an atom sits at 0)
  double min_abs_support() const;

  double sample(RngStream& rng) const { return sampler(rng); }
  /// truncated second moment  mu(u) = u^{-2} E[X^2; |X| <= u]
  double mu(double u) const;
  /// P(X <= v), exact including analytic tail mass beyond stored atoms
  double cdf_leq(double v) const;
};

using StepModelPtr = std::shared_ptr<const StepModel>;

// ---- registry ----
StepModelPtr make_simple_rw();
StepModelPtr make_lazy_rw();
/// symmetric discrete Pareto on Z: P(|X|=k) = k^{-alpha-1}/zeta(alpha+1)
StepModelPtr make_pareto_sym(double alpha, long long dp_truncation = 8192);
/// asymmetric discrete Pareto, P(X=k) ~ p k^{-alpha-1}, P(X=-k) ~ q k^{-alpha-1};
/// mean-centered by transferring mass between the +-1 atoms. Requires alpha in (1,2).
StepModelPtr make_pareto_asym(double alpha, double p, long long dp_truncation = 8192);
/// (1,a)-lattice family on {a-1, a, a+1} with mean-zero weights; a in (0,1)
StepModelPtr make_shift_lattice(const Rational& a, double mid_weight = 1.0 / 3.0);
StepModelPtr make_shift_lattice_irrational(double a, double mid_weight = 1.0 / 3.0);
StepModelPtr make_gaussian();
StepModelPtr make_cauchy();
/// symmetrized continuous Pareto, density (alpha/2)|x|^{-alpha-1} for |x| > 1
StepModelPtr make_pareto_continuous(double alpha);

/// X -> factor * X for a lattice model (rescales h and a; offsets unchanged).
StepModelPtr scale_model(StepModelPtr base, double factor);

/// Registry lookup: "simple-rw", "lazy-rw", "gauss", "cauchy",
/// "pareto:<alpha>", "pareto-asym:<alpha>:<p>", "pareto-cont:<alpha>",
/// "shift:<num>/<den>" or "shift:<decimal>", "scale:<factor>:<model>".
StepModelPtr model_from_name(const std::string& spec);
/// Loads a key-value model definition file; parse errors cite line numbers.
StepModelPtr load_model_file(const std::string& path);
/// Resolves a CLI --model argument: registry name, else file path.
StepModelPtr resolve_model(const std::string& arg);

// ---- lattice structure ----
struct LatticeInfoResult {
  bool is_lattice = false;
  double span_h = 0.0;
  double shift_a = 0.0;
};
/// Maximal span and shift recomputed from the stored support
/// (h = gcd of support differences, a = support point mod h).
LatticeInfoResult lattice_info(const StepModel& model);

// ---- normalizing sequence ----
/// c_n as the last crossing  sup{u >= u_min : mu(u) > 1/n}  (Feller's
/// construction; the literal inf form degenerates for lattice models).
class NormSeq {
 public:
  explicit NormSeq(StepModelPtr model) : model_(std::move(model)) {}
  double c(long n) const;
  const StepModel& model() const { return *model_; }

 private:
  StepModelPtr model_;
  mutable std::mutex mutex_;
  mutable std::map<long, double> cache_;
};

}  // namespace fluct

#endif
