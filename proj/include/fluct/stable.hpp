#ifndef FLUCT_STABLE_HPP
#define FLUCT_STABLE_HPP

#include <complex>
#include <memory>
#include <vector>

#include "fluct/quad.hpp"

namespace fluct {

/// True iff (alpha, beta) lies in the admissible set
///   {0<a<1, |b|<1} u {1<a<2, |b|<=1} u {a=1, b=0} u {a=2, b=0}.
bool admissible(double alpha, double beta);

/// Positivity index: 1/2 for alpha=1, otherwise
/// 1/2 + arctan(beta*tan(pi*alpha/2))/(pi*alpha). Rejects inadmissible pairs.
double rho_from(double alpha, double beta);

/// Scale of the limit law reached under the c_n normalization of step models:
/// ((2-alpha)/alpha)*pi / (2*Gamma(alpha)*sin(pi*alpha/2)) for alpha<2, with
/// the continuous limit 1/2 at alpha=2 (standard normal).
double calibrated_scale(double alpha);

/// Stable law in the (alpha, beta, c) parameterization
///   G(t) = exp{-c|t|^alpha (1 - i*beta*sign(t)*tan(pi*alpha/2))}.
/// Immutable after construction; the density cache is thread-safe.
class StableParams {
 public:
  StableParams(double alpha, double beta, double scale_c);

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double scale_c() const { return scale_c_; }
  double rho() const { return rho_; }

  /// Characteristic function G(t); G(0) = 1 exactly.
  std::complex<double> cf(double t) const;

  /// Density g(x) by Fourier inversion on [0, T] with c*T^alpha = 37,
  /// GK15 panels doubled until agreement at 1e-9; clamped at 0 if within
  /// 1e-9 below. Throws on quadrature non-convergence.
  double density(double x) const;
  /// As density() but also reports the quadrature error estimate.
  QuadResult density_quad(double x) const;

  /// g(0), computed once and cached.
  double density_at_zero() const;

 private:
  double alpha_, beta_, scale_c_, rho_;
  // lazily filled g(0) cache; guarded by std::call_once in the impl
  struct Cache;
  std::shared_ptr<Cache> cache_;
};

/// Sampled density table with linear interpolation and power-law tail
/// continuation; the evaluation kernel behind the meander fixed point.
class StableDensityTable {
 public:
  StableDensityTable(const StableParams& params, double half_width = 64.0, int points = 16001);
  double operator()(double x) const;
  const StableParams& params() const { return params_; }

 private:
  StableParams params_;
  double lo_, hi_, dx_;
  std::vector<double> values_;
  double tail_k_left_ = 0.0, tail_k_right_ = 0.0;  // g(x) ~ K |x|^-(alpha+1)
};

}  // namespace fluct

#endif
