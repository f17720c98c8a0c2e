#ifndef FLUCT_MEANDER_HPP
#define FLUCT_MEANDER_HPP

#include <iosfwd>
#include <vector>

#include "fluct/stable.hpp"

namespace fluct {

/// Limit density of S_n/c_n conditioned to stay positive, on a z grid.
struct MeanderDensity {
  double alpha = 2.0;
  double beta = 0.0;
  std::vector<double> z;
  std::vector<double> p;
  double residual = 0.0;  // last fixed-point update (sup norm)
  bool converged = false;
  int iterations = 0;
  double tol = 0.0;

  /// linear interpolation; 0 outside [0, z_max]
  double at(double zq) const;
  /// trapezoid mass over the grid
  double mass() const;

  /// CSV schema: z,p,residual
  void export_csv(std::ostream& out) const;
  /// JSON metadata: params, iterations, tol, converged
  std::string meta_json() const;
};

/// Closed form at (2,0): x e^{-x^2/2} for x >= 0.
double meander_density_normal(double x);

/// The self-consistency kernel: f(w1,w2;v) with the meander law replaced by
/// the density p on its grid. The full-interval kernel f(0,1;.) maps a
/// density to a new one; the meander density is its fixed point.
class MeanderKernel {
 public:
  explicit MeanderKernel(const StableParams& params);

  double f(double w1, double w2, double v, const std::vector<double>& z,
           const std::vector<double>& p) const;
  /// f(0,1;.) over the whole grid
  std::vector<double> apply(const std::vector<double>& z, const std::vector<double>& p) const;
  const StableParams& params() const { return params_; }

 private:
  struct TNode {
    double t, t_alpha, s, weight;  // s = (1-t)^{1/alpha}; weight includes t^{rho-1}(1-t)^{-1/a} dt
  };
  std::vector<TNode> make_nodes(double w1, double w2) const;
  double inner(const TNode& nd, double v, const std::vector<double>& z,
               const std::vector<double>& p) const;

  StableParams params_;
  StableDensityTable g_;
  double inv_alpha_;
  std::vector<TNode> full_nodes_;
};

/// Geometric-near-zero grid glued to a uniform grid on [0.5, z_max].
std::vector<double> default_meander_grid(double z_max = 6.0);

/// Fixed-point iteration p <- normalize(f(0,1;.)). Requires alpha in (1,2].
/// Initial iterate z^{alpha rho} e^{-z^2/2} unless `init` is given.
MeanderDensity meander_fixed_point(const StableParams& params, const std::vector<double>& z_grid,
                                   int max_iters = 60, double tol = 1e-4,
                                   const std::vector<double>* init = nullptr);

/// Least-squares slope of log p against log z on [z_lo, z_hi] (>= 10 points).
double small_z_exponent(const MeanderDensity& density, double z_lo, double z_hi);

}  // namespace fluct

#endif
