#ifndef FLUCT_QUAD_HPP
#define FLUCT_QUAD_HPP

#include <functional>

namespace fluct {

struct QuadResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = false;
  int panels = 0;
};

/// Integrates f over [a, b]: fixed Gauss-Kronrod 15-point panels, doubling the
/// panel count until two refinements agree to `tol` (absolute). Deterministic.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double tol = 1e-9, int initial_panels = 8, int max_doublings = 12);

/// 12-point Gauss-Legendre nodes/weights on [-1, 1].
extern const double kGL12Nodes[12];
extern const double kGL12Weights[12];

}  // namespace fluct

#endif
