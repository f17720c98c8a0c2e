#ifndef FLUCT_SERIES_HPP
#define FLUCT_SERIES_HPP

#include <cstddef>
#include <vector>

namespace fluct {

/// Truncated real power series c_0..c_N; all arithmetic stays at order N.
class PowerSeries {
 public:
  explicit PowerSeries(std::size_t order) : coeffs_(order + 1, 0.0) {}
  explicit PowerSeries(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {}

  std::size_t order() const { return coeffs_.size() - 1; }
  double operator[](std::size_t i) const { return coeffs_[i]; }
  double& operator[](std::size_t i) { return coeffs_[i]; }
  const std::vector<double>& coeffs() const { return coeffs_; }

 private:
  std::vector<double> coeffs_;
};

/// Cauchy product truncated at the common order; orders must match.
PowerSeries series_mul(const PowerSeries& a, const PowerSeries& b);
/// exp(a) with a_0 = 0, by the recurrence n e_n = sum k a_k e_{n-k};
/// coefficients below 1e-300 are flushed to zero.
PowerSeries series_exp(const PowerSeries& a);
/// log(a) with a_0 = 1; inverse of the exp recurrence.
PowerSeries series_log(const PowerSeries& a);

}  // namespace fluct

#endif
