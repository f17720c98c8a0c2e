#ifndef FLUCT_UTIL_HPP
#define FLUCT_UTIL_HPP

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace fluct {

/// Kahan-compensated accumulator for long probability sums.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - comp_;
    const double t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }
  void reset() { sum_ = comp_ = 0.0; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Exact rational p/q with small components; used for lattice shifts where
/// float comparison against the absorbing boundary would be ambiguous.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
    if (den == 0) throw std::invalid_argument("Rational: zero denominator");
    if (den < 0) { num = -num; den = -den; }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) { num /= g; den /= g; }
  }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool is_zero() const { return num == 0; }
};

/// Parses "p/q", "p", or a plain decimal ("0.25") into an exact rational.
Rational parse_rational(const std::string& text);

/// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

/// n log-spaced points on [lo, hi], endpoints included.
std::vector<double> geom_grid(double lo, double hi, int n);
/// n evenly spaced points on [lo, hi], endpoints included.
std::vector<double> lin_grid(double lo, double hi, int n);

/// Partial power sum  sum_{k=1}^{m} k^{-s}  (direct below a cutoff,
/// Euler-Maclaurin above); exact enough for tail bookkeeping at 1e-14.
double partial_power_sum(double s, std::uint64_t m);
/// Riemann zeta at s > 1 via Euler-Maclaurin.
double zeta(double s);
/// Tail sum  sum_{k=m+1}^{infty} k^{-s}  for s > 1.
double power_tail_sum(double s, std::uint64_t m);

}  // namespace fluct

#endif
