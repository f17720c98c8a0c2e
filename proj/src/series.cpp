#include "fluct/series.hpp"

#include <cmath>
#include <stdexcept>

namespace fluct {

PowerSeries series_mul(const PowerSeries& a, const PowerSeries& b) {
  if (a.order() != b.order()) throw std::invalid_argument("series_mul: order mismatch");
  const std::size_t n = a.order();
  PowerSeries out(n);
  for (std::size_t i = 0; i <= n; ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j + i <= n; ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

PowerSeries series_exp(const PowerSeries& a) {
  if (a[0] != 0.0) throw std::invalid_argument("series_exp: a_0 must be 0");
  const std::size_t n = a.order();
  PowerSeries e(n);
  e[0] = 1.0;
  for (std::size_t m = 1; m <= n; ++m) {
    double acc = 0.0;
    for (std::size_t k = 1; k <= m; ++k)
      acc += static_cast<double>(k) * a[k] * e[m - k];
    double v = acc / static_cast<double>(m);
    if (std::fabs(v) < 1e-300) v = 0.0;  // underflow hygiene
    e[m] = v;
  }
  return e;
}

PowerSeries series_log(const PowerSeries& b) {
  if (b[0] != 1.0) throw std::invalid_argument("series_log: b_0 must be 1");
  const std::size_t n = b.order();
  PowerSeries a(n);
  for (std::size_t m = 1; m <= n; ++m) {
    double acc = static_cast<double>(m) * b[m];
    for (std::size_t k = 1; k < m; ++k)
      acc -= static_cast<double>(k) * a[k] * b[m - k];
    a[m] = acc / static_cast<double>(m);
  }
  return a;
}

}  // namespace fluct
