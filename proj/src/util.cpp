#include "fluct/util.hpp"

#include <cmath>
#include <cstdlib>

namespace fluct {

Rational parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    const std::int64_t n = std::stoll(text.substr(0, slash));
    const std::int64_t d = std::stoll(text.substr(slash + 1));
    return Rational(n, d);
  }
  const auto dot = text.find('.');
  if (dot == std::string::npos) return Rational(std::stoll(text), 1);
  std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  const std::size_t frac_len = text.size() - dot - 1;
  if (frac_len > 15) throw std::invalid_argument("parse_rational: too many digits: " + text);
  std::int64_t den = 1;
  for (std::size_t i = 0; i < frac_len; ++i) den *= 10;
  return Rational(std::stoll(digits), den);
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_slope: need >= 2 matched points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i]; sy += y[i]; sxx += x[i] * x[i]; sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0) throw std::invalid_argument("fit_slope: degenerate abscissae");
  return (n * sxy - sx * sy) / denom;
}

std::vector<double> geom_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  const double r = std::log(hi / lo) / (n - 1);
  for (int i = 0; i < n; ++i) g[i] = lo * std::exp(r * i);
  g.back() = hi;
  return g;
}

std::vector<double> lin_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  const double d = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) g[i] = lo + d * i;
  g.back() = hi;
  return g;
}

namespace {
// Euler-Maclaurin continuation of sum_{k<=m} k^{-s} started at a direct head.
double em_tail_correction(double s, double m) {
  // integral term + boundary + Bernoulli corrections B2/2!, B4/4!
  const double m_s = std::pow(m, -s);
  double v = m_s * 0.5;
  v -= s * m_s / m / 12.0;
  v += s * (s + 1) * (s + 2) * m_s / (m * m * m) / 720.0;
  return v;
}
}  // namespace

double partial_power_sum(double s, std::uint64_t m) {
  if (m == 0) return 0.0;
  const std::uint64_t head = std::min<std::uint64_t>(m, 64);
  double acc = 0.0;
  for (std::uint64_t k = 1; k <= head; ++k) acc += std::pow(static_cast<double>(k), -s);
  if (head == m) return acc;
  // sum_{head+1..m} k^{-s} = int_head^m x^{-s} dx + boundary corrections
  const double a = static_cast<double>(head), b = static_cast<double>(m);
  double integral;
  if (s == 1.0) integral = std::log(b / a);
  else integral = (std::pow(b, 1 - s) - std::pow(a, 1 - s)) / (1 - s);
  return acc + integral - em_tail_correction(s, a) + em_tail_correction(s, b);
}

double zeta(double s) {
  if (s <= 1.0) throw std::invalid_argument("zeta: requires s > 1");
  const int m = 24;
  double acc = 0.0;
  for (int k = 1; k <= m; ++k) acc += std::pow(static_cast<double>(k), -s);
  const double md = static_cast<double>(m);
  return acc + std::pow(md, 1 - s) / (s - 1) - em_tail_correction(s, md);
}

double power_tail_sum(double s, std::uint64_t m) {
  if (s <= 1.0) throw std::invalid_argument("power_tail_sum: requires s > 1");
  if (m < 64) return zeta(s) - partial_power_sum(s, m);
  const double md = static_cast<double>(m);
  return std::pow(md, 1 - s) / (s - 1) - em_tail_correction(s, md);
}

}  // namespace fluct
