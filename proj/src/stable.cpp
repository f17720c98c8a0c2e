#include "fluct/stable.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace fluct {

using std::numbers::pi;

bool admissible(double alpha, double beta) {
  if (!(alpha > 0) || !(alpha <= 2) || std::fabs(beta) > 1) return false;
  if (alpha < 1) return std::fabs(beta) < 1;
  if (alpha == 1) return beta == 0;
  if (alpha < 2) return true;
  return beta == 0;  // alpha == 2
}

double rho_from(double alpha, double beta) {
  if (!admissible(alpha, beta))
    throw std::domain_error("rho_from: (alpha, beta) outside the admissible set");
  if (alpha == 1) return 0.5;
  const double r = 0.5 + std::atan(beta * std::tan(pi * alpha / 2)) / (pi * alpha);
  if (!(r > 0 && r < 1)) throw std::domain_error("rho_from: rho escaped (0,1)");
  return r;
}

double calibrated_scale(double alpha) {
  if (!(alpha > 0 && alpha <= 2)) throw std::domain_error("calibrated_scale: alpha out of (0,2]");
  if (alpha == 2) return 0.5;
  return (2 - alpha) / alpha * pi / (2 * std::tgamma(alpha) * std::sin(pi * alpha / 2));
}

struct StableParams::Cache {
  std::once_flag flag;
  double g0 = 0.0;
};

StableParams::StableParams(double alpha, double beta, double scale_c)
    : alpha_(alpha), beta_(beta), scale_c_(scale_c), cache_(std::make_shared<Cache>()) {
  if (!admissible(alpha, beta))
    throw std::domain_error("StableParams: (alpha, beta) outside the admissible set");
  if (!(scale_c > 0)) throw std::domain_error("StableParams: scale c must be positive");
  rho_ = rho_from(alpha, beta);
}

std::complex<double> StableParams::cf(double t) const {
  if (t == 0) return {1.0, 0.0};
  const double at = std::pow(std::fabs(t), alpha_);
  const double skew = alpha_ == 2 ? 0.0 : beta_ * std::tan(pi * alpha_ / 2);
  const double sign = t > 0 ? 1.0 : -1.0;
  // exp{-c|t|^a} * exp{i c |t|^a skew sign}
  const double mod = std::exp(-scale_c_ * at);
  const double arg = scale_c_ * at * skew * sign;
  return {mod * std::cos(arg), mod * std::sin(arg)};
}

QuadResult StableParams::density_quad(double x) const {
  const double skew = alpha_ == 2 ? 0.0 : beta_ * std::tan(pi * alpha_ / 2);
  const double T = std::pow(37.0 / scale_c_, 1.0 / alpha_);
  // enough panels to resolve the cos(t*x) oscillation before refinement starts
  const int oscillations = static_cast<int>(T * std::fabs(x) / (2 * pi)) + 1;
  const int initial = std::max(8, std::min(oscillations, 4096));
  auto integrand = [&](double t) {
    const double ta = std::pow(t, alpha_);
    return std::exp(-scale_c_ * ta) * std::cos(scale_c_ * skew * ta - t * x);
  };
  QuadResult q = integrate(integrand, 0.0, T, 1e-9, initial);
  q.value /= pi;
  q.error_estimate /= pi;
  return q;
}

double StableParams::density(double x) const {
  QuadResult q = density_quad(x);
  if (!q.converged)
    throw std::runtime_error("stable density: quadrature did not converge, error estimate " +
                             std::to_string(q.error_estimate));
  if (q.value < 0) {
    if (q.value < -1e-9)
      throw std::runtime_error("stable density: negative value beyond tolerance");
    return 0.0;
  }
  return q.value;
}

double StableParams::density_at_zero() const {
  std::call_once(cache_->flag, [&] { cache_->g0 = density(0.0); });
  return cache_->g0;
}

StableDensityTable::StableDensityTable(const StableParams& params, double half_width, int points)
    : params_(params), lo_(-half_width), hi_(half_width) {
  values_.resize(points);
  dx_ = (hi_ - lo_) / (points - 1);
  for (int i = 0; i < points; ++i) values_[i] = params_.density(lo_ + dx_ * i);
  if (params_.alpha() < 2) {
    const double edge = std::pow(half_width, params_.alpha() + 1);
    tail_k_right_ = values_.back() * edge;
    tail_k_left_ = values_.front() * edge;
  }
}

double StableDensityTable::operator()(double x) const {
  if (x < lo_ || x > hi_) {
    const double k = x < 0 ? tail_k_left_ : tail_k_right_;
    return k > 0 ? k * std::pow(std::fabs(x), -params_.alpha() - 1) : 0.0;
  }
  const double pos = (x - lo_) / dx_;
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= values_.size()) return values_.back();
  const double w = pos - static_cast<double>(i);
  return values_[i] * (1 - w) + values_[i + 1] * w;
}

}  // namespace fluct
