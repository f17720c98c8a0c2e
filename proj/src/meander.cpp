#include "fluct/meander.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "fluct/quad.hpp"
#include "fluct/util.hpp"

namespace fluct {

namespace {
double interp(const std::vector<double>& x, const std::vector<double>& y, double q) {
  if (q <= x.front() || q >= x.back()) {
    if (q == x.front()) return y.front();
    if (q == x.back()) return y.back();
    return 0.0;
  }
  const auto it = std::upper_bound(x.begin(), x.end(), q);
  const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
  const double w = (q - x[i]) / (x[i + 1] - x[i]);
  return y[i] * (1 - w) + y[i + 1] * w;
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i)
    acc += 0.5 * (y[i] + y[i + 1]) * (x[i + 1] - x[i]);
  return acc;
}
}  // namespace

double MeanderDensity::at(double zq) const { return interp(z, p, zq); }
double MeanderDensity::mass() const { return trapezoid(z, p); }

void MeanderDensity::export_csv(std::ostream& out) const {
  out << "z,p,residual\n";
  for (std::size_t i = 0; i < z.size(); ++i) out << z[i] << ',' << p[i] << ',' << residual << '\n';
}

std::string MeanderDensity::meta_json() const {
  std::ostringstream os;
  os << "{\"alpha\":" << alpha << ",\"beta\":" << beta << ",\"iterations\":" << iterations
     << ",\"tol\":" << tol << ",\"residual\":" << residual
     << ",\"converged\":" << (converged ? "true" : "false") << "}";
  return os.str();
}

double meander_density_normal(double x) {
  return x > 0 ? x * std::exp(-x * x / 2) : 0.0;
}

MeanderKernel::MeanderKernel(const StableParams& params)
    : params_(params), g_(params), inv_alpha_(1.0 / params.alpha()) {
  full_nodes_ = make_nodes(0.0, 1.0);
}

std::vector<MeanderKernel::TNode> MeanderKernel::make_nodes(double w1, double w2) const {
  if (!(w1 >= 0 && w1 <= w2 && w2 <= 1)) throw std::invalid_argument("kernel: bad [w1,w2]");
  const double alpha = params_.alpha(), rho = params_.rho();
  std::vector<TNode> nodes;
  auto gl_panel_t = [&](double a, double b) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    if (half <= 0) return;
    for (int i = 0; i < 12; ++i) {
      const double t = mid + half * kGL12Nodes[i];
      TNode nd;
      nd.t = t;
      nd.t_alpha = std::pow(t, inv_alpha_);
      nd.s = std::pow(1 - t, inv_alpha_);
      nd.weight = kGL12Weights[i] * half * std::pow(t, rho - 1) / nd.s;
      nodes.push_back(nd);
    }
  };
  auto gl_panel_s = [&](double sa, double sb) {
    const double mid = 0.5 * (sa + sb), half = 0.5 * (sb - sa);
    if (half <= 0) return;
    for (int i = 0; i < 12; ++i) {
      const double s = mid + half * kGL12Nodes[i];
      const double t = 1 - std::pow(s, alpha);
      TNode nd;
      nd.t = t;
      nd.t_alpha = std::pow(t, inv_alpha_);
      nd.s = s;
      nd.weight = kGL12Weights[i] * half * alpha * std::pow(s, alpha - 2) * std::pow(t, rho - 1);
      nodes.push_back(nd);
    }
  };
  // fixed global panelization, clipped to [w1, w2]: subinterval evaluations
  // stay consistent with the full-interval ones up to panel-local error
  for (int k = 60; k >= 1; --k) {
    const double a = std::max(w1, std::ldexp(1.0, -k - 1));
    const double b = std::min(w2, std::ldexp(1.0, -k));
    if (a < b) gl_panel_t(a, b);
  }
  // t in [1/2, 1) through the substitution t = 1 - s^alpha (panels in s)
  const double s_of_w2 = std::pow(1 - std::max(w1, std::min(w2, 1.0)), inv_alpha_);
  const double s_of_w1 = std::pow(1 - std::max(w1, 0.5), inv_alpha_);
  const double s_top = std::pow(0.5, inv_alpha_);
  for (int m = 0; m <= 20; ++m) {
    const double edge_hi = s_top * std::ldexp(1.0, -m);
    const double edge_lo = std::max(s_top * std::ldexp(1.0, -m - 1), 1e-5);
    const double a = std::max(std::max(edge_lo, s_of_w2), 0.0);
    const double b = std::min(edge_hi, s_of_w1);
    if (a < b) gl_panel_s(a, b);
    if (edge_lo <= 1e-5) break;
  }
  return nodes;
}

namespace {
// paneled 12-point Gauss-Legendre over [a, b] with a resolution scale:
// enough panels that no feature narrower than `scale` is skipped
template <typename F>
double gl_paneled(double a, double b, double scale, int max_panels, const F& f) {
  if (!(b > a)) return 0.0;
  int n = static_cast<int>(std::ceil((b - a) / std::max(scale, 1e-12)));
  n = std::max(1, std::min(n, max_panels));
  double acc = 0.0;
  const double w = (b - a) / n;
  for (int pnl = 0; pnl < n; ++pnl) {
    const double lo = a + pnl * w;
    const double mid = lo + 0.5 * w, half = 0.5 * w;
    for (int i = 0; i < 12; ++i) acc += kGL12Weights[i] * f(mid + half * kGL12Nodes[i]);
  }
  return acc * 0.5 * w;
}
}  // namespace

double MeanderKernel::inner(const TNode& nd, double v, const std::vector<double>& z,
                            const std::vector<double>& p) const {
  const double ta = nd.t_alpha, sc = nd.s;
  const double z_max = z.back();
  const double up = std::min(v / ta, z_max);
  if (!(up > 0)) return 0.0;
  if (sc * 8 < up * ta) {
    // narrow g peak: integrate in xi = (v - ta*u)/sc; features: g on O(1),
    // the density p on O(ta/sc) in xi
    const double lo = std::max(0.0, (v - ta * z_max) / sc);
    const double hi = std::min(v / sc, 64.0);
    const double scale = std::min(1.0, 0.25 * ta / sc);
    const double val = gl_paneled(lo, hi, scale, 48, [&](double xi) {
      return g_(xi) * interp(z, p, (v - sc * xi) / ta);
    });
    return val * (sc / ta);
  }
  // wide g peak: integrate in u; g varies on sc/ta, p on O(1)
  const double scale = std::min(0.5, 0.25 * sc / ta);
  return gl_paneled(0.0, up, scale, 48, [&](double u) {
    return g_((v - ta * u) / sc) * interp(z, p, u);
  });
}

double MeanderKernel::f(double w1, double w2, double v, const std::vector<double>& z,
                        const std::vector<double>& p) const {
  if (!(v > 0)) return 0.0;
  // prefix difference keeps f additive in the time split exactly
  auto prefix = [&](double w) {
    if (w <= 0.0) return 0.0;
    const auto nodes = (w == 1.0) ? full_nodes_ : make_nodes(0.0, w);
    KahanSum acc;
    for (const auto& nd : nodes) acc.add(nd.weight * inner(nd, v, z, p));
    return acc.value();
  };
  if (w1 == 0.0) return prefix(w2);
  return prefix(w2) - prefix(w1);
}

std::vector<double> MeanderKernel::apply(const std::vector<double>& z,
                                         const std::vector<double>& p) const {
  std::vector<double> out(z.size(), 0.0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] <= 0) continue;
    KahanSum acc;
    for (const auto& nd : full_nodes_) acc.add(nd.weight * inner(nd, z[i], z, p));
    out[i] = std::max(0.0, acc.value());
  }
  return out;
}

std::vector<double> default_meander_grid(double z_max) {
  std::vector<double> grid;
  grid.push_back(0.0);
  const auto geo = geom_grid(1e-4, 0.5, 61);
  for (std::size_t i = 0; i + 1 < geo.size(); ++i) grid.push_back(geo[i]);
  const auto lin = lin_grid(0.5, z_max, 111);
  for (double v : lin) grid.push_back(v);
  return grid;
}

MeanderDensity meander_fixed_point(const StableParams& params, const std::vector<double>& z_grid,
                                   int max_iters, double tol, const std::vector<double>* init) {
  if (!(params.alpha() > 1.0))
    throw std::domain_error("meander_fixed_point: restricted to alpha in (1,2]");
  MeanderKernel kernel(params);
  MeanderDensity d;
  d.alpha = params.alpha();
  d.beta = params.beta();
  d.z = z_grid;
  d.tol = tol;
  const double ar = params.alpha() * params.rho();
  if (init) {
    if (init->size() != z_grid.size())
      throw std::invalid_argument("meander_fixed_point: init size mismatch");
    d.p = *init;
  } else {
    d.p.resize(z_grid.size());
    for (std::size_t i = 0; i < z_grid.size(); ++i) {
      const double z = z_grid[i];
      d.p[i] = z > 0 ? std::pow(z, ar) * std::exp(-z * z / 2) : 0.0;
    }
  }
  double m0 = trapezoid(z_grid, d.p);
  for (auto& v : d.p) v /= m0;

  for (int it = 1; it <= max_iters; ++it) {
    auto next = kernel.apply(z_grid, d.p);
    const double m = trapezoid(z_grid, next);
    if (!(m > 0)) throw std::runtime_error("meander_fixed_point: kernel lost all mass");
    for (auto& v : next) v /= m;
    double delta = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i)
      delta = std::max(delta, std::fabs(next[i] - d.p[i]));
    d.p = std::move(next);
    d.iterations = it;
    d.residual = delta;
    if (delta < tol) {
      d.converged = true;
      break;
    }
  }
  return d;
}

double small_z_exponent(const MeanderDensity& density, double z_lo, double z_hi) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < density.z.size(); ++i) {
    const double z = density.z[i];
    if (z < z_lo || z > z_hi) continue;
    if (!(density.p[i] > 0))
      throw std::domain_error("small_z_exponent: nonpositive density in the fit window");
    lx.push_back(std::log(z));
    ly.push_back(std::log(density.p[i]));
  }
  if (lx.size() < 10)
    throw std::invalid_argument("small_z_exponent: need >= 10 grid points in the window");
  return fit_slope(lx, ly);
}

}  // namespace fluct
