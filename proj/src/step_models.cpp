#include "fluct/step_models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace fluct {

using std::numbers::pi;

double StepModel::stored_mass() const {
  KahanSum s;
  for (double p : step_probs) s.add(p);
  return s.value();
}

double StepModel::min_abs_support() const {
  double best = -1.0;
  for (std::size_t i = 0; i < step_probs.size(); ++i) {
    if (step_probs[i] <= 0) continue;
    const double v = std::fabs(support_value(k_min + static_cast<long long>(i)));
    if (best < 0 || v < best) best = v;
  }
  return best < 0 ? 0.0 : best;
}

double StepModel::mu(double u) const {
  if (!(u > 0)) throw std::invalid_argument("mu: u must be positive");
  if (mu_closed) return mu_closed(u);
  if (!is_lattice()) throw std::invalid_argument("mu: continuous model without closed form");
  KahanSum s;
  for (std::size_t i = 0; i < step_probs.size(); ++i) {
    const double v = support_value(k_min + static_cast<long long>(i));
    if (std::fabs(v) <= u) s.add(v * v * step_probs[i]);
  }
  return s.value() / (u * u);
}

double StepModel::cdf_leq(double v) const {
  if (cdf_closed) return cdf_closed(v);
  if (!is_lattice()) throw std::invalid_argument("cdf_leq: continuous model without closed form");
  KahanSum s;
  s.add(trunc_mass_left);
  for (std::size_t i = 0; i < step_probs.size(); ++i) {
    if (support_value(k_min + static_cast<long long>(i)) <= v) s.add(step_probs[i]);
    else break;
  }
  return s.value();
}

namespace {

// inverse-CDF sampler over a dense lattice pmf (small supports)
std::function<double(RngStream&)> table_sampler(const std::vector<double>& probs, double shift_a,
                                                double span_h, long long k_min) {
  auto cum = std::make_shared<std::vector<double>>(probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) { acc += probs[i]; (*cum)[i] = acc; }
  const double total = acc;
  return [cum, shift_a, span_h, k_min, total](RngStream& rng) {
    const double u = rng.next_double() * total;
    const auto it = std::lower_bound(cum->begin(), cum->end(), u);
    const auto idx = static_cast<long long>(it - cum->begin());
    return shift_a + static_cast<double>(k_min + idx) * span_h;
  };
}

struct ParetoTables {
  std::vector<double> cdf_abs;  // P(|X| <= k), k = 1..table_size, untruncated law
  double alpha;
  double norm;  // 1/zeta(alpha+1)
};

std::shared_ptr<ParetoTables> build_pareto_tables(double alpha) {
  auto t = std::make_shared<ParetoTables>();
  t->alpha = alpha;
  t->norm = 1.0 / zeta(alpha + 1);
  const std::size_t n = 1u << 18;
  t->cdf_abs.resize(n);
  double acc = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    acc += t->norm * std::pow(static_cast<double>(k), -alpha - 1);
    t->cdf_abs[k - 1] = acc;
  }
  return t;
}

// magnitude draw for the discrete Pareto; table for the bulk, exact
// discrete-tail rejection beyond it
long long pareto_abs_draw(const ParetoTables& t, RngStream& rng) {
  const double u = rng.next_double();
  if (u < t.cdf_abs.back()) {
    const auto it = std::lower_bound(t.cdf_abs.begin(), t.cdf_abs.end(), u);
    return static_cast<long long>(it - t.cdf_abs.begin()) + 1;
  }
  const double kmax = static_cast<double>(t.cdf_abs.size());
  for (;;) {
    // continuous Pareto proposal on [kmax+1/2, inf), density ~ y^{-alpha-1}
    const double y = (kmax + 0.5) * std::pow(rng.next_double_pos(), -1.0 / t.alpha);
    const double k = std::floor(y + 0.5);
    const double bin = (std::pow(k - 0.5, -t.alpha) - std::pow(k + 0.5, -t.alpha)) / t.alpha;
    const double accept = std::pow(k, -t.alpha - 1) / (1.05 * bin);
    if (rng.next_double() < accept) return static_cast<long long>(k);
  }
}

double erfc_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace

StepModelPtr make_simple_rw() {
  auto m = std::make_shared<StepModel>();
  m->name = "simple-rw";
  m->kind = StepKind::lattice;
  m->tail = {2.0, 0.0, 0.5};
  m->span_h = 2.0;
  m->shift_a = 1.0;
  m->shift_frac = Rational(1, 2);
  m->k_min = -1;                 // support: 1 + 2k for k in {-1, 0}
  m->step_probs = {0.5, 0.5};
  m->sampler = [](RngStream& rng) { return rng.next_double() < 0.5 ? -1.0 : 1.0; };
  return m;
}

StepModelPtr make_lazy_rw() {
  auto m = std::make_shared<StepModel>();
  m->name = "lazy-rw";
  m->kind = StepKind::lattice;
  m->tail = {2.0, 0.0, 0.5};
  m->span_h = 1.0;
  m->shift_a = 0.0;
  m->shift_frac = Rational(0, 1);
  m->k_min = -1;
  m->step_probs = {0.25, 0.5, 0.25};
  m->sampler = [](RngStream& rng) {
    const double u = rng.next_double();
    if (u < 0.25) return -1.0;
    if (u < 0.75) return 0.0;
    return 1.0;
  };
  return m;
}

StepModelPtr make_pareto_sym(double alpha, long long dp_truncation) {
  if (!(alpha > 0 && alpha < 2)) throw std::domain_error("pareto: alpha must be in (0,2)");
  auto m = std::make_shared<StepModel>();
  m->name = "pareto:" + std::to_string(alpha);
  m->kind = StepKind::lattice;
  m->tail = {alpha, 0.0, 0.5};
  m->mean_zero = alpha > 1;  // symmetric; mean exists only for alpha > 1
  m->span_h = 1.0;
  m->shift_a = 0.0;
  m->shift_frac = Rational(0, 1);
  const long long K = dp_truncation;
  m->k_min = -K;
  m->step_probs.assign(static_cast<std::size_t>(2 * K + 1), 0.0);
  const double c = 0.5 / zeta(alpha + 1);
  for (long long k = 1; k <= K; ++k) {
    const double p = c * std::pow(static_cast<double>(k), -alpha - 1);
    m->step_probs[static_cast<std::size_t>(K + k)] = p;
    m->step_probs[static_cast<std::size_t>(K - k)] = p;
  }
  const double tail = c * power_tail_sum(alpha + 1, static_cast<std::uint64_t>(K));
  m->trunc_mass_left = tail;
  m->trunc_mass_right = tail;
  auto tables = build_pareto_tables(alpha);
  m->sampler = [tables](RngStream& rng) {
    const double mag = static_cast<double>(pareto_abs_draw(*tables, rng));
    return rng.next_double() < 0.5 ? -mag : mag;
  };
  m->mu_closed = [alpha, c](double u) {
    if (u < 1) return 0.0;
    return 2 * c * partial_power_sum(alpha - 1, static_cast<std::uint64_t>(u)) / (u * u);
  };
  m->cdf_closed = [alpha, c](double v) {
    if (v >= 0) {
      const auto m0 = static_cast<std::uint64_t>(std::floor(v));
      return 0.5 + c * partial_power_sum(alpha + 1, m0);
    }
    const auto m0 = static_cast<std::uint64_t>(std::ceil(-v)) - 1;
    return 0.5 - c * partial_power_sum(alpha + 1, m0);
  };
  return m;
}

StepModelPtr make_pareto_asym(double alpha, double p, long long dp_truncation) {
  if (!(alpha > 1 && alpha < 2))
    throw std::domain_error("pareto-asym: mean centering requires alpha in (1,2)");
  if (!(p > 0 && p < 1)) throw std::domain_error("pareto-asym: p must be in (0,1)");
  const double q = 1 - p;
  auto m = std::make_shared<StepModel>();
  m->name = "pareto-asym:" + std::to_string(alpha) + ":" + std::to_string(p);
  m->kind = StepKind::lattice;
  m->tail = {alpha, p - q, q};
  m->span_h = 1.0;
  m->shift_a = 0.0;
  m->shift_frac = Rational(0, 1);
  const long long K = dp_truncation;
  m->k_min = -K;
  m->step_probs.assign(static_cast<std::size_t>(2 * K + 1), 0.0);
  const double z1 = zeta(alpha + 1);
  for (long long k = 1; k <= K; ++k) {
    const double base = std::pow(static_cast<double>(k), -alpha - 1) / z1;
    m->step_probs[static_cast<std::size_t>(K + k)] = p * base;
    m->step_probs[static_cast<std::size_t>(K - k)] = q * base;
  }
  // mean centering: move eps from +1 to -1 (interior adjustment keeps (h,a))
  const double mean = (p - q) * zeta(alpha) / z1;
  const double eps = mean / 2;
  auto& p_plus1 = m->step_probs[static_cast<std::size_t>(K + 1)];
  auto& p_minus1 = m->step_probs[static_cast<std::size_t>(K - 1)];
  if (eps > p_plus1 || -eps > p_minus1)
    throw std::domain_error("pareto-asym: cannot mean-center within the +-1 atoms");
  p_plus1 -= eps;
  p_minus1 += eps;
  const double tail = power_tail_sum(alpha + 1, static_cast<std::uint64_t>(K)) / z1;
  m->trunc_mass_left = q * tail;
  m->trunc_mass_right = p * tail;
  // sampler: adjusted atoms for |X| = 1, analytic two-sided tail beyond
  auto tables = build_pareto_tables(alpha);
  const double p1 = p_plus1, m1 = p_minus1;
  m->sampler = [tables, p, p1, m1, z1](RngStream& rng) {
    const double u = rng.next_double();
    if (u < p1) return 1.0;
    if (u < p1 + m1) return -1.0;
    // magnitude >= 2 with sign split p:q
    long long mag;
    do { mag = pareto_abs_draw(*tables, rng); } while (mag < 2);
    return rng.next_double() < p ? static_cast<double>(mag) : -static_cast<double>(mag);
  };
  const double eps_shift = eps;
  m->mu_closed = [alpha, z1, eps_shift](double u) {
    if (u < 1) return 0.0;
    // the +-1 transfer moves mass between equal squares; mu unchanged
    return partial_power_sum(alpha - 1, static_cast<std::uint64_t>(u)) / z1 / (u * u);
  };
  m->cdf_closed = [alpha, z1, q, p1, m1](double v) {
    if (v >= 0) {
      const auto m0 = static_cast<std::uint64_t>(std::floor(v));
      double s = q * zeta(alpha + 1) / z1 + m1 - q / z1;  // P(X <= 0) after adjustment
      if (m0 >= 1) s += p1 + (partial_power_sum(alpha + 1, m0) - 1.0) * (1 - q) / z1;
      return s;
    }
    const auto m0 = static_cast<std::uint64_t>(std::ceil(-v));
    double s = q * power_tail_sum(alpha + 1, m0 > 0 ? m0 - 1 : 0) / z1;
    if (m0 <= 1) s += m1 - q / z1;  // adjusted -1 atom replaces the raw one
    return s;
  };
  return m;
}

namespace {
StepModelPtr shift_lattice_common(double a, bool rational, Rational frac, double mid_weight,
                                  const std::string& name) {
  if (!(a > 0 && a < 1)) throw std::domain_error("shift-lattice: a must be in (0,1)");
  if (!(mid_weight >= 0 && mid_weight < 1 - a))
    throw std::domain_error("shift-lattice: mid weight must be in [0, 1-a)");
  const double r = (1 - mid_weight - a) / 2;  // weight at a+1
  const double p = r + a;                     // weight at a-1; p - r = a gives mean 0
  auto m = std::make_shared<StepModel>();
  m->name = name;
  m->kind = StepKind::lattice;
  m->tail = {2.0, 0.0, 0.5};
  m->span_h = 1.0;
  m->shift_a = a;
  m->shift_is_rational = rational;
  m->shift_frac = frac;
  m->k_min = -1;
  m->step_probs = {p, mid_weight, r};
  const double mid = mid_weight;
  m->sampler = [a, p, mid](RngStream& rng) {
    const double u = rng.next_double();
    if (u < p) return a - 1;
    if (u < p + mid) return a;
    return a + 1;
  };
  return m;
}
}  // namespace

StepModelPtr make_shift_lattice(const Rational& a, double mid_weight) {
  return shift_lattice_common(a.value(), true, a, mid_weight,
                              "shift:" + std::to_string(a.num) + "/" + std::to_string(a.den));
}

StepModelPtr make_shift_lattice_irrational(double a, double mid_weight) {
  return shift_lattice_common(a, false, Rational(), mid_weight, "shift:" + std::to_string(a));
}

StepModelPtr make_gaussian() {
  auto m = std::make_shared<StepModel>();
  m->name = "gauss";
  m->kind = StepKind::continuous;
  m->tail = {2.0, 0.0, 0.5};
  m->sampler = [](RngStream& rng) {
    const double u1 = rng.next_double_pos();
    const double u2 = rng.next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2 * pi * u2);
  };
  m->mu_closed = [](double u) {
    const double phi = std::exp(-u * u / 2) / std::sqrt(2 * pi);
    const double tail2 = u * phi + (1.0 - erfc_cdf(u));  // int_u^inf x^2 phi(x) dx
    return (1.0 - 2.0 * tail2) / (u * u);
  };
  m->cdf_closed = [](double v) { return erfc_cdf(v); };
  return m;
}

StepModelPtr make_cauchy() {
  auto m = std::make_shared<StepModel>();
  m->name = "cauchy";
  m->kind = StepKind::continuous;
  m->tail = {1.0, 0.0, 0.5};
  m->mean_zero = false;  // no first moment; symmetric
  m->sampler = [](RngStream& rng) { return std::tan(pi * (rng.next_double() - 0.5)); };
  m->mu_closed = [](double u) { return 2.0 / pi * (u - std::atan(u)) / (u * u); };
  m->cdf_closed = [](double v) { return 0.5 + std::atan(v) / pi; };
  return m;
}

StepModelPtr make_pareto_continuous(double alpha) {
  if (!(alpha > 0 && alpha < 2)) throw std::domain_error("pareto-cont: alpha must be in (0,2)");
  auto m = std::make_shared<StepModel>();
  m->name = "pareto-cont:" + std::to_string(alpha);
  m->kind = StepKind::continuous;
  m->tail = {alpha, 0.0, 0.5};
  m->mean_zero = alpha > 1;
  m->sampler = [alpha](RngStream& rng) {
    const double mag = std::pow(rng.next_double_pos(), -1.0 / alpha);
    return rng.next_double() < 0.5 ? -mag : mag;
  };
  m->mu_closed = [alpha](double u) {
    if (u <= 1) return 0.0;
    if (alpha == 2) return 2.0 * std::log(u) / (u * u);
    return alpha * (std::pow(u, 2 - alpha) - 1) / (2 - alpha) / (u * u);
  };
  m->cdf_closed = [alpha](double v) {
    if (v <= -1) return 0.5 * std::pow(-v, -alpha);
    if (v >= 1) return 1.0 - 0.5 * std::pow(v, -alpha);
    return 0.5;
  };
  return m;
}

StepModelPtr scale_model(StepModelPtr base, double factor) {
  if (!(factor > 0)) throw std::domain_error("scale_model: factor must be positive");
  if (!base->is_lattice()) throw std::invalid_argument("scale_model: lattice model required");
  auto m = std::make_shared<StepModel>(*base);
  m->name = base->name + "@" + std::to_string(factor);
  m->span_h = base->span_h * factor;
  m->shift_a = base->shift_a * factor;  // stays in [0, h); a/h and offsets unchanged
  auto inner = base;
  m->sampler = [inner, factor](RngStream& rng) { return factor * inner->sample(rng); };
  if (base->mu_closed) {
    auto mu0 = base->mu_closed;
    m->mu_closed = [mu0, factor](double u) { return mu0(u / factor); };
  } else {
    m->mu_closed = nullptr;
  }
  if (base->cdf_closed) {
    auto cdf0 = base->cdf_closed;
    m->cdf_closed = [cdf0, factor](double v) { return cdf0(v / factor); };
  } else {
    m->cdf_closed = nullptr;
  }
  return m;
}

StepModelPtr model_from_name(const std::string& spec) {
  if (spec == "simple-rw") return make_simple_rw();
  if (spec == "lazy-rw") return make_lazy_rw();
  if (spec == "gauss") return make_gaussian();
  if (spec == "cauchy") return make_cauchy();
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ':')) out.push_back(item);
    return out;
  };
  const auto parts = split(spec);
  if (parts.size() >= 2 && parts[0] == "pareto") return make_pareto_sym(std::stod(parts[1]));
  if (parts.size() >= 3 && parts[0] == "pareto-asym")
    return make_pareto_asym(std::stod(parts[1]), std::stod(parts[2]));
  if (parts.size() >= 2 && parts[0] == "pareto-cont")
    return make_pareto_continuous(std::stod(parts[1]));
  if (parts.size() >= 2 && parts[0] == "shift") {
    if (parts[1].find('/') != std::string::npos) return make_shift_lattice(parse_rational(parts[1]));
    return make_shift_lattice_irrational(std::stod(parts[1]));
  }
  if (parts.size() >= 3 && parts[0] == "scale") {
    std::string rest = parts[2];
    for (std::size_t i = 3; i < parts.size(); ++i) rest += ":" + parts[i];
    return scale_model(model_from_name(rest), parse_rational(parts[1]).value());
  }
  throw std::invalid_argument("unknown model: " + spec);
}

namespace {
[[noreturn]] void parse_fail(const std::string& path, int line, const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}
}  // namespace

StepModelPtr load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::string name, kind, density;
  double alpha = 2.0, beta = 0.0;
  std::vector<Rational> support;
  std::vector<double> weights;
  std::optional<double> declared_h, declared_a;
  int lineno = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::stringstream ss(line);
    std::string key;
    if (!(ss >> key)) continue;
    try {
      if (key == "name") ss >> name;
      else if (key == "kind") ss >> kind;
      else if (key == "alpha") ss >> alpha;
      else if (key == "beta") ss >> beta;
      else if (key == "density") ss >> density;
      else if (key == "h") { double v; ss >> v; declared_h = v; }
      else if (key == "a") { double v; ss >> v; declared_a = v; }
      else if (key == "support") {
        std::string tok;
        while (ss >> tok) support.push_back(parse_rational(tok));
      } else if (key == "weights") {
        std::string tok;
        while (ss >> tok) weights.push_back(parse_rational(tok).value());
      } else {
        parse_fail(path, lineno, "unknown key '" + key + "'");
      }
    } catch (const std::exception& e) {
      parse_fail(path, lineno, std::string("bad value: ") + e.what());
    }
  }
  if (kind == "continuous") {
    if (density.empty()) throw std::runtime_error(path + ": continuous model needs 'density'");
    auto m = model_from_name(density);
    auto copy = std::make_shared<StepModel>(*m);
    if (!name.empty()) copy->name = name;
    return copy;
  }
  if (kind != "lattice") throw std::runtime_error(path + ": 'kind' must be lattice or continuous");
  if (support.empty() || support.size() != weights.size())
    throw std::runtime_error(path + ": support/weights missing or of different lengths");
  double wsum = 0;
  for (double w : weights) {
    if (w < 0) throw std::runtime_error(path + ": negative weight");
    wsum += w;
  }
  if (std::fabs(wsum - 1.0) > 1e-12) throw std::runtime_error(path + ": weights must sum to 1");

  // maximal span from rational support: gcd of differences on a common denominator
  std::int64_t den = 1;
  for (const auto& r : support) den = std::lcm(den, r.den);
  std::vector<std::int64_t> scaled(support.size());
  for (std::size_t i = 0; i < support.size(); ++i) scaled[i] = support[i].num * (den / support[i].den);
  std::int64_t g = 0;
  for (std::size_t i = 1; i < scaled.size(); ++i) g = std::gcd(g, std::llabs(scaled[i] - scaled[0]));
  if (g == 0) throw std::runtime_error(path + ": degenerate one-point support");
  const Rational h(g, den);
  std::int64_t a_num = ((scaled[0] % g) + g) % g;
  const Rational a(a_num, den);

  auto m = std::make_shared<StepModel>();
  m->name = name.empty() ? path : name;
  m->kind = StepKind::lattice;
  m->tail = {alpha, beta, 0.5 * (1 - beta)};
  m->span_h = h.value();
  m->shift_a = a.value();
  m->shift_frac = Rational(a.num * h.den, static_cast<std::int64_t>(a.den) * h.num);
  long long kmin = 0, kmax = 0;
  std::vector<long long> offs(scaled.size());
  for (std::size_t i = 0; i < scaled.size(); ++i) {
    offs[i] = (scaled[i] - a_num) / g;
    kmin = std::min(kmin, offs[i]);
    kmax = std::max(kmax, offs[i]);
  }
  m->k_min = kmin;
  m->step_probs.assign(static_cast<std::size_t>(kmax - kmin + 1), 0.0);
  for (std::size_t i = 0; i < offs.size(); ++i)
    m->step_probs[static_cast<std::size_t>(offs[i] - kmin)] += weights[i];
  if (declared_h && std::fabs(*declared_h - m->span_h) > 1e-12)
    throw std::runtime_error(path + ": declared h disagrees with the support (maximal span " +
                             std::to_string(m->span_h) + ")");
  if (declared_a && std::fabs(*declared_a - m->shift_a) > 1e-12)
    throw std::runtime_error(path + ": declared a disagrees with the support (shift " +
                             std::to_string(m->shift_a) + ")");
  double mean = 0;
  for (std::size_t i = 0; i < support.size(); ++i) mean += support[i].value() * weights[i];
  m->mean_zero = std::fabs(mean) < 1e-10;
  m->sampler = table_sampler(m->step_probs, m->shift_a, m->span_h, m->k_min);
  return m;
}

StepModelPtr resolve_model(const std::string& arg) {
  try {
    return model_from_name(arg);
  } catch (const std::invalid_argument&) {
    return load_model_file(arg);
  }
}

LatticeInfoResult lattice_info(const StepModel& model) {
  LatticeInfoResult r;
  if (!model.is_lattice()) return r;
  r.is_lattice = true;
  // gcd over stored offsets with positive mass; refine h if a coarser
  // sub-lattice carries all the mass
  long long g = 0;
  long long first = 0;
  bool have_first = false;
  for (std::size_t i = 0; i < model.step_probs.size(); ++i) {
    if (model.step_probs[i] <= 0) continue;
    const long long k = model.k_min + static_cast<long long>(i);
    if (!have_first) { first = k; have_first = true; continue; }
    g = std::gcd(g, k - first);
  }
  if (g == 0) g = 1;
  r.span_h = model.span_h * static_cast<double>(g);
  const double v0 = model.support_value(first);
  r.shift_a = v0 - std::floor(v0 / r.span_h) * r.span_h;
  if (std::fabs(r.shift_a - r.span_h) < 1e-12) r.shift_a = 0.0;
  return r;
}

double NormSeq::c(long n) const {
  if (n < 1) throw std::invalid_argument("NormSeq: n must be >= 1");
  {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto it = cache_.find(n);
    if (it != cache_.end()) return it->second;
  }
  const StepModel& m = *model_;
  double u0 = m.is_lattice() ? m.min_abs_support() : 0.0;
  if (u0 <= 0) u0 = 1e-6;
  const double target = 1.0 / static_cast<double>(n);
  // grow hi until mu stays at or below 1/n through three further octaves
  // (guards against lattice jump wiggles near the crossing)
  double hi = std::max(u0, 1.0);
  while (!(m.mu(hi) <= target && m.mu(2 * hi) <= target && m.mu(4 * hi) <= target)) {
    hi *= 2;
    if (hi > 1e18) throw std::runtime_error("NormSeq: bracket failure (mu does not fall)");
  }
  // find a lower point on the mu > 1/n side
  double lo = hi / 2;
  while (lo > u0 && m.mu(lo) <= target) lo /= 2;
  double c;
  if (m.mu(std::max(lo, u0)) <= target) {
    c = u0;  // no crossing above the first support scale
  } else {
    lo = std::max(lo, u0);
    for (int it = 0; it < 200 && (hi - lo) > 1e-13 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (m.mu(mid) > target) lo = mid;
      else hi = mid;
    }
    c = 0.5 * (lo + hi);
  }
  std::lock_guard<std::mutex> lock(mutex_);
  cache_[n] = c;
  return c;
}

}  // namespace fluct
