#include "fluct/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>

#include "fluct/exact_dp.hpp"
#include "fluct/ladder.hpp"
#include "fluct/meander.hpp"
#include "fluct/montecarlo.hpp"
#include "fluct/stable.hpp"
#include "fluct/wiener_hopf.hpp"

namespace fluct {

using nlohmann::json;

TolProfile TolProfile::get(const std::string& name) {
  TolProfile p;
  if (name == "default") return p;
  if (name == "strict") {
    p.name = "strict";
    p.llt_normal_err = 0.01;
    p.llt_normal_err_mc = 0.05;
    p.llt_small_dev = 0.05;
    p.llt_small_dev_mc = 0.10;
    p.tau_lattice_lo = 0.95;
    p.tau_lattice_hi = 1.05;
    p.tau_cont_lo = 0.99;
    p.tau_cont_hi = 1.01;
    p.meander_sup_normal = 2.5e-3;
    p.exponent_tol_normal = 0.025;
    p.exponent_tol_heavy = 0.05;
    p.identity_band = 0.15;
    p.tv_alpha2 = 0.04;
    p.tv_heavy = 0.06;
    p.qosc_spread_factor = 1.0;
    return p;
  }
  throw std::invalid_argument("unknown tolerance profile: " + name);
}

json TolProfile::to_json() const {
  return json{{"name", name},
              {"llt_normal_err", llt_normal_err},
              {"llt_normal_err_mc", llt_normal_err_mc},
              {"llt_small_dev", llt_small_dev},
              {"llt_small_dev_mc", llt_small_dev_mc},
              {"tau_lattice_lo", tau_lattice_lo},
              {"tau_lattice_hi", tau_lattice_hi},
              {"tau_cont_lo", tau_cont_lo},
              {"tau_cont_hi", tau_cont_hi},
              {"meander_sup_normal", meander_sup_normal},
              {"exponent_tol_normal", exponent_tol_normal},
              {"exponent_tol_heavy", exponent_tol_heavy},
              {"identity_band", identity_band},
              {"tv_alpha2", tv_alpha2},
              {"tv_heavy", tv_heavy},
              {"qosc_spread_factor", qosc_spread_factor}};
}

json ExperimentReport::to_json() const {
  return json{{"schema_version", schema_version},
              {"experiment", id},
              {"model", model},
              {"config", config},
              {"thresholds", thresholds},
              {"rows", rows},
              {"verdict", verdict},
              {"wall_clock_s", wall_clock}};
}

std::string ExperimentReport::canonical_json() const {
  json j = to_json();
  j["wall_clock_s"] = 0.0;
  return j.dump();
}

namespace {

const std::map<std::string, std::vector<std::string>>& csv_columns() {
  static const std::map<std::string, std::vector<std::string>> cols = {
      {"llt-normal", {"n", "E", "max_se"}},
      {"llt-small", {"n", "max_dev", "windows"}},
      {"tau-local", {"n", "r_minus", "r_plus", "odd_zero_max"}},
      {"q-oscillation", {"residue", "s", "omega", "Q", "clusters", "spread", "surrogate"}},
      {"identity", {"n", "estimate", "std_err", "target", "distance"}},
      {"meander", {"alpha", "beta", "exponent", "exp_target", "sup_err", "tv", "residual"}},
      {"factorization", {"model", "residual", "order"}},
  };
  return cols;
}

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

double jget(const json& row, const std::string& key, double fallback = 0.0) {
  if (row.contains(key) && row[key].is_number()) return row[key].get<double>();
  return fallback;
}

// limit density for (alpha, beta): closed form at (2,0), fixed point otherwise
const MeanderDensity& reference_density(double alpha, double beta) {
  static std::mutex mu;
  static std::map<std::pair<double, double>, MeanderDensity> cache;
  std::lock_guard<std::mutex> lock(mu);
  const auto key = std::make_pair(alpha, beta);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  MeanderDensity d;
  if (alpha == 2.0) {
    d.alpha = 2.0;
    d.beta = 0.0;
    d.z = default_meander_grid();
    d.p.resize(d.z.size());
    for (std::size_t i = 0; i < d.z.size(); ++i) d.p[i] = meander_density_normal(d.z[i]);
    d.converged = true;
  } else {
    const StableParams params(alpha, beta, calibrated_scale(alpha));
    d = meander_fixed_point(params, default_meander_grid());
  }
  return cache.emplace(key, std::move(d)).first->second;
}

double prob_negative(const StepModel& m) {
  if (!m.is_lattice()) return m.cdf_closed ? m.cdf_closed(0.0) : 0.5;
  double acc = m.trunc_mass_left;
  for (std::size_t i = 0; i < m.step_probs.size(); ++i)
    if (m.support_value(m.k_min + static_cast<long long>(i)) < 0) acc += m.step_probs[i];
  return acc;
}

// Monte Carlo chi+ and renewal function for continuous models
RenewalFunction mc_renewal(StepModelPtr model, std::uint64_t paths, long n_cap, double bin,
                           double u_max, std::uint64_t seed) {
  ChiPmf chi;
  chi.delta = bin;
  chi.probs.assign(static_cast<std::size_t>(std::ceil(u_max / bin)) + 2, 0.0);
  RngStream rng(seed, 17);
  std::uint64_t crossed = 0;
  double above = 0.0;
  for (std::uint64_t i = 0; i < paths; ++i) {
    double s = 0.0;
    for (long k = 0; k < n_cap; ++k) {
      s += model->sample(rng);
      if (s > 0) {
        const auto idx = static_cast<std::size_t>(std::ceil(s / bin));
        if (idx >= 1 && idx - 1 < chi.probs.size()) chi.probs[idx - 1] += 1.0;
        else above += 1.0;
        ++crossed;
        break;
      }
    }
  }
  const double total = static_cast<double>(paths);
  for (auto& p : chi.probs) p /= total;
  chi.known_above = above / total;
  chi.defect = static_cast<double>(paths - crossed) / total;
  return RenewalFunction(chi, u_max);
}

struct BinMassRef {
  std::vector<double> mass;  // reference bin masses, normalized over the grid
};

BinMassRef reference_bin_masses(const MeanderDensity& ref, const std::vector<double>& edges) {
  BinMassRef out;
  out.mass.resize(edges.size() - 1, 0.0);
  double total = 0.0;
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    const int sub = 24;
    double acc = 0.0;
    for (int i = 0; i < sub; ++i) {
      const double z0 = edges[b] + (edges[b + 1] - edges[b]) * i / sub;
      const double z1 = edges[b] + (edges[b + 1] - edges[b]) * (i + 1) / sub;
      acc += 0.5 * (ref.at(z0) + ref.at(z1)) * (z1 - z0);
    }
    out.mass[b] = acc;
    total += acc;
  }
  if (total > 0)
    for (auto& m : out.mass) m /= total;
  return out;
}

json base_config(const ExperimentContext& ctx) {
  return json{{"seed", ctx.seed}, {"workers", ctx.workers}, {"tol_profile", ctx.tol.name}};
}

ExperimentReport finalize(ExperimentReport r, double t0) {
  r.verdict = verdict_from_rows(r.id, r.rows, r.thresholds);
  r.wall_clock = now_seconds() - t0;
  return r;
}

}  // namespace

void ExperimentReport::write_csv(std::ostream& out) const {
  std::vector<std::string> cols;
  const auto& table = csv_columns();
  const auto it = table.find(id);
  if (it != table.end()) cols = it->second;
  else if (!rows.empty())
    for (auto& el : rows.front().items()) cols.push_back(el.key());
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) out << ',';
      if (row.contains(cols[i])) {
        const auto& v = row[cols[i]];
        if (v.is_string()) out << v.get<std::string>();
        else out << v.dump();
      }
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// verdicts
// ---------------------------------------------------------------------------

std::string verdict_from_rows(const std::string& id, const json& rows, const json& thresholds) {
  auto thr = [&](const std::string& key) { return thresholds.at(key).get<double>(); };
  if (rows.empty()) return "inconclusive";
  if (rows.front().contains("inconclusive") && rows.front()["inconclusive"].get<bool>())
    return "inconclusive";

  if (id == "llt-normal" || id == "llt-small") {
    const std::string key = id == "llt-normal" ? "E" : "max_dev";
    std::vector<double> errs;
    for (const auto& r : rows)
      if (r.contains(key)) errs.push_back(r[key].get<double>());
    if (errs.empty()) return "inconclusive";
    const double bound = thr("err_bound");
    bool ok = errs.back() <= bound;
    if (errs.size() >= 2) ok = ok && errs.back() < errs.front();
    if (id == "llt-normal" && rows.back().contains("max_se") &&
        3 * jget(rows.back(), "max_se") > bound)
      return "inconclusive";
    return ok ? "pass" : "fail";
  }
  if (id == "tau-local") {
    std::vector<double> rm, rp;
    double zero_max = 0;
    bool has_zero_row = false;
    for (const auto& r : rows) {
      if (r.contains("r_minus")) rm.push_back(r["r_minus"].get<double>());
      if (r.contains("r_plus")) rp.push_back(r["r_plus"].get<double>());
      if (r.contains("odd_zero_max")) {
        has_zero_row = true;
        zero_max = std::max(zero_max, r["odd_zero_max"].get<double>());
      }
    }
    if (rm.empty() || rp.empty()) return "inconclusive";
    if (has_zero_row && zero_max != 0.0) return "fail";
    if (thresholds.value("mode", "band") == "stabilize") {
      // residue-structured walk: the compatible-class ratio must settle
      if (rm.size() < 2 || rp.size() < 2) return "inconclusive";
      const double stab = thr("stabilize_tol");
      const bool ok = std::fabs(rm.back() / rm[rm.size() - 2] - 1.0) <= stab &&
                      std::fabs(rp.back() / rp[rp.size() - 2] - 1.0) <= stab;
      return ok ? "pass" : "fail";
    }
    const bool ok = rm.back() >= thr("lo") && rm.back() <= thr("hi") && rp.back() >= thr("lo") &&
                    rp.back() <= thr("hi");
    return ok ? "pass" : "fail";
  }
  if (id == "q-oscillation") {
    for (const auto& r : rows) {
      if (!r.contains("clusters")) continue;
      const double den = jget(r, "den", 1);
      const double clusters = jget(r, "clusters");
      if (den <= 1.0) return clusters == 1.0 ? "pass" : "fail";
      const bool ok = clusters == den &&
                      jget(r, "spread") >= thr("spread_factor") * jget(r, "surrogate");
      return ok ? "pass" : "fail";
    }
    return "inconclusive";
  }
  if (id == "identity") {
    std::vector<double> dist;
    double last_rel = 1e30, target = 0;
    for (const auto& r : rows) {
      dist.push_back(jget(r, "distance"));
      target = jget(r, "target");
      last_rel = dist.back() / std::max(1e-300, target);
    }
    bool ok = last_rel <= thr("band");
    for (std::size_t i = 1; i < dist.size(); ++i) ok = ok && dist[i] <= dist[i - 1] + 1e-12;
    return ok ? "pass" : "fail";
  }
  if (id == "meander") {
    bool ok = true;
    for (const auto& r : rows) {
      if (r.contains("converged") && !r["converged"].get<bool>()) ok = false;
      if (r.contains("exponent"))
        ok = ok && std::fabs(jget(r, "exponent") - jget(r, "exp_target")) <= thr("exp_tol");
      if (r.contains("sup_err")) ok = ok && jget(r, "sup_err") <= thr("sup_bound");
      if (r.contains("tv")) ok = ok && jget(r, "tv") <= thr("tv_bound");
    }
    return ok ? "pass" : "fail";
  }
  if (id == "factorization") {
    for (const auto& r : rows)
      if (jget(r, "residual", 1.0) > thr("residual_bound")) return "fail";
    return "pass";
  }
  throw std::invalid_argument("verdict_from_rows: unknown experiment id " + id);
}

// ---------------------------------------------------------------------------
// experiments
// ---------------------------------------------------------------------------

ExperimentReport check_llt_normal(StepModelPtr model, std::vector<long> n_list,
                                  const ExperimentContext& ctx) {
  const double t0 = now_seconds();
  ExperimentReport rep;
  rep.id = "llt-normal";
  rep.model = model->name;
  rep.config = base_config(ctx);
  rep.config["n_list"] = n_list;
  const bool lattice = model->is_lattice();
  rep.thresholds = {
      {"err_bound", lattice ? ctx.tol.llt_normal_err : ctx.tol.llt_normal_err_mc}};
  const double alpha = model->tail.alpha, beta = model->tail.beta;
  if (alpha <= 1.0) {
    rep.rows.push_back({{"inconclusive", true}, {"note", "no density available for alpha <= 1"}});
    return finalize(std::move(rep), t0);
  }
  std::function<double(double)> ref;
  if (alpha == 2.0) {
    ref = [](double z) { return meander_density_normal(z); };
  } else {
    const MeanderDensity& d = reference_density(alpha, beta);
    ref = [&d](double z) { return d.at(z); };
  }
  std::sort(n_list.begin(), n_list.end());
  NormSeq cn(model);

  if (lattice) {
    SurvivalTable table(model, n_list.back());
    for (long n : n_list) {
      const DpRow& row = table.row(n);
      const double c = cn.c(n), surv = row.alive, h = model->span_h;
      double err = 0.0;
      for (std::size_t i = 0; i < row.probs.size(); ++i) {
        const double v = table.value(n, row.k_lo + static_cast<long long>(i));
        err = std::max(err, std::fabs(c * row.probs[i] / surv - h * ref(v / c)));
      }
      rep.rows.push_back({{"n", n}, {"E", err}, {"max_se", 0.0}});
    }
  } else {
    for (long n : n_list) {
      const auto hist =
          meander_hist(model, n, 48, 150000, McOptions{ctx.seed, ctx.workers});
      double err = 0.0, max_se = 0.0;
      for (std::size_t b = 0; b < hist.density.size(); ++b) {
        const double center = 0.5 * (hist.edges[b] + hist.edges[b + 1]);
        err = std::max(err, std::fabs(hist.density[b] - ref(center)));
        max_se = std::max(max_se, hist.std_err[b]);
      }
      rep.rows.push_back({{"n", n}, {"E", err}, {"max_se", max_se}});
    }
  }
  return finalize(std::move(rep), t0);
}

ExperimentReport check_llt_small(StepModelPtr model, std::vector<long> n_list, double window_exp,
                                 const ExperimentContext& ctx) {
  const double t0 = now_seconds();
  ExperimentReport rep;
  rep.id = "llt-small";
  rep.model = model->name;
  rep.config = base_config(ctx);
  rep.config["n_list"] = n_list;
  rep.config["window_exp"] = window_exp;
  const bool lattice = model->is_lattice();
  rep.thresholds = {{"err_bound", lattice ? ctx.tol.llt_small_dev : ctx.tol.llt_small_dev_mc}};
  std::sort(n_list.begin(), n_list.end());
  NormSeq cn(model);
  const StableParams params(model->tail.alpha, model->tail.beta,
                            calibrated_scale(model->tail.alpha));
  const double g0 = params.density_at_zero();

  if (lattice) {
    LadderOptions lopt;
    lopt.u_max = std::max(32.0, std::pow(cn.c(n_list.back()), window_exp) + 2);
    LadderData ladder = build_ladder(model, lopt);
    SurvivalTable table(model, n_list.back());
    for (long n : n_list) {
      const DpRow& row = table.row(n);
      const double c = cn.c(n), surv = row.alive, h = model->span_h;
      const double bound = std::pow(c, window_exp);
      double dev = 0.0;
      long windows = 0;
      for (std::size_t i = 0; i < row.probs.size(); ++i) {
        const double v = table.value(n, row.k_lo + static_cast<long long>(i));
        if (v <= 0 || v > bound) continue;
        const double denom = h * g0 * ladder.H.at(v) / (static_cast<double>(n) * surv);
        const double r = c * row.probs[i] / surv / denom;
        dev = std::max(dev, std::fabs(r - 1.0));
        ++windows;
      }
      if (windows == 0) {
        rep.rows.push_back({{"inconclusive", true}, {"note", "empty window"}});
        return finalize(std::move(rep), t0);
      }
      rep.rows.push_back({{"n", n}, {"max_dev", dev}, {"windows", windows}});
    }
  } else {
    const RenewalFunction H =
        mc_renewal(model, 250000, 1 << 17, 0.005, 64.0, ctx.seed);
    for (long n : n_list) {
      const auto sample =
          simulate_conditioned(model, n, 120000, McOptions{ctx.seed, ctx.workers});
      const double c = cn.c(n);
      const double bound = std::pow(c, window_exp);
      const double surv = sample.survival.value;
      const auto cnt = static_cast<double>(sample.terminal.size());
      double dev = 0.0;
      long windows = 0;
      for (long x = 0; x + 1 <= static_cast<long>(bound); ++x) {
        long hits = 0;
        for (double s : sample.terminal)
          if (s >= x && s < x + 1) ++hits;
        if (hits < 60) continue;
        const double p_hat = static_cast<double>(hits) / cnt;
        const double denom = g0 *
                             (H.at(static_cast<double>(x)) + H.small_dev_integral(x)) /
                             (static_cast<double>(n) * surv);
        const double r = c * p_hat / denom;
        dev = std::max(dev, std::fabs(r - 1.0));
        ++windows;
      }
      if (windows == 0) {
        rep.rows.push_back({{"inconclusive", true}, {"note", "empty window"}});
        return finalize(std::move(rep), t0);
      }
      rep.rows.push_back({{"n", n}, {"max_dev", dev}, {"windows", windows}});
    }
  }
  return finalize(std::move(rep), t0);
}

namespace {
// r(n) rows along lattice-compatible n (structural zeros skipped)
void tau_ratio_rows(ExperimentReport& rep, const std::vector<double>& pmf_minus,
                    const std::vector<double>& pmf_plus, double rho, long n_max) {
  const auto tail_m = tau_tail(pmf_minus, static_cast<std::size_t>(n_max));
  const auto tail_p = tau_tail(pmf_plus, static_cast<std::size_t>(n_max));
  auto ratio_at = [&](const std::vector<double>& pmf, const std::vector<double>& tail,
                      double norm, long n) -> std::pair<long, double> {
    // walk down to the nearest lattice-compatible n
    for (long m = n; m > 0; --m) {
      if (pmf[static_cast<std::size_t>(m)] > 1e-15) {
        return {m, static_cast<double>(m) * pmf[static_cast<std::size_t>(m)] /
                       (norm * tail[static_cast<std::size_t>(m)])};
      }
    }
    return {0, 0.0};
  };
  for (long n = 8; n <= n_max; n *= 2) {
    const auto rm = ratio_at(pmf_minus, tail_m, 1 - rho, n);
    const auto rp = ratio_at(pmf_plus, tail_p, rho, n);
    rep.rows.push_back({{"n", n}, {"r_minus", rm.second}, {"r_plus", rp.second}});
  }
  const auto rm = ratio_at(pmf_minus, tail_m, 1 - rho, n_max);
  const auto rp = ratio_at(pmf_plus, tail_p, rho, n_max);
  json last = {{"n", n_max}, {"r_minus", rm.second}, {"r_plus", rp.second}};
  rep.rows.push_back(last);
}
}  // namespace

ExperimentReport check_tau_local(StepModelPtr model, long n_max, const ExperimentContext& ctx) {
  const double t0 = now_seconds();
  ExperimentReport rep;
  rep.id = "tau-local";
  rep.model = model->name;
  rep.config = base_config(ctx);
  rep.config["n_max"] = n_max;
  const bool lattice = model->is_lattice();
  // a walk with a fractional shift a/h has residue-structured epoch support:
  // the constant-Q cases (a)/(b)/(c) do not apply, the class ratio only
  // stabilizes; detect that and echo the verdict mode into the thresholds
  const bool residue_structured =
      lattice && model->shift_is_rational && model->shift_frac.den > 1;
  rep.thresholds = {{"lo", lattice ? ctx.tol.tau_lattice_lo : ctx.tol.tau_cont_lo},
                    {"hi", lattice ? ctx.tol.tau_lattice_hi : ctx.tol.tau_cont_hi},
                    {"mode", residue_structured ? "stabilize" : "band"},
                    {"stabilize_tol", 0.05}};
  const double rho = rho_from(model->tail.alpha, model->tail.beta);
  rep.config["rho"] = rho;

  std::vector<double> pmf_minus, pmf_plus;
  if (lattice) {
    const auto seq = positivity_from_dp(*model, n_max);
    const auto wh = wh_input_from_dp(seq, model->tail.left_mass_q);
    pmf_minus = tau_pmf_from_positivity(wh.q_minus, static_cast<std::size_t>(n_max),
                                        LadderSign::minus);
    pmf_plus =
        tau_pmf_from_positivity(wh.q_plus, static_cast<std::size_t>(n_max), LadderSign::plus);
  } else {
    // symmetric atomless walk: P(S_n > 0) = P(S_n <= 0) = 1/2 exactly
    if (std::fabs(model->tail.beta) > 0)
      throw std::invalid_argument("check_tau_local: asymmetric continuous models unsupported");
    std::vector<double> q(static_cast<std::size_t>(n_max) + 1, 0.5);
    pmf_minus = tau_pmf_from_positivity(q, static_cast<std::size_t>(n_max), LadderSign::minus);
    pmf_plus = pmf_minus;
  }
  tau_ratio_rows(rep, pmf_minus, pmf_plus, rho, n_max);

  // residue-structured walks: epochs in the impossible residue classes carry
  // exactly zero mass; check that on the exact DP pmf, which has no series dust
  if (residue_structured) {
    SurvivalTable table(model, n_max);
    const auto exact = tau_minus_pmf_exact(table, n_max);
    const long long den = model->shift_frac.den;
    std::vector<double> class_max(static_cast<std::size_t>(den), 0.0);
    for (long n = 2; n <= n_max; ++n) {
      auto& m = class_max[static_cast<std::size_t>(n % den)];
      m = std::max(m, exact[static_cast<std::size_t>(n)]);
    }
    double zero_class_max = 0.0;
    bool has_zero_class = false;
    for (double m : class_max)
      if (m < 1e-15) {
        has_zero_class = true;
        zero_class_max = std::max(zero_class_max, m);
      }
    if (has_zero_class) rep.rows.push_back({{"odd_zero_max", zero_class_max}});
  }
  return finalize(std::move(rep), t0);
}

ExperimentReport check_q_oscillation(StepModelPtr model, long n_max,
                                     const ExperimentContext& ctx) {
  const double t0 = now_seconds();
  ExperimentReport rep;
  rep.id = "q-oscillation";
  rep.model = model->name;
  rep.config = base_config(ctx);
  rep.config["n_max"] = n_max;
  rep.thresholds = {{"spread_factor", ctx.tol.qosc_spread_factor}};
  if (!model->is_lattice() || !model->shift_is_rational)
    throw std::invalid_argument("check_q_oscillation: rational-shift lattice model required");

  LadderData ladder = build_ladder(model);
  if (ladder.descent.status == DescentMoment::Status::likely_infinite)
    throw std::domain_error("check_q_oscillation: infinite-descent model rejected");

  const long long den = std::max<std::int64_t>(1, model->shift_frac.den);
  double omega_min = 1e300, omega_max = -1e300;
  std::vector<double> qvals;
  for (long long r = 0; r < den; ++r) {
    const double s = static_cast<double>(r) / static_cast<double>(den);
    const double om = omega_big(ladder, s);
    const double qv = ladder.g0 * om / ladder.C0_hat;
    qvals.push_back(qv);
    omega_min = std::min(omega_min, om);
    omega_max = std::max(omega_max, om);
    rep.rows.push_back({{"residue", r}, {"s", s}, {"omega", om}, {"Q", qv}});
  }
  long clusters = 0;
  std::vector<double> sorted = qvals;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i)
    if (i == 0 || sorted[i] - sorted[i - 1] > 1e-9 * std::max(1.0, sorted[i]) + 1e-12)
      ++clusters;
  const double abar = model->shift_frac.value();
  const double surrogate =
      den > 1 ? ladder.H.at((1.0 - abar) * model->span_h) * prob_negative(*model) : 0.0;
  rep.rows.push_back({{"clusters", clusters},
                      {"spread", omega_max - omega_min},
                      {"surrogate", surrogate},
                      {"den", den}});
  return finalize(std::move(rep), t0);
}

ExperimentReport check_identity(StepModelPtr model, std::vector<long> n_list,
                                std::uint64_t target_accepted, const ExperimentContext& ctx) {
  const double t0 = now_seconds();
  ExperimentReport rep;
  rep.id = "identity";
  rep.model = model->name;
  rep.config = base_config(ctx);
  rep.config["n_list"] = n_list;
  rep.config["target_accepted"] = target_accepted;
  rep.thresholds = {{"band", ctx.tol.identity_band}};
  const double alpha = model->tail.alpha, beta = model->tail.beta;
  if (!(alpha < 2.0) || !(beta < 1.0))
    throw std::domain_error("check_identity: identity regime requires alpha < 2 and beta < 1");
  const double rho = rho_from(alpha, beta);
  const double q = model->tail.left_mass_q;
  const double target = alpha * (1 - rho) / (q * (2 - alpha));
  std::sort(n_list.begin(), n_list.end());
  for (long n : n_list) {
    const auto est = estimate_negative_moment(model, n, alpha, target_accepted,
                                              McOptions{ctx.seed, ctx.workers});
    rep.rows.push_back({{"n", n},
                        {"estimate", est.value},
                        {"std_err", est.std_err},
                        {"target", target},
                        {"distance", std::fabs(est.value - target)}});
  }
  return finalize(std::move(rep), t0);
}

ExperimentReport check_meander_params(double alpha, double beta, const ExperimentContext& ctx) {
  const double t0 = now_seconds();
  ExperimentReport rep;
  rep.id = "meander";
  rep.model = "params";
  rep.config = base_config(ctx);
  rep.config["alpha"] = alpha;
  rep.config["beta"] = beta;
  const bool normal = alpha == 2.0;
  rep.thresholds = {
      {"exp_tol", normal ? ctx.tol.exponent_tol_normal : ctx.tol.exponent_tol_heavy},
      {"sup_bound", ctx.tol.meander_sup_normal},
      {"tv_bound", ctx.tol.tv_heavy}};
  if (!(alpha > 1.0)) {
    rep.rows.push_back(
        {{"inconclusive", true}, {"note", "fixed point restricted to alpha > 1"}});
    return finalize(std::move(rep), t0);
  }
  const StableParams params(alpha, beta, calibrated_scale(alpha));
  const MeanderDensity d = meander_fixed_point(params, default_meander_grid());
  const double exp_target = alpha * params.rho();
  const double z_hi = normal ? 1e-2 : 5e-2;
  const double exponent = small_z_exponent(d, 1e-3, z_hi);
  json row = {{"alpha", alpha},        {"beta", beta},
              {"exponent", exponent},  {"exp_target", exp_target},
              {"converged", d.converged}, {"residual", d.residual}};
  if (normal) {
    double sup = 0.0;
    for (std::size_t i = 0; i < d.z.size(); ++i) {
      if (d.z[i] > 4.0) break;
      sup = std::max(sup, std::fabs(d.p[i] - meander_density_normal(d.z[i])));
    }
    row["sup_err"] = sup;
  }
  rep.rows.push_back(row);
  return finalize(std::move(rep), t0);
}

ExperimentReport check_meander_model(StepModelPtr model, long n, std::uint64_t target_accepted,
                                     const ExperimentContext& ctx) {
  const double t0 = now_seconds();
  ExperimentReport rep;
  rep.id = "meander";
  rep.model = model->name;
  rep.config = base_config(ctx);
  rep.config["n"] = n;
  rep.config["target_accepted"] = target_accepted;
  const double alpha = model->tail.alpha, beta = model->tail.beta;
  const bool normal = alpha == 2.0;
  rep.thresholds = {{"exp_tol", ctx.tol.exponent_tol_heavy},
                    {"sup_bound", ctx.tol.meander_sup_normal},
                    {"tv_bound", normal ? ctx.tol.tv_alpha2 : ctx.tol.tv_heavy}};
  const auto hist =
      meander_hist(model, n, 24, target_accepted, McOptions{ctx.seed, ctx.workers});
  if (alpha <= 1.0) {
    // histogram-only partial report
    rep.rows.push_back({{"inconclusive", true},
                        {"note", "alpha <= 1: histogram only"},
                        {"accepted", hist.accepted}});
    return finalize(std::move(rep), t0);
  }
  const MeanderDensity& ref = reference_density(alpha, beta);
  const auto refmass = reference_bin_masses(ref, hist.edges);
  double tv = 0.0;
  for (std::size_t b = 0; b < refmass.mass.size(); ++b)
    tv += std::fabs(hist.bin_mass(b) - refmass.mass[b]);
  tv *= 0.5;
  rep.rows.push_back(
      {{"alpha", alpha}, {"beta", beta}, {"tv", tv}, {"accepted", hist.accepted}});
  return finalize(std::move(rep), t0);
}

ExperimentReport check_factorization(const std::vector<StepModelPtr>& models, long n_max,
                                     const ExperimentContext& ctx) {
  const double t0 = now_seconds();
  ExperimentReport rep;
  rep.id = "factorization";
  rep.model = "registry";
  rep.config = base_config(ctx);
  rep.config["n_max"] = n_max;
  rep.thresholds = {{"residual_bound", 1e-9}};
  for (const auto& model : models) {
    std::vector<double> pmf_minus, pmf_plus;
    if (model->is_lattice()) {
      const auto seq = positivity_from_dp(*model, n_max);
      const auto wh = wh_input_from_dp(seq, model->tail.left_mass_q);
      pmf_minus = tau_pmf_from_positivity(wh.q_minus, static_cast<std::size_t>(n_max),
                                          LadderSign::minus);
      pmf_plus =
          tau_pmf_from_positivity(wh.q_plus, static_cast<std::size_t>(n_max), LadderSign::plus);
    } else {
      std::vector<double> q(static_cast<std::size_t>(n_max) + 1, 0.5);
      pmf_minus = tau_pmf_from_positivity(q, static_cast<std::size_t>(n_max), LadderSign::minus);
      pmf_plus = pmf_minus;
    }
    const double resid =
        verify_factorization(pmf_plus, pmf_minus, static_cast<std::size_t>(n_max));
    rep.rows.push_back({{"model", model->name}, {"residual", resid}, {"order", n_max}});
  }
  return finalize(std::move(rep), t0);
}

// ---------------------------------------------------------------------------
// files
// ---------------------------------------------------------------------------

namespace {
std::string sanitize(const std::string& s) {
  std::string out = s;
  for (auto& c : out)
    if (c == ':' || c == '/' || c == '@' || c == ' ') c = '-';
  return out;
}
}  // namespace

void write_report_files(const ExperimentReport& report, const std::string& out_dir,
                        const std::string& format) {
  std::filesystem::create_directories(out_dir);
  const std::string stem = report.id + "_" + sanitize(report.model);
  if (format == "json" || format == "both") {
    std::ofstream os(out_dir + "/" + stem + ".json");
    os << report.to_json().dump(2) << '\n';
  }
  if (format == "csv" || format == "both") {
    std::ofstream os(out_dir + "/" + stem + ".csv");
    report.write_csv(os);
  }
}

int exit_code_for(const std::string& verdict) {
  if (verdict == "pass") return 0;
  if (verdict == "fail") return 2;
  return 3;
}

int aggregate_reports(const std::string& dir, std::ostream& out) {
  bool any_fail = false, any_inconclusive = false, any = false;
  out << "experiment,model,verdict,recomputed,wall_clock_s\n";
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    std::ifstream is(path);
    json j;
    try {
      is >> j;
    } catch (const std::exception&) {
      continue;
    }
    if (!j.contains("experiment") || !j.contains("rows")) continue;
    any = true;
    const std::string verdict = j.value("verdict", "inconclusive");
    std::string recomputed = "?";
    try {
      recomputed = verdict_from_rows(j["experiment"], j["rows"], j["thresholds"]);
    } catch (const std::exception&) {}
    out << j["experiment"].get<std::string>() << ',' << j.value("model", "?") << ',' << verdict
        << ',' << recomputed << ',' << j.value("wall_clock_s", 0.0) << '\n';
    if (verdict == "fail" || recomputed == "fail") any_fail = true;
    else if (verdict == "inconclusive") any_inconclusive = true;
  }
  if (!any) {
    out << "(no reports found)\n";
    return 3;
  }
  if (any_fail) return 2;
  if (any_inconclusive) return 3;
  return 0;
}

}  // namespace fluct
