#ifndef FLUCT_EXPERIMENTS_HPP
#define FLUCT_EXPERIMENTS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "fluct/step_models.hpp"

namespace fluct {

/// Versioned desk-scale tolerance table; every report echoes the values used.
struct TolProfile {
  std::string name = "default";
  double llt_normal_err = 0.02;
  double llt_normal_err_mc = 0.10;
  double llt_small_dev = 0.10;
  double llt_small_dev_mc = 0.20;
  double tau_lattice_lo = 0.90, tau_lattice_hi = 1.10;
  double tau_cont_lo = 0.98, tau_cont_hi = 1.02;
  double meander_sup_normal = 5e-3;
  double exponent_tol_normal = 0.05;
  double exponent_tol_heavy = 0.10;
  double identity_band = 0.30;
  double tv_alpha2 = 0.08;
  double tv_heavy = 0.12;
  double qosc_spread_factor = 0.99;

  static TolProfile get(const std::string& name);  // "default" | "strict"
  nlohmann::json to_json() const;
};

/// A finished experiment: metric rows plus the thresholds that judged them.
/// The verdict is a pure function of (id, rows, thresholds) and can be
/// recomputed from the report alone.
struct ExperimentReport {
  int schema_version = 1;
  std::string id;
  std::string model;
  nlohmann::json config;      // seed, workers, n list, profile name, ...
  nlohmann::json thresholds;  // numeric thresholds used
  nlohmann::json rows = nlohmann::json::array();
  std::string verdict;  // pass | fail | inconclusive
  double wall_clock = 0.0;

  nlohmann::json to_json() const;
  /// identical across reruns with the same (config, seed): volatile fields zeroed
  std::string canonical_json() const;
  void write_csv(std::ostream& out) const;
};

/// pass | fail | inconclusive from the stored rows and thresholds.
std::string verdict_from_rows(const std::string& id, const nlohmann::json& rows,
                              const nlohmann::json& thresholds);

struct ExperimentContext {
  std::uint64_t seed = 1;
  int workers = 1;
  TolProfile tol;
};

/// Conditional local limit theorem in the bulk: E(n) = sup_x |c_n P(S_n = an+x
/// | tau^- > n) - h p((an+x)/c_n)| against the limit density.
ExperimentReport check_llt_normal(StepModelPtr model, std::vector<long> n_list,
                                  const ExperimentContext& ctx);

/// Small-deviation ratio against g(0) H(x) / (n P(tau^- > n)) for positions
/// x <= c_n^window_exp.
ExperimentReport check_llt_small(StepModelPtr model, std::vector<long> n_list, double window_exp,
                                 const ExperimentContext& ctx);

/// Ladder-epoch ratio laws r+-(n) = n P(tau=n) / (rho-normalized tail).
ExperimentReport check_tau_local(StepModelPtr model, long n_max, const ExperimentContext& ctx);

/// Oscillation of Q_n^- over residue classes of a (1,a)-lattice model.
ExperimentReport check_q_oscillation(StepModelPtr model, long n_max,
                                     const ExperimentContext& ctx);

/// Negative-moment identity E(M)^{-alpha} = alpha(1-rho)/(q(2-alpha)).
ExperimentReport check_identity(StepModelPtr model, std::vector<long> n_list,
                                std::uint64_t target_accepted, const ExperimentContext& ctx);

/// Meander fixed point and small-z exponent for stable parameters.
ExperimentReport check_meander_params(double alpha, double beta, const ExperimentContext& ctx);
/// Meander histogram of a model against the reference density.
ExperimentReport check_meander_model(StepModelPtr model, long n, std::uint64_t target_accepted,
                                     const ExperimentContext& ctx);

/// Wiener-Hopf factorization residual over a model list.
ExperimentReport check_factorization(const std::vector<StepModelPtr>& models, long n_max,
                                     const ExperimentContext& ctx);

/// Writes <out_dir>/<id>_<model>.json and/or .csv ("json", "csv", "both").
void write_report_files(const ExperimentReport& report, const std::string& out_dir,
                        const std::string& format);

/// Reads *.json reports in dir, prints a summary table, recomputes verdicts.
/// Returns the CLI exit code: 0 all pass, 2 any fail, 3 inconclusive only.
int aggregate_reports(const std::string& dir, std::ostream& out);

/// Exit code for a single report.
int exit_code_for(const std::string& verdict);

}  // namespace fluct

#endif
