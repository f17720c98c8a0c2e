// Command-line driver for the experiment suites.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fluct/experiments.hpp"
#include "fluct/step_models.hpp"

namespace {

struct CommonArgs {
  std::string model;
  std::vector<long> n_list;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out_dir;
  std::string format = "json";
  std::string tol_profile = "default";
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_model = true) {
  if (needs_model)
    cmd->add_option("--model", args.model, "registry name or model definition file")->required();
  cmd->add_option("--n", args.n_list, "n values (list)");
  cmd->add_option("--seed", args.seed, "root RNG seed");
  cmd->add_option("--workers", args.workers, "worker threads");
  cmd->add_option("--out", args.out_dir, "output directory for reports");
  cmd->add_option("--format", args.format, "csv|json|both")
      ->check(CLI::IsMember({"csv", "json", "both"}));
  cmd->add_option("--tol-profile", args.tol_profile, "default|strict")
      ->check(CLI::IsMember({"default", "strict"}));
}

fluct::ExperimentContext make_ctx(const CommonArgs& args) {
  fluct::ExperimentContext ctx;
  ctx.seed = args.seed;
  ctx.workers = args.workers;
  ctx.tol = fluct::TolProfile::get(args.tol_profile);
  return ctx;
}

int emit(const fluct::ExperimentReport& rep, const CommonArgs& args) {
  if (!args.out_dir.empty()) fluct::write_report_files(rep, args.out_dir, args.format);
  std::cout << rep.id << " " << rep.model << ": " << rep.verdict << "\n";
  for (const auto& row : rep.rows) std::cout << "  " << row.dump() << "\n";
  return fluct::exit_code_for(rep.verdict);
}

std::vector<long> default_n(const std::vector<long>& given, std::vector<long> fallback) {
  return given.empty() ? fallback : given;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fluct: local probabilities of random walks conditioned to stay positive"};
  app.require_subcommand(1);

  CommonArgs a_lltn, a_llts, a_tau, a_qosc, a_ident, a_meander, a_fact, a_report;
  double window_exp = 0.7;
  double m_alpha = 2.0, m_beta = 0.0;
  bool m_params_only = false;
  std::uint64_t ident_target = 200000, meander_target = 100000;
  std::vector<std::string> fact_models;
  std::string report_dir;

  auto* lltn = app.add_subcommand("llt-normal", "conditional local limit theorem in the bulk");
  add_common(lltn, a_lltn);
  auto* llts = app.add_subcommand("llt-small", "small-deviation local asymptotics");
  add_common(llts, a_llts);
  llts->add_option("--window-exp", window_exp, "positions up to c_n^exp");
  auto* tau = app.add_subcommand("tau-local", "ladder-epoch ratio laws");
  add_common(tau, a_tau);
  auto* qosc = app.add_subcommand("q-oscillation", "Q_n oscillation over residue classes");
  add_common(qosc, a_qosc);
  auto* ident = app.add_subcommand("identity", "negative-moment identity");
  add_common(ident, a_ident);
  ident->add_option("--target-accepted", ident_target, "accepted samples per n");
  auto* meander = app.add_subcommand("meander", "meander density fixed point / histogram");
  add_common(meander, a_meander, false);
  meander->add_option("--model", a_meander.model, "model for the histogram comparison");
  meander->add_option("--alpha", m_alpha, "stable exponent (params mode)");
  meander->add_option("--beta", m_beta, "stable skewness (params mode)");
  meander->add_flag("--params-only", m_params_only, "fixed point for (alpha,beta) only");
  meander->add_option("--target-accepted", meander_target, "accepted samples (model mode)");
  auto* fact = app.add_subcommand("factorization", "Wiener-Hopf factorization residual");
  add_common(fact, a_fact, false);
  fact->add_option("--model", fact_models, "models (repeatable)");
  auto* report = app.add_subcommand("report", "aggregate JSON reports into a summary table");
  report->add_option("--dir", report_dir, "directory of report JSON files")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (lltn->parsed()) {
      auto model = fluct::resolve_model(a_lltn.model);
      auto rep = fluct::check_llt_normal(model, default_n(a_lltn.n_list, {1024, 4096}),
                                         make_ctx(a_lltn));
      return emit(rep, a_lltn);
    }
    if (llts->parsed()) {
      auto model = fluct::resolve_model(a_llts.model);
      auto rep = fluct::check_llt_small(model, default_n(a_llts.n_list, {1024, 4096}), window_exp,
                                        make_ctx(a_llts));
      return emit(rep, a_llts);
    }
    if (tau->parsed()) {
      auto model = fluct::resolve_model(a_tau.model);
      const long n_max = a_tau.n_list.empty() ? 512 : a_tau.n_list.back();
      return emit(fluct::check_tau_local(model, n_max, make_ctx(a_tau)), a_tau);
    }
    if (qosc->parsed()) {
      auto model = fluct::resolve_model(a_qosc.model);
      const long n_max = a_qosc.n_list.empty() ? 64 : a_qosc.n_list.back();
      return emit(fluct::check_q_oscillation(model, n_max, make_ctx(a_qosc)), a_qosc);
    }
    if (ident->parsed()) {
      auto model = fluct::resolve_model(a_ident.model);
      auto rep = fluct::check_identity(model, default_n(a_ident.n_list, {32, 64, 128}),
                                       ident_target, make_ctx(a_ident));
      return emit(rep, a_ident);
    }
    if (meander->parsed()) {
      if (m_params_only || a_meander.model.empty()) {
        return emit(fluct::check_meander_params(m_alpha, m_beta, make_ctx(a_meander)), a_meander);
      }
      auto model = fluct::resolve_model(a_meander.model);
      const long n = a_meander.n_list.empty() ? 4096 : a_meander.n_list.back();
      return emit(fluct::check_meander_model(model, n, meander_target, make_ctx(a_meander)),
                  a_meander);
    }
    if (fact->parsed()) {
      if (fact_models.empty()) fact_models = {"simple-rw", "lazy-rw", "pareto:1.5"};
      std::vector<fluct::StepModelPtr> models;
      for (const auto& name : fact_models) models.push_back(fluct::resolve_model(name));
      const long n_max = a_fact.n_list.empty() ? 200 : a_fact.n_list.back();
      return emit(fluct::check_factorization(models, n_max, make_ctx(a_fact)), a_fact);
    }
    if (report->parsed()) {
      return fluct::aggregate_reports(report_dir, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
