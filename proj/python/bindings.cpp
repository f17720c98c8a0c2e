#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fluct/exact_dp.hpp"
#include "fluct/experiments.hpp"
#include "fluct/ladder.hpp"
#include "fluct/meander.hpp"
#include "fluct/montecarlo.hpp"
#include "fluct/stable.hpp"
#include "fluct/step_models.hpp"
#include "fluct/wiener_hopf.hpp"

namespace py = pybind11;
using namespace fluct;

namespace {

// pybind11 holders must be non-const; the library hands out
// shared_ptr<const StepModel>
std::shared_ptr<StepModel> unconst(StepModelPtr p) {
  return std::const_pointer_cast<StepModel>(p);
}

std::vector<double> sample_many(const StepModel& m, std::size_t count, std::uint64_t seed,
                                std::uint64_t stream) {
  RngStream rng(seed, stream);
  std::vector<double> out(count);
  for (auto& v : out) v = m.sample(rng);
  return out;
}

py::dict survival_row_dict(const SurvivalTable& t, long n) {
  const DpRow& r = t.row(n);
  py::dict d;
  d["n"] = r.n;
  d["k_lo"] = r.k_lo;
  d["probs"] = r.probs;
  d["survival"] = r.alive;
  d["mass_defect"] = r.mass_defect;
  std::vector<double> values(r.probs.size());
  for (std::size_t i = 0; i < r.probs.size(); ++i)
    values[i] = t.value(n, r.k_lo + static_cast<long long>(i));
  d["values"] = values;
  return d;
}

}  // namespace

PYBIND11_MODULE(_fluct, m) {
  m.doc() = "local probabilities of random walks conditioned to stay positive";

  m.def("admissible", &admissible, py::arg("alpha"), py::arg("beta"));
  m.def("rho_from", &rho_from, py::arg("alpha"), py::arg("beta"));
  m.def("calibrated_scale", &calibrated_scale, py::arg("alpha"));
  py::class_<StableParams>(m, "StableParams")
      .def(py::init<double, double, double>(), py::arg("alpha"), py::arg("beta"),
           py::arg("scale_c"))
      .def_property_readonly("alpha", &StableParams::alpha)
      .def_property_readonly("beta", &StableParams::beta)
      .def_property_readonly("scale_c", &StableParams::scale_c)
      .def_property_readonly("rho", &StableParams::rho)
      .def("cf", &StableParams::cf, py::arg("t"))
      .def("density", &StableParams::density, py::arg("x"))
      .def("density_at_zero", &StableParams::density_at_zero);

  py::class_<StepModel, std::shared_ptr<StepModel>>(m, "StepModel")
      .def_readonly("name", &StepModel::name)
      .def_property_readonly("is_lattice", &StepModel::is_lattice)
      .def_readonly("span_h", &StepModel::span_h)
      .def_readonly("shift_a", &StepModel::shift_a)
      .def_property_readonly("alpha", [](const StepModel& s) { return s.tail.alpha; })
      .def_property_readonly("beta", [](const StepModel& s) { return s.tail.beta; })
      .def("mu", &StepModel::mu, py::arg("u"))
      .def("cdf_leq", &StepModel::cdf_leq, py::arg("v"))
      .def("sample", &sample_many, py::arg("count"), py::arg("seed"), py::arg("stream") = 0);
  m.def(
      "model", [](const std::string& spec) { return unconst(resolve_model(spec)); },
      py::arg("spec"), "registry name (e.g. 'simple-rw', 'pareto:1.5') or a model file path");
  m.def(
      "load_model_file", [](const std::string& p) { return unconst(load_model_file(p)); },
      py::arg("path"));
  m.def(
      "scale_model",
      [](std::shared_ptr<StepModel> base, double f) { return unconst(scale_model(base, f)); },
      py::arg("model"), py::arg("factor"));
  m.def("lattice_info", [](const StepModel& s) {
    const auto info = lattice_info(s);
    py::dict d;
    d["is_lattice"] = info.is_lattice;
    d["span_h"] = info.span_h;
    d["shift_a"] = info.shift_a;
    return d;
  });
  m.def(
      "norm_c", [](std::shared_ptr<StepModel> model, long n) { return NormSeq(model).c(n); }, py::arg("model"),
      py::arg("n"));

  py::class_<SurvivalTable>(m, "SurvivalTable")
      .def(py::init([](std::shared_ptr<StepModel> model, long n_max) {
             return new SurvivalTable(model, n_max);
           }),
           py::arg("model"), py::arg("n_max"))
      .def_property_readonly("max_n", &SurvivalTable::max_n)
      .def_property_readonly("partial", &SurvivalTable::partial)
      .def("survival", &SurvivalTable::survival, py::arg("n"))
      .def("row", &survival_row_dict, py::arg("n"))
      .def("conditional_local", &SurvivalTable::conditional_local, py::arg("n"), py::arg("x"))
      .def("tau_minus_pmf", [](const SurvivalTable& t, long n_max) {
        return tau_minus_pmf_exact(t, n_max);
      });
  m.def("unconditioned_pmf", [](const StepModel& model, long n) {
    py::dict d;
    for (const auto& [k, p] : unconditioned_pmf(model, n)) d[py::int_(k)] = p;
    return d;
  });
  m.def("verify_recurrence", &verify_recurrence, py::arg("model"), py::arg("n_max"));
  m.def("verify_recurrence_rep2", &verify_recurrence_rep2, py::arg("model"), py::arg("n_max"));

  m.def("series_exp",
        [](const std::vector<double>& c) { return series_exp(PowerSeries(c)).coeffs(); });
  m.def("series_log",
        [](const std::vector<double>& c) { return series_log(PowerSeries(c)).coeffs(); });
  m.def("series_mul", [](const std::vector<double>& a, const std::vector<double>& b) {
    return series_mul(PowerSeries(a), PowerSeries(b)).coeffs();
  });
  m.def(
      "tau_pmf_from_positivity",
      [](const std::vector<double>& q, std::size_t n, const std::string& sign) {
        return tau_pmf_from_positivity(q, n,
                                       sign == "plus" ? LadderSign::plus : LadderSign::minus);
      },
      py::arg("q"), py::arg("n_max"), py::arg("sign") = "minus");
  m.def("tau_tail", &tau_tail, py::arg("pmf"), py::arg("n_max"));
  m.def("verify_factorization", &verify_factorization, py::arg("pmf_plus"), py::arg("pmf_minus"),
        py::arg("n_max"));
  m.def("positivity_from_dp", [](const StepModel& model, long n_max) {
    const auto seq = positivity_from_dp(model, n_max);
    py::dict d;
    d["leq0"] = seq.leq0;
    d["lt0"] = seq.lt0;
    d["eq0"] = seq.eq0;
    d["gt0"] = seq.gt0;
    d["defect"] = seq.defect;
    return d;
  });

  py::class_<LadderData>(m, "LadderData")
      .def_property_readonly("C0", [](const LadderData& l) { return l.C0_hat; })
      .def_property_readonly("C0_spread", [](const LadderData& l) { return l.C0_spread; })
      .def_property_readonly("g0", [](const LadderData& l) { return l.g0; })
      .def_property_readonly("descent_status",
                             [](const LadderData& l) {
                               switch (l.descent.status) {
                                 case DescentMoment::Status::finite: return "finite";
                                 case DescentMoment::Status::likely_infinite:
                                   return "likely_infinite";
                                 default: return "inconclusive";
                               }
                             })
      .def_property_readonly("descent_value",
                             [](const LadderData& l) { return l.descent.value; })
      .def_property_readonly("chi_delta", [](const LadderData& l) { return l.chi.delta; })
      .def_property_readonly("chi_probs", [](const LadderData& l) { return l.chi.probs; })
      .def_property_readonly("chi_defect", [](const LadderData& l) { return l.chi.defect; })
      .def("H", [](const LadderData& l, double u) { return l.H.at(u); })
      .def("H_low", [](const LadderData& l, double u) { return l.H.at_low(u); })
      .def("H_high", [](const LadderData& l, double u) { return l.H.at_high(u); })
      .def("small_dev_integral",
           [](const LadderData& l, double x) { return l.H.small_dev_integral(x); })
      .def("omega", [](const LadderData& l, double s) { return omega_big(l, s); })
      .def("q_n_minus", [](const LadderData& l, long n) { return q_n_minus(l, n); })
      .def("q_n_residue", [](const LadderData& l, long n) { return q_n_residue(l, n); });
  m.def(
      "build_ladder",
      [](std::shared_ptr<StepModel> model, long chi_n_max, double u_max, long survival_n) {
        LadderOptions opts;
        opts.chi_n_max = chi_n_max;
        opts.u_max = u_max;
        opts.survival_n = survival_n;
        return build_ladder(model, opts);
      },
      py::arg("model"), py::arg("chi_n_max") = 4096, py::arg("u_max") = 64.0,
      py::arg("survival_n") = 2048);
  m.def("renewal_via_duality", [](std::shared_ptr<StepModel> model, double x, long j_max) {
    SurvivalTable table(model, j_max);
    const auto iv = renewal_via_duality(table, x, j_max);
    return py::make_tuple(iv.low, iv.high);
  });

  m.def("meander_density_normal", &meander_density_normal, py::arg("x"));
  m.def("default_meander_grid", &default_meander_grid, py::arg("z_max") = 6.0);
  m.def(
      "meander_fixed_point",
      [](double alpha, double beta, int max_iters, double tol) {
        const StableParams params(alpha, beta, calibrated_scale(alpha));
        const auto d = meander_fixed_point(params, default_meander_grid(), max_iters, tol);
        py::dict out;
        out["z"] = d.z;
        out["p"] = d.p;
        out["converged"] = d.converged;
        out["iterations"] = d.iterations;
        out["residual"] = d.residual;
        return out;
      },
      py::arg("alpha"), py::arg("beta"), py::arg("max_iters") = 60, py::arg("tol") = 1e-4);
  m.def(
      "small_z_exponent",
      [](const std::vector<double>& z, const std::vector<double>& p, double lo, double hi) {
        MeanderDensity d;
        d.z = z;
        d.p = p;
        return small_z_exponent(d, lo, hi);
      },
      py::arg("z"), py::arg("p"), py::arg("z_lo"), py::arg("z_hi"));

  m.def(
      "simulate_conditioned",
      [](std::shared_ptr<StepModel> model, long n, std::uint64_t target, std::uint64_t seed, int workers) {
        const auto s = simulate_conditioned(model, n, target, McOptions{seed, workers});
        py::dict d;
        d["terminal"] = s.terminal;
        d["survival"] = s.survival.value;
        d["survival_se"] = s.survival.std_err;
        d["trials"] = s.trials;
        return d;
      },
      py::arg("model"), py::arg("n"), py::arg("target_accepted"), py::arg("seed") = 1,
      py::arg("workers") = 1);
  m.def(
      "meander_hist",
      [](std::shared_ptr<StepModel> model, long n, int bins, std::uint64_t target,
         std::uint64_t seed, int workers, double z_max) {
        const auto h = meander_hist(model, n, bins, target, McOptions{seed, workers}, z_max);
        py::dict d;
        d["edges"] = h.edges;
        d["density"] = h.density;
        d["std_err"] = h.std_err;
        d["accepted"] = h.accepted;
        d["overflow"] = h.overflow;
        return d;
      },
      py::arg("model"), py::arg("n"), py::arg("bins"), py::arg("target_accepted"),
      py::arg("seed") = 1, py::arg("workers") = 1, py::arg("z_max") = 6.0);
  m.def(
      "estimate_negative_moment",
      [](std::shared_ptr<StepModel> model, long n, double alpha_exp, std::uint64_t target,
         std::uint64_t seed, int workers) {
        const auto est =
            estimate_negative_moment(model, n, alpha_exp, target, McOptions{seed, workers});
        py::dict d;
        d["value"] = est.value;
        d["std_err"] = est.std_err;
        d["n_samples"] = est.n_samples;
        return d;
      },
      py::arg("model"), py::arg("n"), py::arg("alpha_exp"), py::arg("target_accepted"),
      py::arg("seed") = 1, py::arg("workers") = 1);
  m.def(
      "positivity_sequence",
      [](std::shared_ptr<StepModel> model, long n_max, std::uint64_t paths, std::uint64_t seed,
         int workers) {
        const auto est = positivity_sequence(model, n_max, paths, McOptions{seed, workers});
        py::dict d;
        d["q"] = est.q;
        d["se"] = est.se;
        return d;
      },
      py::arg("model"), py::arg("n_max"), py::arg("paths"), py::arg("seed") = 1,
      py::arg("workers") = 1);
  m.def(
      "conditional_jump_law",
      [](std::shared_ptr<StepModel> model, long n, std::uint64_t target, std::uint64_t seed,
         int workers, double z_max) {
        const auto h = conditional_jump_law(model, n, target, McOptions{seed, workers}, z_max);
        py::dict d;
        d["edges"] = h.edges;
        d["density"] = h.density;
        d["std_err"] = h.std_err;
        d["accepted"] = h.accepted;
        d["overflow"] = h.overflow;
        d["flagged"] = h.flagged;
        return d;
      },
      py::arg("model"), py::arg("n"), py::arg("target_hits"), py::arg("seed") = 1,
      py::arg("workers") = 1, py::arg("z_max") = 8.0);

  auto run_json = [](const ExperimentReport& rep) { return rep.to_json().dump(); };
  m.def(
      "check_llt_normal",
      [run_json](std::shared_ptr<StepModel> model, std::vector<long> n_list, std::uint64_t seed, int workers,
                 const std::string& profile) {
        ExperimentContext ctx{seed, workers, TolProfile::get(profile)};
        return run_json(check_llt_normal(model, std::move(n_list), ctx));
      },
      py::arg("model"), py::arg("n_list"), py::arg("seed") = 1, py::arg("workers") = 1,
      py::arg("tol_profile") = "default");
  m.def(
      "check_llt_small",
      [run_json](std::shared_ptr<StepModel> model, std::vector<long> n_list, double window_exp,
                 std::uint64_t seed, int workers, const std::string& profile) {
        ExperimentContext ctx{seed, workers, TolProfile::get(profile)};
        return run_json(check_llt_small(model, std::move(n_list), window_exp, ctx));
      },
      py::arg("model"), py::arg("n_list"), py::arg("window_exp") = 0.7, py::arg("seed") = 1,
      py::arg("workers") = 1, py::arg("tol_profile") = "default");
  m.def(
      "check_tau_local",
      [run_json](std::shared_ptr<StepModel> model, long n_max, std::uint64_t seed, int workers,
                 const std::string& profile) {
        ExperimentContext ctx{seed, workers, TolProfile::get(profile)};
        return run_json(check_tau_local(model, n_max, ctx));
      },
      py::arg("model"), py::arg("n_max"), py::arg("seed") = 1, py::arg("workers") = 1,
      py::arg("tol_profile") = "default");
  m.def(
      "check_q_oscillation",
      [run_json](std::shared_ptr<StepModel> model, long n_max, std::uint64_t seed, int workers,
                 const std::string& profile) {
        ExperimentContext ctx{seed, workers, TolProfile::get(profile)};
        return run_json(check_q_oscillation(model, n_max, ctx));
      },
      py::arg("model"), py::arg("n_max") = 64, py::arg("seed") = 1, py::arg("workers") = 1,
      py::arg("tol_profile") = "default");
  m.def(
      "check_identity",
      [run_json](std::shared_ptr<StepModel> model, std::vector<long> n_list, std::uint64_t target,
                 std::uint64_t seed, int workers, const std::string& profile) {
        ExperimentContext ctx{seed, workers, TolProfile::get(profile)};
        return run_json(check_identity(model, std::move(n_list), target, ctx));
      },
      py::arg("model"), py::arg("n_list"), py::arg("target_accepted") = 200000,
      py::arg("seed") = 1, py::arg("workers") = 1, py::arg("tol_profile") = "default");
  m.def(
      "check_meander_params",
      [run_json](double alpha, double beta, std::uint64_t seed, const std::string& profile) {
        ExperimentContext ctx{seed, 1, TolProfile::get(profile)};
        return run_json(check_meander_params(alpha, beta, ctx));
      },
      py::arg("alpha"), py::arg("beta"), py::arg("seed") = 1, py::arg("tol_profile") = "default");
  m.def(
      "check_meander_model",
      [run_json](std::shared_ptr<StepModel> model, long n, std::uint64_t target, std::uint64_t seed,
                 int workers, const std::string& profile) {
        ExperimentContext ctx{seed, workers, TolProfile::get(profile)};
        return run_json(check_meander_model(model, n, target, ctx));
      },
      py::arg("model"), py::arg("n"), py::arg("target_accepted") = 100000, py::arg("seed") = 1,
      py::arg("workers") = 1, py::arg("tol_profile") = "default");
  m.def(
      "check_factorization",
      [run_json](const std::vector<std::string>& names, long n_max, std::uint64_t seed,
                 const std::string& profile) {
        std::vector<StepModelPtr> models;
        for (const auto& n : names) models.push_back(resolve_model(n));
        ExperimentContext ctx{seed, 1, TolProfile::get(profile)};
        return run_json(check_factorization(models, n_max, ctx));
      },
      py::arg("models"), py::arg("n_max") = 200, py::arg("seed") = 1,
      py::arg("tol_profile") = "default");

  m.attr("__version__") = "0.1.0";
}
