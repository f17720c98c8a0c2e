#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fluct/experiments.hpp"
#include "fluct/stable.hpp"

using namespace fluct;

namespace {
ExperimentContext ctx_with(std::uint64_t seed = 1) {
  ExperimentContext ctx;
  ctx.seed = seed;
  ctx.tol = TolProfile::get("default");
  return ctx;
}
}  // namespace

TEST_CASE("tolerance profiles") {
  const auto def = TolProfile::get("default");
  const auto strict = TolProfile::get("strict");
  CHECK(strict.llt_normal_err < def.llt_normal_err);
  CHECK(strict.identity_band < def.identity_band);
  CHECK_THROWS_AS(TolProfile::get("loose"), std::invalid_argument);
}

TEST_CASE("verdict is a pure function of rows and thresholds") {
  const auto rep = check_factorization({make_simple_rw(), make_lazy_rw()}, 64, ctx_with());
  CHECK(rep.verdict == "pass");
  CHECK(verdict_from_rows(rep.id, rep.rows, rep.thresholds) == rep.verdict);
  // round trip through JSON
  const auto j = nlohmann::json::parse(rep.to_json().dump());
  CHECK(verdict_from_rows(j["experiment"], j["rows"], j["thresholds"]) == rep.verdict);
}

TEST_CASE("reports are reproducible bit-for-bit") {
  const auto a = check_llt_normal(make_simple_rw(), {64, 128}, ctx_with(99));
  const auto b = check_llt_normal(make_simple_rw(), {64, 128}, ctx_with(99));
  CHECK(a.canonical_json() == b.canonical_json());
  // the volatile wall clock is excluded from the identity
  CHECK(a.to_json().contains("wall_clock_s"));
}

TEST_CASE("llt experiments on small inputs") {
  const auto rep = check_llt_normal(make_lazy_rw(), {256, 1024}, ctx_with());
  CHECK(rep.verdict == "pass");
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.rows[1]["E"].get<double>() < rep.rows[0]["E"].get<double>());

  const auto small = check_llt_small(make_lazy_rw(), {256, 1024}, 0.7, ctx_with());
  CHECK(small.verdict == "pass");
}

TEST_CASE("tau-local verdict modes") {
  const auto lazy = check_tau_local(make_lazy_rw(), 512, ctx_with());
  CHECK(lazy.thresholds["mode"] == "band");
  CHECK(lazy.verdict == "pass");
  const auto simple = check_tau_local(make_simple_rw(), 512, ctx_with());
  CHECK(simple.thresholds["mode"] == "stabilize");
  CHECK(simple.verdict == "pass");
  bool found_zero_row = false;
  for (const auto& r : simple.rows)
    if (r.contains("odd_zero_max")) {
      found_zero_row = true;
      CHECK(r["odd_zero_max"].get<double>() == 0.0);
    }
  CHECK(found_zero_row);
  const auto cont = check_tau_local(make_gaussian(), 200, ctx_with());
  CHECK(cont.verdict == "pass");
}

TEST_CASE("q-oscillation cluster structure") {
  const auto two = check_q_oscillation(scale_model(make_simple_rw(), 0.5), 64, ctx_with());
  CHECK(two.verdict == "pass");
  long zeros = 0;
  for (const auto& r : two.rows)
    if (r.contains("Q") && r["Q"].get<double>() == 0.0) ++zeros;
  CHECK(zeros == 1);

  const auto three = check_q_oscillation(make_shift_lattice(Rational(1, 3)), 64, ctx_with());
  CHECK(three.verdict == "pass");
  for (const auto& r : three.rows)
    if (r.contains("clusters")) CHECK(r["clusters"].get<long>() == 3);

  const auto degenerate = check_q_oscillation(make_lazy_rw(), 64, ctx_with());
  CHECK(degenerate.verdict == "pass");
  CHECK_THROWS_AS(check_q_oscillation(make_pareto_sym(1.5, 512), 64, ctx_with()),
                  std::domain_error);
}

TEST_CASE("identity experiment trends") {
  auto pareto = make_pareto_sym(1.5);
  const auto rep = check_identity(pareto, {16, 32}, 30000, ctx_with());
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.rows[0]["target"].get<double>() == doctest::Approx(3.0));
  CHECK(rep.rows[1]["distance"].get<double>() < rep.rows[0]["distance"].get<double>());
  CHECK_THROWS_AS(check_identity(make_simple_rw(), {16}, 1000, ctx_with()), std::domain_error);
  // asymmetric target from the formula: alpha(1-rho)/(q(2-alpha))
  auto asym = make_pareto_asym(1.5, 0.75);
  const auto rep2 = check_identity(asym, {16}, 20000, ctx_with());
  const double rho = rho_from(1.5, 0.5);
  CHECK(rep2.rows[0]["target"].get<double>() ==
        doctest::Approx(1.5 * (1 - rho) / (0.25 * 0.5)).epsilon(1e-12));
}

TEST_CASE("meander experiments") {
  const auto params = check_meander_params(2.0, 0.0, ctx_with());
  CHECK(params.verdict == "pass");
  const auto cauchy = check_meander_params(1.0, 0.0, ctx_with());
  CHECK(cauchy.verdict == "inconclusive");
  const auto hist = check_meander_model(make_simple_rw(), 1024, 40000, ctx_with());
  CHECK(hist.verdict == "pass");
  CHECK(hist.rows[0]["tv"].get<double>() < 0.05);
  // heavy-tailed model against its fixed-point density
  const auto pareto = check_meander_model(make_pareto_sym(1.5), 512, 100000, ctx_with());
  CHECK(pareto.verdict == "pass");
  CHECK(pareto.rows[0]["tv"].get<double>() < 0.12);
}

TEST_CASE("report files and aggregation") {
  const std::string dir = "test_reports_tmp";
  std::filesystem::remove_all(dir);
  const auto rep = check_factorization({make_simple_rw()}, 32, ctx_with());
  write_report_files(rep, dir, "both");
  CHECK(std::filesystem::exists(dir + "/factorization_registry.json"));
  CHECK(std::filesystem::exists(dir + "/factorization_registry.csv"));

  std::ostringstream table;
  const int code = aggregate_reports(dir, table);
  CHECK(code == 0);
  CHECK(table.str().find("factorization,registry,pass,pass") != std::string::npos);

  // a failing report drives the exit code to 2
  ExperimentReport fake = rep;
  fake.id = "factorization";
  fake.model = "fake";
  fake.rows = nlohmann::json::array({{{"model", "fake"}, {"residual", 1.0}, {"order", 32}}});
  fake.verdict = verdict_from_rows(fake.id, fake.rows, fake.thresholds);
  CHECK(fake.verdict == "fail");
  write_report_files(fake, dir, "json");
  std::ostringstream table2;
  CHECK(aggregate_reports(dir, table2) == 2);
  std::filesystem::remove_all(dir);
}

TEST_CASE("csv schema is fixed per experiment") {
  const auto rep = check_llt_normal(make_lazy_rw(), {64}, ctx_with());
  std::ostringstream os;
  rep.write_csv(os);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header == "n,E,max_se");
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for("pass") == 0);
  CHECK(exit_code_for("fail") == 2);
  CHECK(exit_code_for("inconclusive") == 3);
}
