#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "pcflow/harness.hpp"

using namespace pcflow;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// small fast sweep configuration shared by the orchestration tests
SweepConfig mini_config(int n = 24) {
  SweepConfig c = parse_config("{}");
  c.nx = c.ny = n;
  c.eps = {5e-2, 2e-2, 1e-2, 5e-3};
  return c;
}

}  // namespace

TEST_CASE("config parsing: defaults and overrides") {
  SweepConfig c = parse_config("{}");
  CHECK(c.nx == 128);
  CHECK(c.eps.size() == 7);
  CHECK(c.eps.front() == doctest::Approx(1e-1));
  CHECK(c.eps.back() == doctest::Approx(1e-3));
  CHECK(c.lambda_frac == doctest::Approx(0.5));
  CHECK(c.data_exprs.at("a4") == "0");

  SweepConfig d = parse_config(R"json({
    "grid": {"nx": 32, "ny": 48, "L": 0.5},
    "params": {"alpha2": 0.0, "sigma": 0.3},
    "boundary_data": {"a1": "y*(2-y)", "lambda_frac": 0.25},
    "sweep": {"eps": [1e-2, 1e-3], "workers": 3, "picard_tol": 1e-8},
    "output": {"dir": "results", "dump_fields": true}
  })json");
  CHECK(d.nx == 32);
  CHECK(d.ny == 48);
  CHECK(d.L == doctest::Approx(0.5));
  CHECK(d.alpha2 == 0.0);
  CHECK(d.sigma == doctest::Approx(0.3));
  CHECK(d.data_exprs.at("a1") == "y*(2-y)");
  CHECK(d.lambda_frac == doctest::Approx(0.25));
  CHECK(d.eps == std::vector<double>{1e-2, 1e-3});
  CHECK(d.workers == 3);
  CHECK(d.picard.tol == doctest::Approx(1e-8));
  CHECK(d.out_dir == "results");
  CHECK(d.dump_fields);
  CHECK(!d.config_echo.empty());
}

TEST_CASE("config parsing: rejects malformed documents") {
  CHECK_THROWS_AS(parse_config("not json"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"json({"sweep": {"eps": []}})json"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"json({"sweep": {"eps": [1e-3, 1e-2]}})json"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"json({"sweep": {"eps": [2.0]}})json"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"json({"sweep": {"workers": 0}})json"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"json({"grid": {"nx": 4}})json"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"json({"boundary_data": {"a1": "tan(x)"}})json"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"json({"boundary_data": {"lambda_frac": 0}})json"),
                  std::invalid_argument);
}

TEST_CASE("power law fitting") {
  std::vector<double> eps = {1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3};
  std::vector<double> v1, v2, zero(eps.size(), 0.0);
  for (double e : eps) {
    v1.push_back(3.0 * std::pow(e, 0.6));
    v2.push_back(std::pow(e, 0.5) * (1.0 + 0.1 * std::sin(std::log(e))));
  }
  RateFit f1 = fit_powerlaw("exact", eps, v1, 0.6);
  CHECK(f1.slope == doctest::Approx(0.6).epsilon(1e-9));
  CHECK(f1.scale == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(f1.ci < 1e-9);
  CHECK(f1.points == 7);

  RateFit f2 = fit_powerlaw("wobble", eps, v2, 0.5);
  CHECK(std::fabs(f2.slope - 0.5) < 0.05);
  CHECK(f2.ci > 0.0);

  RateFit fz = fit_powerlaw("null", eps, zero, 1.0);
  CHECK(fz.zero);
  CHECK(fz.pass);

  std::vector<double> short_e = {1e-1, 1e-2, 1e-3};
  std::vector<double> short_v = {1.0, 0.1, 0.01};
  CHECK_THROWS_AS(fit_powerlaw("short", short_e, short_v, 1.0),
                  std::invalid_argument);
}

TEST_CASE("boundary data construction scales to the gate fraction") {
  SweepConfig c = mini_config();
  Grid g(c.nx, c.ny, c.L);
  FlowParams p = FlowParams::make(1e-2, c.gamma, c.alpha0, c.alpha1, c.alpha2,
                                  c.sigma, c.delta, std::pow(1e-2, c.eta_exp));
  BoundaryData bd = build_boundary_data(c, g, p);
  const double target = 0.5 * std::pow(1e-2, 0.5 + c.sigma);
  CHECK(lambda_norm(bd, p) == doctest::Approx(target).epsilon(1e-12));

  for (auto& [name, expr] : c.data_exprs) expr = "0";
  BoundaryData bz = build_boundary_data(c, g, p);
  CHECK(lambda_norm(bz, p) == 0.0);
}

TEST_CASE("couette sweep: every gap quantity vanishes") {
  SweepConfig c = mini_config(20);
  c.alpha2 = 0.0;
  for (auto& [name, expr] : c.data_exprs) expr = "0";
  SweepResult res = run_sweep(c);
  REQUIRE(res.points.size() == 4);
  for (const PointResult& p : res.points) {
    REQUIRE(p.ok);
    CHECK(p.values.at("rho_gap") < 1e-12);
    CHECK(p.values.at("u_gap") < 1e-12);
    CHECK(p.values.at("v_gap") < 1e-12);
    CHECK(p.values.at("grad_u_gap") < 1e-11);
    CHECK(p.values.at("picard_iters") == 1.0);
  }
  for (const RateFit& f : res.fits) {
    CHECK(f.zero);
    CHECK(f.pass);
  }
}

TEST_CASE("sweep with data: fits, report files, determinism") {
  SweepConfig c = mini_config();
  c.workers = 2;
  SweepResult res = run_sweep(c);
  for (const PointResult& p : res.points) {
    REQUIRE_MESSAGE(p.ok, p.skip_reason);
    CHECK(p.values.at("contraction_max") < 1.0);
    CHECK(p.values.at("envelope_ratio") <= 1.0);
    CHECK(p.audits.size() == 12);
  }
  bool saw_rho = false;
  for (const RateFit& f : res.fits) {
    CHECK(f.points == 4);
    CHECK(std::isfinite(f.slope));
    if (f.name == "rho_gap") {
      saw_rho = true;
      CHECK(f.slope > 0.85);  // coarse-grid reading of the target rate 1
    }
  }
  CHECK(saw_rho);

  namespace fs = std::filesystem;
  const fs::path d1 = "harness_out_a", d2 = "harness_out_b";
  emit_report(res, d1.string());
  for (const char* name :
       {"sweep.csv", "audits.csv", "plots.gp", "summary.json"})
    CHECK(fs::exists(d1 / name));
  CHECK(slurp(d1 / "sweep.csv").rfind("name,eps,eta,L,grid,value\n", 0) == 0);
  CHECK(slurp(d1 / "audits.csv").rfind("name,eps,eta,L,p,lhs,rhs,constant\n",
                                       0) == 0);

  // a repeated sweep reproduces the artifacts byte for byte
  SweepResult res2 = run_sweep(c);
  emit_report(res2, d2.string());
  for (const char* name :
       {"sweep.csv", "audits.csv", "plots.gp", "summary.json"})
    CHECK(slurp(d1 / name) == slurp(d2 / name));
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("injected failure is isolated to its point") {
  SweepConfig c = mini_config(20);
  SweepResult clean = run_sweep(c);
  c.inject_fail_eps = c.eps[1];
  SweepResult faulty = run_sweep(c);
  REQUIRE(faulty.points.size() == clean.points.size());
  for (size_t k = 0; k < clean.points.size(); ++k) {
    if (k == 1) {
      CHECK_FALSE(faulty.points[k].ok);
      CHECK(faulty.points[k].skip_reason == "injected failure");
    } else {
      REQUIRE(faulty.points[k].ok);
      CHECK(faulty.points[k].values == clean.points[k].values);
    }
  }
  // three good points are below the fitting minimum: fits report no pass
  for (const RateFit& f : faulty.fits) {
    CHECK(f.points == 3);
    if (f.target > 0.0) CHECK_FALSE(f.pass);
  }
}

TEST_CASE("lambda gate above one skips the point") {
  SweepConfig c = mini_config(16);
  c.lambda_frac = 2.0;
  PointResult r = run_point(c, 1e-2);
  CHECK_FALSE(r.ok);
  CHECK(r.skip_reason.find("lambda gate") != std::string::npos);
}

TEST_CASE("solve dump round trip preserves the audits") {
  SweepConfig c = mini_config(20);
  SolveDump dump;
  PointResult r = run_point(c, 1e-2, &dump);
  REQUIRE(r.ok);
  const std::string path = "harness_dump.json";
  write_dump(path, dump);
  SolveDump back = read_dump(path);
  std::filesystem::remove(path);
  CHECK(back.grid->nx == 20);
  std::vector<EstimateAudit> a = audit_all(dump.out, dump.in);
  std::vector<EstimateAudit> b = audit_all(back.out, back.in);
  REQUIRE(a.size() == b.size());
  for (size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].name == b[k].name);
    CHECK(a[k].lhs == doctest::Approx(b[k].lhs).epsilon(1e-12));
    CHECK(a[k].rhs_data == doctest::Approx(b[k].rhs_data).epsilon(1e-12));
  }
}

TEST_CASE("selftest passes at the default size") {
  std::vector<SelfCheck> checks = run_selftest(24);
  CHECK(checks.size() >= 11);
  for (const SelfCheck& c : checks)
    CHECK_MESSAGE(c.pass, c.name, " value ", c.value, " outside [", c.lo, ", ",
                  c.hi, "]");
}
