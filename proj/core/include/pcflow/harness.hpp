#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "pcflow/estimates.hpp"
#include "pcflow/picard.hpp"

namespace pcflow {

// One sweep definition: grid, physics, shape-only boundary profiles and
// the output layout. Boundary profiles are rescaled per point so the
// admissibility norm sits at lambda_frac of the smallness gate.
struct SweepConfig {
  int nx = 128, ny = 128;
  double L = 0.25;
  double gamma = 1.4, alpha0 = 1.0, alpha1 = 1.0, alpha2 = 0.5;
  double sigma = 0.2, delta = 0.05;
  double eta_exp = 0.55;  // eta = eps^eta_exp
  std::map<std::string, std::string> data_exprs;  // a1..a4, h0, b0, b1
  double lambda_frac = 0.5;
  std::vector<double> eps;  // strictly decreasing
  int workers = 1;
  double rho_slope_min = 0.85;
  double gap_slope_min = 0.425;
  PicardOptions picard;
  std::string out_dir = "out";
  bool dump_fields = false;
  double inject_fail_eps = 0.0;  // test hook: forces one point to fail
  std::string config_echo;       // normalized form of the parsed document
};

// Throws std::invalid_argument on malformed or inconsistent documents.
SweepConfig parse_config(const std::string& json_text);
SweepConfig load_config(const std::string& path);

// Profiles sampled from the expressions and rescaled to the gate fraction.
BoundaryData build_boundary_data(const SweepConfig& cfg, const Grid& g,
                                 const FlowParams& p);

struct PointResult {
  double eps = 0.0, eta = 0.0;
  bool ok = false;
  std::string skip_reason;
  std::map<std::string, double> values;
  std::vector<EstimateAudit> audits;
};

struct RateFit {
  std::string name;
  double slope = 0.0;
  double ci = 0.0;      // twice the standard error of the slope
  double scale = 0.0;   // fitted prefactor exp(intercept)
  double target = 0.0;  // 0 means reported without a gate
  int points = 0;
  bool zero = false;  // quantity vanished identically
  bool pass = false;
};

struct SweepResult {
  SweepConfig cfg;
  std::vector<PointResult> points;
  std::vector<RateFit> fits;
};

// Final linearized solve of a point, kept alive for audits and dumps.
struct SolveDump {
  std::unique_ptr<Grid> grid;
  LinearInput in;
  LinearOutput out;
};

PointResult run_point(const SweepConfig& cfg, double eps,
                      SolveDump* dump = nullptr);

SweepResult run_sweep(const SweepConfig& cfg);

// Log-log least squares through the positive values. Throws
// std::invalid_argument below 4 usable points unless all values vanish.
RateFit fit_powerlaw(const std::string& name, const std::vector<double>& eps,
                     const std::vector<double>& vals, double target);

std::vector<RateFit> fit_rates(const std::vector<PointResult>& pts,
                               const SweepConfig& cfg);

// Writes sweep.csv, audits.csv, plots.gp and summary.json under out_dir.
void emit_report(const SweepResult& res, const std::string& out_dir);

void write_dump(const std::string& path, const SolveDump& d);
SolveDump read_dump(const std::string& path);

struct SelfCheck {
  std::string name;
  double value = 0.0;
  double lo = 0.0, hi = 0.0;
  bool pass = false;
};

// Manufactured-solution order checks and exact-zero oracles at base size n.
std::vector<SelfCheck> run_selftest(int n = 24);

}  // namespace pcflow
