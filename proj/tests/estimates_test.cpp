#include <cmath>
#include <set>

#include "doctest.h"
#include "pcflow/estimates.hpp"
#include "pcflow/norms.hpp"

using namespace pcflow;

namespace {

ScalarField sample(const Grid& g, double (*f)(double, double)) {
  ScalarField out(g);
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) out.at(i, j) = f(g.x(i), g.y(j));
  return out;
}

FlowParams default_params(double eps = 1e-2) {
  return FlowParams::make(eps, 1.4, 1.0, 1.0, 0.5, 0.2, 0.05, 0.0);
}

LinearInput smooth_input(const Grid& g, const FlowParams& p) {
  LinearInput in;
  in.params = p;
  in.ueps = VectorField(g);
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) in.ueps.u.at(i, j) = eval_us(p, g.y(j));
  in.g0 = sample(g, [](double x, double y) {
    return 0.3 * std::sin(2.0 * x) * std::cos(0.8 * y);
  });
  in.g.u = sample(g, [](double x, double y) {
    return std::cos(3.0 * x) * (1.0 + 0.2 * y) + 0.1 * y * y;
  });
  in.g.v = sample(g, [](double x, double y) {
    return 0.5 * std::sin(1.3 * y + 0.4) + 0.2 * x;
  });
  return in;
}

}  // namespace

TEST_CASE("zero data makes every audit vacuous") {
  Grid g(24, 24, 0.25);
  FlowParams p = default_params();
  LinearInput in = smooth_input(g, p);
  in.g0 = ScalarField(g);
  in.g.u = ScalarField(g);
  in.g.v = ScalarField(g);
  LinearOutput sol = solve_linear(in);
  for (const EstimateAudit& a : audit_all(sol, in)) {
    CHECK(a.vacuous);
    CHECK(a.lhs < 1e-9);
    CHECK(a.implied_constant == 0.0);
  }
}

TEST_CASE("smooth data yields finite audits with positive constants") {
  Grid g(32, 32, 0.25);
  FlowParams p = default_params();
  LinearInput in = smooth_input(g, p);
  LinearOutput sol = solve_linear(in);
  std::vector<EstimateAudit> audits = audit_all(sol, in);
  CHECK(audits.size() == 12);
  std::set<std::string> names;
  for (const EstimateAudit& a : audits) {
    names.insert(a.name + (a.p == 4.0 ? "_p4" : ""));
    CHECK(std::isfinite(a.lhs));
    CHECK(std::isfinite(a.rhs_data));
    CHECK(a.lhs >= 0.0);
    CHECK(a.rhs_data > 0.0);
    CHECK_FALSE(a.vacuous);
    CHECK(a.implied_constant > 0.0);
    CHECK(a.eps == p.eps);
    CHECK(a.eta == p.eta);
    CHECK(a.L == 0.25);
  }
  CHECK(names.size() == 12);  // each inequality reported once
  // both exponents of the density estimate are present
  CHECK(names.count("Lem2.12") == 1);
  CHECK(names.count("Lem2.12_p4") == 1);
}

TEST_CASE("weighted norms are dominated by unweighted ones") {
  Grid g(40, 28, 0.25);
  ScalarField f = sample(g, [](double x, double y) {
    return std::sin(3.0 * x + 0.5) * std::cos(2.0 * y) + x * y;
  });
  // (L - x) <= L on the strip, so the weighted norm obeys the same bound
  CHECK(norm_l2_weighted_lx(f) <= g.L * norm_l2(f) * (1.0 + 1e-13));
  CHECK(norm_l2_weighted_lx(f) > 0.0);
}

TEST_CASE("audits are deterministic") {
  Grid g(24, 24, 0.25);
  FlowParams p = default_params();
  LinearInput in = smooth_input(g, p);
  LinearOutput s1 = solve_linear(in);
  LinearOutput s2 = solve_linear(in);
  std::vector<EstimateAudit> a1 = audit_all(s1, in), a2 = audit_all(s2, in);
  REQUIRE(a1.size() == a2.size());
  for (size_t k = 0; k < a1.size(); ++k) {
    CHECK(a1[k].name == a2[k].name);
    CHECK(a1[k].lhs == a2[k].lhs);
    CHECK(a1[k].rhs_data == a2[k].rhs_data);
    CHECK(a1[k].implied_constant == a2[k].implied_constant);
  }
}

TEST_CASE("constants stay within one decade across a short eps range") {
  Grid g(32, 32, 0.25);
  std::vector<double> cs;
  for (double eps : {2e-2, 1e-2, 5e-3}) {
    FlowParams p = default_params(eps);
    LinearInput in = smooth_input(g, p);
    LinearOutput sol = solve_linear(in);
    EstimateAudit a = audit_curl(sol, in);
    CHECK_FALSE(a.vacuous);
    cs.push_back(a.implied_constant);
  }
  const double lo = std::min({cs[0], cs[1], cs[2]});
  const double hi = std::max({cs[0], cs[1], cs[2]});
  CHECK(hi / lo <= 10.0);
}
