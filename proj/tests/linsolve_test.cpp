#include <cmath>
#include <random>

#include "doctest.h"
#include "pcflow/linsolve.hpp"

using namespace pcflow;

namespace {

const double kPi = 3.14159265358979323846;

ScalarField sample(const Grid& g, double (*f)(double, double)) {
  ScalarField out(g);
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) out.at(i, j) = f(g.x(i), g.y(j));
  return out;
}

FlowParams default_params(double eps = 1e-2) {
  return FlowParams::make(eps, 1.4, 1.0, 1.0, 0.5, 0.2, 0.05, 0.0);
}

VectorField transport_velocity(const Grid& g, const FlowParams& p) {
  VectorField ue(g);
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) {
      const double y = g.y(j);
      ue.u.at(i, j) = eval_us(p, y);
      ue.v.at(i, j) = 0.05 * y * (2.0 - y) * std::sin(2.0 * g.x(i));
    }
  return ue;
}

LinearInput smooth_input(const Grid& g, const FlowParams& p, double t = 1.0) {
  LinearInput in;
  in.params = p;
  in.t = t;
  in.ueps = transport_velocity(g, p);
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

TEST_CASE("mollifier basics") {
  std::vector<double> f = {1, 2, 3, 4, 5, 4, 3, 2, 1};
  CHECK(mollify_trace(f, 0.1, 0.0) == f);
  std::vector<double> c(41, 2.5);
  auto mc = mollify_trace(c, 0.05, 0.1);
  for (double v : mc) CHECK(v == doctest::Approx(2.5).epsilon(1e-13));
  // oscillation is damped
  std::vector<double> osc(41);
  for (int k = 0; k < 41; ++k) osc[k] = (k % 2 == 0) ? 1.0 : -1.0;
  auto mo = mollify_trace(osc, 0.05, 0.1);
  double m = 0.0;
  for (double v : mo) m = std::max(m, std::fabs(v));
  CHECK(m < 0.5);
}

TEST_CASE("transport closed-form oracle and first-order convergence") {
  const double coef = 0.5, gamma = 1.4, c = 2.0, R = 0.7, rho0 = 0.3;
  auto exact = [&](double x) {
    return R / gamma + (rho0 - R / gamma) * std::exp(-gamma * x / (coef * c));
  };
  double err[2];
  int n = 64;
  for (int k = 0; k < 2; ++k, n *= 2) {
    Grid g(n, 16, 0.25);
    VectorField vel(g);
    for (double& u : vel.u.v) u = c;
    ScalarField rhs(g, R);
    ScalarField r =
        transport_solve(vel, coef, gamma, rhs, std::vector<double>(17, rho0));
    double e = 0.0;
    for (int i = 0; i <= g.nx; ++i)
      e = std::max(e, std::fabs(r.at(i, 8) - exact(g.x(i))));
    err[k] = e;
  }
  CHECK(err[0] / err[1] > 1.8);
  CHECK(err[0] / err[1] < 2.6);
}

TEST_CASE("transport zero data, superposition, and guards") {
  Grid g(24, 24, 0.25);
  VectorField vel(g);
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) {
      vel.u.at(i, j) = 1.0 + 0.2 * g.y(j);
      vel.v.at(i, j) = 0.3 * g.y(j) * (2.0 - g.y(j));
    }
  ScalarField z(g);
  std::vector<double> zi(g.ny + 1, 0.0);
  CHECK(max_abs(transport_solve(vel, 0.4, 1.4, z, zi)) == doctest::Approx(0.0));

  ScalarField r1 = sample(g, [](double x, double y) {
    return std::sin(x * 3.0) + 0.2 * y;
  });
  ScalarField r2 = sample(g, [](double x, double y) {
    return std::cos(2.0 * y) - 0.1 * x;
  });
  std::vector<double> i1(g.ny + 1), i2(g.ny + 1), ic(g.ny + 1);
  for (int j = 0; j <= g.ny; ++j) {
    i1[j] = 0.3 * std::sin(kPi * g.y(j));
    i2[j] = 0.1 * g.y(j);
    ic[j] = 2.0 * i1[j] - 3.0 * i2[j];
  }
  ScalarField rc = add(scale(r1, 2.0), scale(r2, -3.0));
  ScalarField s1 = transport_solve(vel, 0.4, 1.4, r1, i1);
  ScalarField s2 = transport_solve(vel, 0.4, 1.4, r2, i2);
  ScalarField sc = transport_solve(vel, 0.4, 1.4, rc, ic);
  ScalarField expect = add(scale(s1, 2.0), scale(s2, -3.0));
  CHECK(max_abs(sub(sc, expect)) < 1e-12);

  VectorField bad = vel;
  bad.u.at(3, 3) = -0.1;
  CHECK_THROWS_AS(transport_solve(bad, 0.4, 1.4, z, zi), std::invalid_argument);
  VectorField leaky = vel;
  leaky.v.at(2, 0) = 0.1;
  CHECK_THROWS_AS(transport_solve(leaky, 0.4, 1.4, z, zi),
                  std::invalid_argument);
}

TEST_CASE("inflow ODE degenerates to algebra when v0 = 0") {
  Grid g(16, 32, 0.25);
  FlowParams p = default_params();
  LinearInput in;
  in.params = p;
  in.ueps = VectorField(g);
  for (double& u : in.ueps.u.v) u = 1.0;
  in.g0 = ScalarField(g);
  in.g.u = ScalarField(g);
  in.g.v = sample(g, [](double, double y) { return 0.4 + std::sin(y); });
  ScalarField Hc(g);
  Trace r = step_inflow_ode(in, Hc);
  for (int j = 0; j <= g.ny; ++j)
    CHECK(r.v[j] == doctest::Approx(in.g.v.at(0, j) / p.gamma).epsilon(1e-12));

  // zero right side gives zero
  in.g.v = ScalarField(g);
  Trace rz = step_inflow_ode(in, Hc);
  for (double v : rz.v) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("inflow ODE second-order against a manufactured solution") {
  // O(1) coefficient regime so the two-term structure is exercised
  FlowParams p = FlowParams::make(0.5, 1.4, 1, 1, 0.5, 0.2, 0.25, 0.6);
  const double c = 2.0 * p.eps * p.eta * p.eta;
  auto rstar = [](double y) { return std::cos(0.5 * kPi * y) + 0.3 * y; };
  auto v0f = [](double y) { return 0.5 * y * (2.0 - y); };
  auto rhsf = [&](double y) {
    // gamma r + c (v0 r)_y with (v0 r)_y expanded analytically
    const double r = rstar(y), ry = -0.5 * kPi * std::sin(0.5 * kPi * y) + 0.3;
    const double v = v0f(y), vy = 1.0 - y;
    return 1.4 * r + c * (vy * r + v * ry);
  };
  double err[2];
  int n = 32;
  for (int k = 0; k < 2; ++k, n *= 2) {
    Grid g(16, n, 0.25);
    LinearInput in;
    in.params = p;
    in.ueps = VectorField(g);
    for (int i = 0; i <= g.nx; ++i)
      for (int j = 0; j <= g.ny; ++j) {
        in.ueps.u.at(i, j) = 1.0;
        in.ueps.v.at(i, j) = v0f(g.y(j));
      }
    in.g0 = ScalarField(g);
    in.g.u = ScalarField(g);
    in.g.v = ScalarField(g);
    for (int i = 0; i <= g.nx; ++i)
      for (int j = 0; j <= g.ny; ++j) in.g.v.at(i, j) = rhsf(g.y(j));
    Trace r = step_inflow_ode(in, ScalarField(g));
    double e = 0.0;
    for (int j = 0; j <= g.ny; ++j)
      e = std::max(e, std::fabs(r.v[j] - rstar(g.y(j))));
    err[k] = e;
  }
  CHECK(err[0] / err[1] > 3.2);
  CHECK(err[0] / err[1] < 4.8);
}

TEST_CASE("flux inflow trace integrates g2 when Hc vanishes") {
  Grid g(24, 24, 0.25);
  FlowParams p = default_params();
  LinearInput in;
  in.params = p;
  in.ueps = transport_velocity(g, p);
  in.g0 = ScalarField(g);
  in.g.u = ScalarField(g);
  in.g.v = ScalarField(g, 0.8);  // g2 constant
  auto [P, p0] = step_flux(in, ScalarField(g), VectorField(g));
  (void)P;
  for (int j = 0; j <= g.ny; ++j)
    CHECK(p0.v[j] == doctest::Approx(0.8 * g.y(j)).epsilon(1e-10));
}

TEST_CASE("t = 0 gives identically zero output") {
  Grid g(24, 24, 0.25);
  FlowParams p = default_params();
  LinearInput in = smooth_input(g, p, 0.0);
  LinearOutput out = solve_linear(in);
  CHECK(out.sweeps <= 2);  // zero offset sweep plus the verification sweep
  CHECK(max_abs(out.u) < 1e-11);
  CHECK(max_abs(out.v) < 1e-11);
  CHECK(max_abs(out.rho) < 1e-11);
  CHECK(max_abs(out.Hc) < 1e-11);
  CHECK(max_abs(out.P) < 1e-11);
}

TEST_CASE("zero forcing gives zero output at t = 1") {
  Grid g(24, 24, 0.25);
  FlowParams p = default_params();
  LinearInput in = smooth_input(g, p);
  in.g0 = ScalarField(g);
  in.g.u = ScalarField(g);
  in.g.v = ScalarField(g);
  LinearOutput out = solve_linear(in);
  CHECK(max_abs(out.u) < 1e-11);
  CHECK(max_abs(out.rho) < 1e-11);
}

TEST_CASE("full linear solve: consistency, identities, boundary report") {
  Grid g(48, 48, 0.25);
  FlowParams p = default_params();
  LinearInput in = smooth_input(g, p);
  LinearOutput out = solve_linear(in);
  // offset sweep, GMRES iterations, final sweep and the verification sweep
  CHECK(out.sweeps <= 60);
  CHECK(out.last_update < 1e-9);

  const double scale = 1.0 + max_abs(out.P) + max_abs(out.Hc);
  // gauge identities exact at interior nodes
  CHECK(out.residual_report.gauge.div_max_interior < 1e-8 * scale);
  CHECK(out.residual_report.gauge.curl_max_interior < 1e-8 * scale);
  // reconstruction identities exact at interior nodes
  CHECK(out.residual_report.recon_curl < 1e-8 * scale);
  CHECK(out.residual_report.recon_div < 1e-8 * scale);
  // mass through the transport stencils is round-off
  CHECK(out.residual_report.mass < 1e-9 * scale);

  // boundary conditions that the construction satisfies exactly
  auto bc = [&](const std::string& name) {
    for (const auto& b : out.bc_report)
      if (b.name == name) return b.defect;
    FAIL("missing bc entry ", name);
    return 0.0;
  };
  const double uscale = 1.0 + std::max(max_abs(out.u), max_abs(out.v));
  CHECK(bc("u_inflow") < 1e-9 * uscale);
  CHECK(bc("v_outflow") < 1e-9 * uscale);
  CHECK(bc("v_wall0") < 1e-9 * uscale);
  CHECK(bc("v_wall2") < 1e-9 * uscale);
  // the remaining conditions hold at discretization level
  CHECK(bc("vx_inflow") < 0.3 * uscale);
  CHECK(bc("uy_wall0") < 0.3 * uscale);
  CHECK(bc("uy_wall2") < 0.3 * uscale);
  CHECK(bc("curlx_outflow") < 1.0 * uscale);
}

TEST_CASE("solve_linear is linear in the forcing data") {
  Grid g(32, 32, 0.25);
  FlowParams p = default_params();
  LinearInput in1 = smooth_input(g, p);
  LinearInput in2 = in1;
  in2.g0 = sample(g, [](double x, double y) {
    return 0.2 * std::cos(x) * std::sin(1.1 * y);
  });
  in2.g.u = sample(g, [](double x, double y) { return 0.4 * x + 0.3 * y; });
  in2.g.v = sample(g, [](double x, double y) {
    return std::sin(2.0 * x) * std::cos(0.5 * y);
  });
  LinearInput inc = in1;
  inc.g0 = add(scale(in1.g0, 1.5), scale(in2.g0, -0.7));
  inc.g.u = add(scale(in1.g.u, 1.5), scale(in2.g.u, -0.7));
  inc.g.v = add(scale(in1.g.v, 1.5), scale(in2.g.v, -0.7));
  LinearOutput o1 = solve_linear(in1), o2 = solve_linear(in2);
  LinearOutput oc = solve_linear(inc);
  ScalarField eu = add(scale(o1.u, 1.5), scale(o2.u, -0.7));
  ScalarField er = add(scale(o1.rho, 1.5), scale(o2.rho, -0.7));
  const double s = 1.0 + max_abs(eu) + max_abs(er);
  CHECK(max_abs(sub(oc.u, eu)) < 1e-7 * s);
  CHECK(max_abs(sub(oc.rho, er)) < 1e-7 * s);
}

TEST_CASE("mollified solve recovers the inflow identity") {
  Grid g(32, 32, 0.25);
  FlowParams p = default_params();
  LinearInput in = smooth_input(g, p);
  in.alpha_mollify = 2.0 * g.hy;
  LinearOutput out = solve_linear(in);
  // identity defect is discretization-level, far below the field scale
  const double s = 1.0 + max_abs(out.rho);
  CHECK(out.residual_report.inflow_identity < 0.05 * s);
}

TEST_CASE("input validation") {
  Grid g(16, 16, 0.25);
  FlowParams p = default_params();
  LinearInput in = smooth_input(g, p);
  in.t = 1.5;
  CHECK_THROWS_AS(validate_input(in), std::invalid_argument);
  in = smooth_input(g, p);
  in.ueps.v.at(2, 0) = 0.5;
  CHECK_THROWS_AS(validate_input(in), std::invalid_argument);
  in = smooth_input(g, p);
  in.ueps.u.at(1, 1) = -0.2;
  CHECK_THROWS_AS(validate_input(in), std::invalid_argument);
}
