#include "pcflow/homogenize.hpp"

#include <cmath>
#include <stdexcept>

#include "pcflow/elliptic.hpp"

namespace pcflow {

namespace {

void require_compatible(const BoundaryData& bd, double tol) {
  CompatReport r = check_compatibility(bd, tol);
  if (!r.pass)
    throw std::invalid_argument("homogenize: boundary data violates corner "
                                "compatibility, max defect " +
                                std::to_string(r.max_defect));
}

// Second-derivative endpoint values of the wall profiles, needed by the
// lift boundary conditions.
struct EndpointData {
  double b0pp0, b1pp0, b0pL, b1pL, b0pppL, b1pppL;
  double a2pp0, a2pp2, a3pp0, a3pp2;
};

EndpointData endpoints(const BoundaryData& bd) {
  EndpointData e;
  e.b0pp0 = end_deriv(bd.b0, bd.hx, 2, true);
  e.b1pp0 = end_deriv(bd.b1, bd.hx, 2, true);
  e.b0pL = end_deriv(bd.b0, bd.hx, 1, false);
  e.b1pL = end_deriv(bd.b1, bd.hx, 1, false);
  e.b0pppL = end_deriv(bd.b0, bd.hx, 3, false);
  e.b1pppL = end_deriv(bd.b1, bd.hx, 3, false);
  e.a2pp0 = end_deriv(bd.a2, bd.hy, 2, true);
  e.a2pp2 = end_deriv(bd.a2, bd.hy, 2, false);
  e.a3pp0 = end_deriv(bd.a3, bd.hy, 2, true);
  e.a3pp2 = end_deriv(bd.a3, bd.hy, 2, false);
  return e;
}

std::pair<ScalarField, ScalarField> h_profiles(const BoundaryData& bd,
                                               const Grid& g,
                                               const EndpointData& e) {
  ScalarField h1(g), h2(g);
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) {
      const double x = g.x(i), y = g.y(j);
      const double cl = cutoff_chi(2.0 * y), cu = cutoff_chi(4.0 - 2.0 * y);
      h1.at(i, j) = (bd.a1[0] + bd.b0[i] * y) * cl +
                    (bd.a1[g.ny] - (2.0 - y) * bd.b1[i]) * cu;
      h2.at(i, j) =
          0.5 * y * y * (e.a2pp0 * (x - g.L) + e.a3pp0) * cl +
          0.5 * (y - 2.0) * (y - 2.0) * (e.a2pp2 * (x - g.L) + e.a3pp2) * cu;
    }
  return {h1, h2};
}

}  // namespace

std::pair<ScalarField, ScalarField> build_h1_h2(const BoundaryData& bd,
                                                const Grid& g,
                                                double compat_tol) {
  require_compatible(bd, compat_tol);
  return h_profiles(bd, g, endpoints(bd));
}

double h4_norm(const VectorField& w) {
  const auto comp = [](const ScalarField& f) {
    // all mixed derivatives up to total order 4 with binomial weights
    std::array<std::array<ScalarField, 5>, 5> d;
    d[0][0] = f;
    for (int i = 0; i <= 4; ++i)
      for (int j = 0; i + j <= 4; ++j) {
        if (i == 0 && j == 0) continue;
        d[i][j] = (i > 0) ? apply_dx(d[i - 1][j]) : apply_dy(d[i][j - 1]);
      }
    auto binom = [](int n, int k) {
      double r = 1.0;
      for (int m = 1; m <= k; ++m) r = r * (n - k + m) / m;
      return r;
    };
    double s = 0.0;
    for (int i = 0; i <= 4; ++i)
      for (int j = 0; i + j <= 4; ++j)
        s += binom(i + j, i) * integrate(mul(d[i][j], d[i][j]));
    return s;
  };
  return std::sqrt(comp(w.u) + comp(w.v));
}

Lift build_lift(const BoundaryData& bd, const Grid& g, double lift_tol,
                double compat_tol) {
  require_compatible(bd, compat_tol);
  const EndpointData e = endpoints(bd);

  Lift lift;
  std::tie(lift.h1, lift.h2) = h_profiles(bd, g, e);

  // first biharmonic problem: the ubar lift
  BiharmonicProblem pu;
  pu.rhs = ScalarField(g);
  std::vector<double> d2_in(g.ny + 1), d1_out(g.ny + 1), d3_out(g.ny + 1);
  for (int j = 0; j <= g.ny; ++j) {
    const double y = g.y(j);
    const double cl = cutoff_chi(2.0 * y), cu = cutoff_chi(4.0 - 2.0 * y);
    d2_in[j] = e.b0pp0 * y * cl + (y - 2.0) * e.b1pp0 * cu;
    d1_out[j] = e.b0pL * y * cl + e.b1pL * (y - 2.0) * cu;
    d3_out[j] = e.b0pppL * y * cl + e.b1pppL * (y - 2.0) * cu;
  }
  pu.bc[0] = {{{BhKind::Value, bd.a1}, {BhKind::D2, d2_in}}};
  pu.bc[1] = {{{BhKind::D1, d1_out}, {BhKind::D3, d3_out}}};
  pu.bc[2] = {{{BhKind::Value, std::vector<double>(g.nx + 1, bd.a1[0])},
               {BhKind::D1, bd.b0}}};
  pu.bc[3] = {{{BhKind::Value, std::vector<double>(g.nx + 1, bd.a1[g.ny])},
               {BhKind::D1, bd.b1}}};
  BiharmonicResult ru = solve_biharmonic(g, pu);
  lift.ubar = ru.sol;

  // coupling trace for the vbar problem: d/dy of the ubar_x outflow trace
  std::vector<double> t =
      deriv1d(extract_trace(apply_dx(lift.ubar), Side::XL).v, g.hy);
  std::vector<double> vxx_out(g.ny + 1);
  for (int j = 0; j <= g.ny; ++j) vxx_out[j] = t[j] - bd.a4[j];

  // second biharmonic problem: the vbar lift
  BiharmonicProblem pv;
  pv.rhs = ScalarField(g);
  std::vector<double> d2_w0(g.nx + 1), d2_w2(g.nx + 1);
  for (int i = 0; i <= g.nx; ++i) {
    d2_w0[i] = e.a2pp0 * (g.x(i) - g.L) + e.a3pp0;
    d2_w2[i] = e.a2pp2 * (g.x(i) - g.L) + e.a3pp2;
  }
  pv.bc[0] = {{{BhKind::D1, bd.a2},
               {BhKind::D3, std::vector<double>(g.ny + 1, 0.0)}}};
  pv.bc[1] = {{{BhKind::Value, bd.a3}, {BhKind::D2, vxx_out}}};
  pv.bc[2] = {{{BhKind::Value, std::vector<double>(g.nx + 1, 0.0)},
               {BhKind::D2, d2_w0}}};
  pv.bc[3] = {{{BhKind::Value, std::vector<double>(g.nx + 1, 0.0)},
               {BhKind::D2, d2_w2}}};
  BiharmonicResult rv = solve_biharmonic(g, pv);
  lift.vbar = rv.sol;

  // closed-form lift profiles, retained for diagnostics
  lift.u0 = ScalarField(g);
  lift.v0 = ScalarField(g);
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) {
      const double x = g.x(i), y = g.y(j);
      const double cin = cutoff_chi(4.0 * x / g.L);
      const double cout = cutoff_chi((4.0 * g.L - 4.0 * x) / g.L);
      const double cl = cutoff_chi(2.0 * y), cu = cutoff_chi(4.0 - 2.0 * y);
      const double h1_in = bd.a1[0] * cl + bd.a1[g.ny] * cu +
                           y * bd.b0[0] * cl - (2.0 - y) * bd.b1[0] * cu;
      lift.u0.at(i, j) = lift.h1.at(i, j) + (bd.a1[j] - h1_in) * cin;
      const double h2x_in = 0.5 * y * y * e.a2pp0 * cl +
                            0.5 * (y - 2.0) * (y - 2.0) * e.a2pp2 * cu;
      const double h2_out = 0.5 * y * y * e.a3pp0 * cl +
                            0.5 * (y - 2.0) * (y - 2.0) * e.a3pp2 * cu;
      lift.v0.at(i, j) = lift.h2.at(i, j) + x * (bd.a2[j] - h2x_in) * cin +
                         (bd.a3[j] - h2_out) +
                         0.5 * (x - g.L) * (x - g.L) * vxx_out[j] * cout;
    }

  lift.invariants = {
      {"ubar_y_wall0", ru.bc_defect[2][1]},
      {"ubar_y_wall2", ru.bc_defect[3][1]},
      {"ubar_inflow", ru.bc_defect[0][0]},
      {"vbar_walls", std::max(rv.bc_defect[2][0], rv.bc_defect[3][0])},
      {"vbar_outflow", rv.bc_defect[1][0]},
      {"vbar_x_inflow", rv.bc_defect[0][0]},
      {"curl_x_outflow", rv.bc_defect[1][1]},
  };
  for (const auto& inv : lift.invariants)
    lift.max_invariant_defect = std::max(lift.max_invariant_defect, inv.defect);
  if (lift.max_invariant_defect > lift_tol)
    throw std::runtime_error("homogenize: lifted boundary identity defect " +
                             std::to_string(lift.max_invariant_defect) +
                             " exceeds tolerance");

  lift.h4_norm_estimate = h4_norm({lift.ubar, lift.vbar});
  return lift;
}

}  // namespace pcflow
