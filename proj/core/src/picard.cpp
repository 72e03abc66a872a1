#include "pcflow/picard.hpp"

#include <cmath>
#include <stdexcept>

#include "pcflow/norms.hpp"

namespace pcflow {

namespace {

void check_state(const State& s, const Lift& lift) {
  const Grid& g = *s.u.g;
  if (!g.same(*s.v.g) || !g.same(*s.rho.g) || !g.same(*lift.ubar.g))
    throw std::invalid_argument("picard: field grids differ");
  check_finite(s.u, "state u");
  check_finite(s.v, "state v");
  check_finite(s.rho, "state rho");
}

ScalarField us_field(const FlowParams& p, const Grid& g) {
  ScalarField f(g);
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) f.at(i, j) = eval_us(p, g.y(j));
  return f;
}

}  // namespace

Reconstruction reconstruct(const State& s, const Lift& lift,
                           const BoundaryData& bd, const FlowParams& p) {
  check_state(s, lift);
  const Grid& g = *s.u.g;
  const double ehp = p.eps_half_plus();
  const double eta2 = p.eta * p.eta;
  const ScalarField rbar = background_density(p, bd, g);

  Reconstruction rec;
  rec.ueps = VectorField(g);
  rec.rhoeps = ScalarField(g);
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) {
      const double x = g.x(i), y = g.y(j);
      rec.ueps.u.at(i, j) = eval_us(p, y) + lift.ubar.at(i, j) + ehp * s.u.at(i, j);
      rec.ueps.v.at(i, j) = lift.vbar.at(i, j) + ehp * s.v.at(i, j);
      rec.rhoeps.at(i, j) = 1.0 - (2.0 / p.gamma) * p.alpha2 * p.eps * eta2 * x +
                            eta2 * rbar.at(i, j) + eta2 * ehp * s.rho.at(i, j);
    }

  rec.corner_defect = std::fabs(rec.rhoeps.at(0, 0) - 1.0);
  const ScalarField rx = apply_dx(rec.rhoeps);
  const double slope = -(2.0 / p.gamma) * p.eps * eta2 * p.alpha2;
  for (int j = 0; j <= g.ny; ++j)
    rec.inflow_slope_defect = std::max(
        rec.inflow_slope_defect, std::fabs(rx.at(0, j) - slope - bd.h0[j]));
  return rec;
}

GTerms assemble_g(const State& s, const Lift& lift, const BoundaryData& bd,
                  const FlowParams& p) {
  check_state(s, lift);
  const Grid& g = *s.u.g;
  const int n = g.npts();
  const double ehp = p.eps_half_plus();   // eps^{1/2+delta}
  const double ehm = p.eps_half_minus();  // eps^{1/2-delta}
  const double emh = 1.0 / ehp;           // eps^{-1/2-delta}
  const double eta2 = p.eta * p.eta;
  const double ga = p.gamma, a2c = p.alpha2, eps = p.eps;

  Reconstruction rec = reconstruct(s, lift, bd, p);
  for (double r : rec.rhoeps.v)
    if (!(r > 0.0))
      throw std::runtime_error("picard: reconstructed density lost positivity");

  // derivative caches
  const ScalarField ux = apply_dx(s.u), uy = apply_dy(s.u);
  const ScalarField vx = apply_dx(s.v), vy = apply_dy(s.v);
  const ScalarField rx = apply_dx(s.rho), ry = apply_dy(s.rho);
  const ScalarField ubx = apply_dx(lift.ubar), uby = apply_dy(lift.ubar);
  const ScalarField vbx = apply_dx(lift.vbar), vby = apply_dy(lift.vbar);
  const ScalarField lap_ub = laplacian(lift.ubar), lap_vb = laplacian(lift.vbar);
  ScalarField divub(g);
  for (int k = 0; k < n; ++k) divub.v[k] = ubx.v[k] + vby.v[k];
  const ScalarField divub_x = apply_dx(divub), divub_y = apply_dy(divub);
  const ScalarField rbar = background_density(p, bd, g);
  const ScalarField rbx = apply_dx(rbar), rby = apply_dy(rbar);
  const ScalarField uex = apply_dx(rec.ueps.u), uey = apply_dy(rec.ueps.u);
  const ScalarField vex = apply_dx(rec.ueps.v), vey = apply_dy(rec.ueps.v);

  GTerms out;
  out.g01 = ScalarField(g); out.g0r = ScalarField(g);
  out.g11 = ScalarField(g); out.g12 = ScalarField(g); out.g1r = ScalarField(g);
  out.g21 = ScalarField(g); out.g22 = ScalarField(g); out.g2r = ScalarField(g);
  out.g0 = ScalarField(g); out.g1 = ScalarField(g); out.g2 = ScalarField(g);

  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) {
      const int k = g.id(i, j);
      const double x = g.x(i), y = g.y(j);
      const double usv = eval_us(p, y), usy = eval_us_y(p, y);
      const double divu = ux.v[k] + vy.v[k];
      const double ue = rec.ueps.u.v[k], ve = rec.ueps.v.v[k];
      const double rgm1 = std::pow(rec.rhoeps.v[k], ga - 1.0);
      const double wgt = -(2.0 / ga) * a2c * eps * x + rbar.v[k];  // eta^2 weight

      out.g01.v[k] =
          eta2 * (ehp * s.rho.v[k] * divu - wgt * divu +
                  s.rho.v[k] * divub.v[k] + (2.0 / ga) * a2c * eps * s.u.v[k] -
                  (s.u.v[k] * rbx.v[k] + s.v.v[k] * rby.v[k]));
      out.g11.v[k] = (2.0 * a2c * ehm - ga * rx.v[k]) * (rgm1 - 1.0) -
                     emh * ga * rbx.v[k] * rgm1 -
                     eta2 * s.rho.v[k] * (ue * uex.v[k] + ve * uey.v[k]);
      out.g12.v[k] =
          -(ehp * s.u.v[k] * ux.v[k] + ehp * s.v.v[k] * uy.v[k] +
            lift.ubar.v[k] * ux.v[k] + lift.vbar.v[k] * uy.v[k] +
            s.u.v[k] * ubx.v[k] + s.v.v[k] * uby.v[k]) -
          eta2 * wgt *
              (s.u.v[k] * ubx.v[k] + ue * ux.v[k] + s.v.v[k] * uby.v[k] +
               lift.vbar.v[k] * uy.v[k]);
      out.g21.v[k] = -ga * ry.v[k] * (rgm1 - 1.0) - emh * ga * rby.v[k] * rgm1 -
                     eta2 * s.rho.v[k] * (ue * vex.v[k] + ve * vey.v[k]);
      out.g22.v[k] =
          -(ehp * s.u.v[k] * vx.v[k] + ehp * s.v.v[k] * vy.v[k] +
            lift.ubar.v[k] * vx.v[k] + lift.vbar.v[k] * vy.v[k] +
            s.u.v[k] * vbx.v[k] + s.v.v[k] * vby.v[k]) -
          eta2 * wgt *
              (ue * vx.v[k] + s.u.v[k] * vbx.v[k] + ve * vy.v[k] +
               s.v.v[k] * vby.v[k]);

      // data-only remainders, rescaled by eps^{1/2+delta}
      out.g0r.v[k] =
          emh * ((-eta2 * wgt - 1.0) * divub.v[k] +
                 (2.0 / ga) * a2c * eps * eta2 * (usv + lift.ubar.v[k]) -
                 eta2 * ((usv + lift.ubar.v[k]) * rbx.v[k] +
                         lift.vbar.v[k] * rby.v[k]));
      out.g1r.v[k] =
          emh * (-lift.ubar.v[k] * ubx.v[k] - lift.vbar.v[k] * uby.v[k] +
                 eps * (lap_ub.v[k] + divub_x.v[k]) -
                 (usv * ubx.v[k] + lift.vbar.v[k] * usy) -
                 eta2 * wgt *
                     ((usv + lift.ubar.v[k]) * ubx.v[k] +
                      lift.vbar.v[k] * (usy + uby.v[k])));
      out.g2r.v[k] =
          emh * (lift.ubar.v[k] * vbx.v[k] + lift.vbar.v[k] * vby.v[k] +
                 eps * lap_vb.v[k] + eps * divub_y.v[k] -
                 eta2 * wgt *
                     ((usv + lift.ubar.v[k]) * vbx.v[k] +
                      lift.vbar.v[k] * vby.v[k]) -
                 usv * vbx.v[k]);

      out.g0.v[k] = out.g01.v[k] + out.g0r.v[k];
      out.g1.v[k] = out.g11.v[k] + out.g12.v[k] + out.g1r.v[k];
      out.g2.v[k] = out.g21.v[k] + out.g22.v[k] + out.g2r.v[k];
    }
  check_finite(out.g0, "g0");
  check_finite(out.g1, "g1");
  check_finite(out.g2, "g2");
  return out;
}

NonlinearResidual nonlinear_residual(const VectorField& ueps,
                                     const ScalarField& rhoeps,
                                     const BoundaryData& bd,
                                     const FlowParams& p) {
  const Grid& g = *ueps.u.g;
  const int n = g.npts();
  const double eta2 = p.eta * p.eta;

  VectorField mflux(g);
  ScalarField pres(g);
  for (int k = 0; k < n; ++k) {
    mflux.u.v[k] = rhoeps.v[k] * ueps.u.v[k];
    mflux.v.v[k] = rhoeps.v[k] * ueps.v.v[k];
    pres.v[k] = std::pow(rhoeps.v[k], p.gamma);
  }
  const ScalarField mass = divergence(mflux);
  const ScalarField ux = apply_dx(ueps.u), uy = apply_dy(ueps.u);
  const ScalarField vx = apply_dx(ueps.v), vy = apply_dy(ueps.v);
  ScalarField divu(g);
  for (int k = 0; k < n; ++k) divu.v[k] = ux.v[k] + vy.v[k];
  const ScalarField lap_u = laplacian(ueps.u), lap_v = laplacian(ueps.v);
  const ScalarField divu_x = apply_dx(divu), divu_y = apply_dy(divu);
  const ScalarField px = apply_dx(pres), py = apply_dy(pres);

  NonlinearResidual out;
  for (int i = 1; i < g.nx; ++i)
    for (int j = 1; j < g.ny; ++j) {
      const int k = g.id(i, j);
      out.mass = std::max(out.mass, std::fabs(mass.v[k]));
      const double cx = rhoeps.v[k] * (ueps.u.v[k] * ux.v[k] +
                                       ueps.v.v[k] * uy.v[k]);
      const double cy = rhoeps.v[k] * (ueps.u.v[k] * vx.v[k] +
                                       ueps.v.v[k] * vy.v[k]);
      out.mom_x = std::max(out.mom_x,
                           std::fabs(cx - p.eps * lap_u.v[k] -
                                     p.eps * divu_x.v[k] + px.v[k] / eta2));
      out.mom_y = std::max(out.mom_y,
                           std::fabs(cy - p.eps * lap_v.v[k] -
                                     p.eps * divu_y.v[k] + py.v[k] / eta2));
    }

  const ScalarField rx = apply_dx(rhoeps);
  const ScalarField curl_ux = apply_dx(curl2d(ueps));
  auto push = [&](const std::string& name, double d) {
    out.bc.push_back({name, d});
    out.max_bc = std::max(out.max_bc, d);
  };
  double d = 0.0;
  for (int i = 0; i <= g.nx; ++i) d = std::max(d, std::fabs(ueps.v.at(i, 0)));
  push("v_wall0", d);
  d = 0.0;
  for (int i = 0; i <= g.nx; ++i)
    d = std::max(d, std::fabs(ueps.v.at(i, g.ny)));
  push("v_wall2", d);
  d = 0.0;
  for (int i = 0; i <= g.nx; ++i)
    d = std::max(d, std::fabs(uy.at(i, 0) - eval_us_y(p, 0.0) - bd.b0[i]));
  push("uy_wall0", d);
  d = 0.0;
  for (int i = 0; i <= g.nx; ++i)
    d = std::max(d, std::fabs(uy.at(i, g.ny) - eval_us_y(p, 2.0) - bd.b1[i]));
  push("uy_wall2", d);
  d = 0.0;
  for (int j = 0; j <= g.ny; ++j)
    d = std::max(d, std::fabs(ueps.u.at(0, j) - eval_us(p, g.y(j)) - bd.a1[j]));
  push("u_inflow", d);
  d = 0.0;
  for (int j = 0; j <= g.ny; ++j)
    d = std::max(d, std::fabs(vx.at(0, j) - bd.a2[j]));
  push("vx_inflow", d);
  d = 0.0;
  for (int j = 0; j <= g.ny; ++j)
    d = std::max(d, std::fabs(ueps.v.at(g.nx, j) - bd.a3[j]));
  push("v_outflow", d);
  d = 0.0;
  for (int j = 0; j <= g.ny; ++j)
    d = std::max(d, std::fabs(curl_ux.at(g.nx, j) - bd.a4[j]));
  push("curlx_outflow", d);
  const double slope = -(2.0 / p.gamma) * p.eps * eta2 * p.alpha2;
  d = 0.0;
  for (int j = 0; j <= g.ny; ++j)
    d = std::max(d, std::fabs(rx.at(0, j) - slope - bd.h0[j]));
  push("rhox_inflow", d);
  push("rho_corner", std::fabs(rhoeps.at(0, 0) - 1.0));
  return out;
}

std::pair<State, IterationReport> picard_iterate(const BoundaryData& bd,
                                                 const FlowParams& p,
                                                 const Grid& g,
                                                 const PicardOptions& opt,
                                                 const State* start) {
  p.validate();
  const double lam = lambda_norm(bd, p);
  const double gate = std::pow(p.eps, 0.5 + p.sigma);
  if (lam > gate * (1.0 + 1e-9))
    throw std::invalid_argument("picard: boundary data above the smallness gate");

  const Lift lift = build_lift(bd, g);
  const ScalarField us = us_field(p, g);
  const double ehp = p.eps_half_plus();
  const double envelope = opt.envelope_factor * std::pow(p.eps, p.sigma / 2.0);

  State s = start ? *start : State(g);
  if (start && !g.same(*start->u.g))
    throw std::invalid_argument("picard: start state on a different grid");
  s.n = 0;

  LinearWorkspace ws;
  IterationReport rep;
  double prev_upd = 0.0;
  int stalls = 0;
  for (int it = 0; it < opt.max_iter; ++it) {
    GTerms gt = assemble_g(s, lift, bd, p);
    LinearInput in;
    in.params = p;
    in.t = 1.0;
    in.g0 = gt.g0;
    in.g = VectorField(gt.g1, gt.g2);
    in.ueps = VectorField(g);
    for (int k = 0; k < g.npts(); ++k) {
      in.ueps.u.v[k] = us.v[k] + lift.ubar.v[k] + ehp * s.u.v[k];
      in.ueps.v.v[k] = lift.vbar.v[k] + ehp * s.v.v[k];
    }
    LinearOutput sol = solve_linear(in, opt.solve, &ws);

    VectorField du(sub(sol.u, s.u), sub(sol.v, s.v));
    const double du_x = norm_X(du, p).total;
    const double drho_y = norm_Y(sub(sol.rho, s.rho), p).total;
    const double upd = du_x + drho_y;

    IterationRow row;
    row.n = it + 1;
    row.du_x = du_x;
    row.drho_y = drho_y;
    row.ratio = (prev_upd > 0.0) ? upd / prev_upd : 0.0;
    row.u_b = norm_B(VectorField(sol.u, sol.v), p).total;
    row.rho_a = norm_A(sol.rho, p).total;
    rep.rows.push_back(row);

    s.u = sol.u;
    s.v = sol.v;
    s.rho = sol.rho;
    s.n = it + 1;

    if (row.u_b + row.rho_a > envelope)
      throw std::runtime_error("picard: iterate escaped the uniform bound");
    if (row.ratio > opt.stall_ratio) {
      if (++stalls >= opt.stall_count)
        throw std::runtime_error("picard: contraction stalled");
    } else {
      stalls = 0;
    }

    rep.final_update = upd;
    if (upd < opt.tol) {
      rep.converged = true;
      break;
    }
    prev_upd = upd;
  }
  rep.iterations = static_cast<int>(rep.rows.size());
  return {s, rep};
}

}  // namespace pcflow
