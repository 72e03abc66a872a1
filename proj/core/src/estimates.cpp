#include "pcflow/estimates.hpp"

#include <cmath>
#include <utility>

#include "pcflow/norms.hpp"

namespace pcflow {

namespace {

double tr_l2(const ScalarField& f, Side s) {
  const Grid& g = *f.g;
  const double h = (s == Side::X0 || s == Side::XL) ? g.hy : g.hx;
  return trace_l2(extract_trace(f, s).v, h);
}

double tr_lp(const ScalarField& f, Side s, double p) {
  const Grid& g = *f.g;
  const double h = (s == Side::X0 || s == Side::XL) ? g.hy : g.hx;
  return trace_lp(extract_trace(f, s).v, h, p);
}

// y-derivative of a trace on a vertical side
double tr_dy_l2(const ScalarField& f, Side s) {
  const Grid& g = *f.g;
  std::vector<double> tr = extract_trace(f, s).v;
  return trace_l2(deriv1d(tr, g.hy), g.hy);
}

double vec_l2(const ScalarField& a, const ScalarField& b) {
  const double na = norm_l2(a), nb = norm_l2(b);
  return std::sqrt(na * na + nb * nb);
}

double vec_lp(const ScalarField& a, const ScalarField& b, double p) {
  const double na = norm_lp(a, p), nb = norm_lp(b, p);
  return std::pow(std::pow(na, p) + std::pow(nb, p), 1.0 / p);
}

double norm_w1p(const ScalarField& f, double p) {
  return norm_lp(f, p) + norm_lp(apply_dx(f), p) + norm_lp(apply_dy(f), p);
}

// || (L-x) hess f || with the mixed term twice, as in the interior norms
double hess_weighted(const ScalarField& f) {
  const ScalarField fx = apply_dx(f), fy = apply_dy(f);
  const double a = norm_l2_weighted_lx(apply_dx(fx));
  const double b = norm_l2_weighted_lx(apply_dy(fx));
  const double c = norm_l2_weighted_lx(apply_dy(fy));
  return std::sqrt(a * a + 2.0 * b * b + c * c);
}

// || (L-x) grad^3 f || with binomial multiplicities
double third_weighted(const ScalarField& f) {
  const ScalarField fx = apply_dx(f), fy = apply_dy(f);
  const ScalarField fxx = apply_dx(fx), fxy = apply_dy(fx),
                    fyy = apply_dy(fy);
  const double a = norm_l2_weighted_lx(apply_dx(fxx));
  const double b = norm_l2_weighted_lx(apply_dy(fxx));
  const double c = norm_l2_weighted_lx(apply_dy(fxy));
  const double d = norm_l2_weighted_lx(apply_dy(fyy));
  return std::sqrt(a * a + 3.0 * b * b + 3.0 * c * c + d * d);
}

EstimateAudit make(const std::string& name, const LinearInput& in, double p,
                   double lhs, double rhs) {
  EstimateAudit a;
  a.name = name;
  a.eps = in.params.eps;
  a.eta = in.params.eta;
  a.L = in.g0.g->L;
  a.p = p;
  a.lhs = lhs;
  a.rhs_data = rhs;
  a.vacuous = !(rhs > 0.0);
  a.implied_constant = a.vacuous ? 0.0 : lhs / rhs;
  return a;
}

// shared derivative bundle
struct Cache {
  const FlowParams& pr;
  double eps, eta, L;
  ScalarField ux, uy, vx, vy, divu, curl;
  ScalarField curl_x, curl_y;
  ScalarField rx, ry, ryy_trace_src;
  ScalarField g1y, g2x;
  ScalarField curlg;  // g1_y - g2_x

  Cache(const LinearOutput& sol, const LinearInput& in)
      : pr(in.params),
        eps(in.params.eps),
        eta(in.params.eta),
        L(in.g0.g->L),
        ux(apply_dx(sol.u)),
        uy(apply_dy(sol.u)),
        vx(apply_dx(sol.v)),
        vy(apply_dy(sol.v)),
        divu(divergence(VectorField(sol.u, sol.v))),
        curl(curl2d(VectorField(sol.u, sol.v))),
        curl_x(apply_dx(curl)),
        curl_y(apply_dy(curl)),
        rx(apply_dx(sol.rho)),
        ry(apply_dy(sol.rho)),
        g1y(apply_dy(in.g.u)),
        g2x(apply_dx(in.g.v)),
        curlg(sub(g1y, g2x)) {}

  double A1() const { return norm_l2(ux) + norm_l2(vx); }
  double A2() const {
    return norm_l2(curl_x) + std::sqrt(eps) * tr_l2(curl_x, Side::X0) +
           std::sqrt(eps) * tr_l2(curl_y, Side::XL);
  }
  // right side of the basic energy bound
  double data_low(const LinearInput& in) const {
    return norm_h1(in.g0) + eps * tr_dy_l2(in.g0, Side::X0) +
           vec_l2(in.g.u, in.g.v) + norm_l2(curlg) + tr_l2(in.g.v, Side::X0);
  }
  // right side of the higher order family
  double data_high(const LinearInput& in) const {
    std::vector<double> g0tr = extract_trace(in.g0, Side::X0).v;
    const double hy = in.g0.g->hy;
    const double g0yy0 =
        trace_l2(deriv1d_second(g0tr, hy), hy);
    return std::sqrt(eps) * norm_h2(in.g0) + vec_l2(in.g.u, in.g.v) +
           tr_l2(in.g.v, Side::X0) + norm_h1(in.g0) + norm_l2(curlg) +
           std::sqrt(eps) * norm_h1(curlg) + eps * g0yy0 +
           std::sqrt(eps) * (norm_h1(in.g.u) + norm_h1(in.g.v)) +
           std::sqrt(eps) * tr_dy_l2(in.g.v, Side::X0);
  }
};

}  // namespace

EstimateAudit audit_density(const LinearOutput& sol, const LinearInput& in,
                            double p) {
  Cache c(sol, in);
  const double wp = std::pow(c.eps, 1.0 / p) * std::pow(c.eta, 2.0 / p);
  ScalarField grad_mag(*sol.rho.g);
  for (size_t k = 0; k < grad_mag.v.size(); ++k)
    grad_mag.v[k] = std::hypot(c.rx.v[k], c.ry.v[k]);
  const double lhs = norm_lp(c.rx, p) + norm_lp(c.ry, p) +
                     tr_lp(c.ry, Side::X0, p) + wp * colmax_lp(grad_mag, p);
  const double rhs = wp * tr_lp(in.g.v, Side::X0, p) +
                     vec_lp(in.g.u, in.g.v, p) +
                     c.eps * tr_lp(apply_dy(in.g0), Side::X0, p) +
                     c.eps * norm_h2(sol.Hc) + norm_lp(c.ux, p) +
                     norm_lp(c.vx, p) + c.eps * norm_w1p(in.g0, p);
  return make("Lem2.12", in, p, lhs, rhs);
}

EstimateAudit audit_curl(const LinearOutput& sol, const LinearInput& in) {
  Cache c(sol, in);
  const double lhs = c.eps * norm_h2(c.curl) + c.A2();
  const double rhs = c.L * c.A1() + norm_l2(in.g0) + norm_l2(c.curlg) +
                     c.eta * c.eta * vec_l2(c.rx, c.ry);
  return make("Lem2.13", in, 2.0, lhs, rhs);
}

EstimateAudit audit_A1(const LinearOutput& sol, const LinearInput& in) {
  Cache c(sol, in);
  const double a1 = c.A1(), a2 = c.A2();
  double grad_ux2 = 0.0;
  for (const ScalarField* f : {&c.ux, &c.vx}) {
    const double dx = norm_l2(apply_dx(*f)), dy = norm_l2(apply_dy(*f));
    grad_ux2 += dx * dx + dy * dy;
  }
  const double g0h1 = norm_h1(in.g0);
  const double g20 = tr_l2(in.g.v, Side::X0);
  const double g0tr_h1 = sobolev1d(extract_trace(in.g0, Side::X0).v,
                                   in.g0.g->hy, 1);
  const double gnorm = vec_l2(in.g.u, in.g.v);
  const double gradrho = vec_l2(c.rx, c.ry);
  const double rxl = tr_l2(c.rx, Side::XL);
  const double eta2 = c.eta * c.eta;
  const double lhs = a1 * a1;
  const double rhs = c.L * a2 * a2 + c.L * c.eps * c.eps * grad_ux2 +
                     g0h1 * g0h1 + g20 * g20 + c.eps * g0tr_h1 * g0tr_h1 +
                     eta2 * gradrho * gradrho + eta2 * eta2 * rxl * rxl +
                     gnorm * gnorm + norm_l2(c.rx) * norm_l2(in.g0);
  return make("Lem2.14", in, 2.0, lhs, rhs);
}

std::vector<EstimateAudit> audit_higher(const LinearOutput& sol,
                                        const LinearInput& in) {
  Cache c(sol, in);
  const double e = c.eps, eta = c.eta;
  const double e12 = std::sqrt(e), e32 = e * e12;
  std::vector<EstimateAudit> out;

  {  // boundary vorticity
    const ScalarField cxx = apply_dx(c.curl_x);
    const ScalarField cxy = apply_dy(c.curl_x);
    const double lhs = e32 * tr_l2(cxx, Side::XL) + e32 * tr_l2(cxy, Side::X0);
    const double rhs = e * tr_dy_l2(in.g0, Side::X0) + vec_l2(in.g.u, in.g.v) +
                       tr_l2(in.g.v, Side::X0) + norm_h1(in.g0) +
                       norm_l2(c.curlg) + e12 * norm_h1(c.curlg);
    out.push_back(make("Lem2.15", in, 2.0, lhs, rhs));
  }
  {  // inflow u_x trace and velocity H2
    const ScalarField rxy = apply_dy(c.rx);
    const double lhs = tr_l2(c.ux, Side::X0) +
                       e12 * norm_h2v(VectorField(sol.u, sol.v));
    const double rhs = e12 * norm_h2(in.g0) + vec_l2(in.g.u, in.g.v) +
                       std::sqrt(tr_l2(in.g.u, Side::X0) *
                                     tr_l2(in.g.u, Side::X0) +
                                 tr_l2(in.g.v, Side::X0) *
                                     tr_l2(in.g.v, Side::X0)) +
                       norm_h1(in.g0) + norm_l2(c.curlg) +
                       std::sqrt(c.L) * e12 * eta * eta * tr_l2(rxy, Side::XL) +
                       e12 * (norm_h1(in.g.u) + norm_h1(in.g.v));
    out.push_back(make("Lem2.16", in, 2.0, lhs, rhs));
  }
  {  // density second derivatives and the flux
    const ScalarField rxx = apply_dx(c.rx);
    const ScalarField rxy = apply_dy(c.rx), ryy = apply_dy(c.ry);
    ScalarField grad_ry(*sol.rho.g);
    for (size_t k = 0; k < grad_ry.v.size(); ++k)
      grad_ry.v[k] = std::hypot(rxy.v[k], ryy.v[k]);
    const double lhs = e * eta * norm_l2(rxx) + e12 * norm_l2(grad_ry) +
                       e * eta * eta * colmax_lp(rxx, 2.0) +
                       e * eta * colmax_lp(grad_ry, 2.0) +
                       e12 * tr_l2(ryy, Side::X0);
    out.push_back(make("Lem2.17", in, 2.0, lhs, c.data_high(in)));
  }
  {  // flux derivatives
    const ScalarField divy = apply_dy(c.divu);
    const ScalarField divxx = apply_dx(apply_dx(c.divu));
    const double lhs =
        e32 * std::sqrt(norm_l2(apply_dx(divy)) * norm_l2(apply_dx(divy)) +
                        norm_l2(apply_dy(divy)) * norm_l2(apply_dy(divy))) +
        e * e * eta * norm_l2(divxx);
    out.push_back(make("Cor2.18", in, 2.0, lhs, c.data_high(in)));
  }
  {  // weighted third derivatives
    const ScalarField uxxx = apply_dx(apply_dx(c.ux));
    const double lhs = e32 * hess_weighted(c.uy) +
                       e * e * eta * norm_l2_weighted_lx(uxxx) +
                       e32 * third_weighted(sol.v);
    out.push_back(make("Lem2.19", in, 2.0, lhs, c.data_high(in)));
  }
  return out;
}

std::vector<EstimateAudit> audit_theorems(const LinearOutput& sol,
                                          const LinearInput& in) {
  Cache c(sol, in);
  const FlowParams& p = in.params;
  std::vector<EstimateAudit> out;
  {
    const double lhs =
        c.A1() + c.A2() + norm_Y(sol.rho, p).total +
        c.eps * norm_h2(c.curl) + std::sqrt(c.eps) * norm_h1(c.curl) +
        norm_h1v(VectorField(sol.u, sol.v)) +
        c.eps * norm_h2v(VectorField(sol.u, sol.v)) +
        c.eps * tr_dy_l2(c.divu, Side::X0);
    out.push_back(make("Thm2.11", in, 2.0, lhs, c.data_low(in)));
  }
  {
    const double lhs = norm_Y(sol.rho, p).total + c.eps * norm_h2(c.curl) +
                       norm_X(VectorField(sol.u, sol.v), p).total;
    out.push_back(make("Thm2.20-2.79", in, 2.0, lhs, c.data_low(in)));
  }
  {
    const double lhs = norm_B(VectorField(sol.u, sol.v), p).total +
                       norm_A(sol.rho, p).total;
    out.push_back(make("Thm2.20-2.80", in, 2.0, lhs, c.data_high(in)));
  }
  return out;
}

std::vector<EstimateAudit> audit_all(const LinearOutput& sol,
                                     const LinearInput& in) {
  std::vector<EstimateAudit> out = audit_theorems(sol, in);
  out.push_back(audit_density(sol, in, 2.0));
  out.push_back(audit_density(sol, in, 4.0));
  out.push_back(audit_curl(sol, in));
  out.push_back(audit_A1(sol, in));
  for (EstimateAudit& a : audit_higher(sol, in)) out.push_back(std::move(a));
  return out;
}

}  // namespace pcflow
