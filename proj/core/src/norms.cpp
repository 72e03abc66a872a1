#include "pcflow/norms.hpp"

#include <cmath>

namespace pcflow {

double NormReport::term(const std::string& name) const {
  for (const auto& t : terms)
    if (t.first == name) return t.second;
  throw std::invalid_argument("norm report has no term " + name);
}

namespace {

ScalarField sq(const ScalarField& f) { return mul(f, f); }

double col_lp_of(const ScalarField& mag2, double p, int i) {
  // column L^p norm from a field of squared magnitudes
  const Grid& g = *mag2.g;
  double s = 0.0;
  for (int j = 0; j <= g.ny; ++j) {
    const double wy = (j == 0 || j == g.ny) ? 0.5 : 1.0;
    s += wy * std::pow(mag2.at(i, j), 0.5 * p);
  }
  return std::pow(s * g.hy, 1.0 / p);
}

}  // namespace

double norm_l2(const ScalarField& f) { return std::sqrt(integrate(sq(f))); }

double norm_lp(const ScalarField& f, double p) {
  ScalarField a(*f.g);
  for (size_t k = 0; k < f.v.size(); ++k) a.v[k] = std::pow(std::fabs(f.v[k]), p);
  return std::pow(integrate(a), 1.0 / p);
}

double norm_l2_weighted_lx(const ScalarField& f) {
  const Grid& g = *f.g;
  ScalarField a(g);
  for (int i = 0; i <= g.nx; ++i) {
    const double w = g.L - g.x(i);
    for (int j = 0; j <= g.ny; ++j) a.at(i, j) = w * w * f.at(i, j) * f.at(i, j);
  }
  return std::sqrt(integrate(a));
}

double norm_h1(const ScalarField& f) {
  const double a = norm_l2(f), b = norm_l2(apply_dx(f)), c = norm_l2(apply_dy(f));
  return std::sqrt(a * a + b * b + c * c);
}

double norm_h1v(const VectorField& w) {
  const double a = norm_h1(w.u), b = norm_h1(w.v);
  return std::sqrt(a * a + b * b);
}

double norm_hess(const ScalarField& f) {
  ScalarField fx = apply_dx(f), fy = apply_dy(f);
  const double a = norm_l2(apply_dx(fx)), b = norm_l2(apply_dy(fx)),
               c = norm_l2(apply_dy(fy));
  return std::sqrt(a * a + 2.0 * b * b + c * c);
}

double norm_hessv(const VectorField& w) {
  const double a = norm_hess(w.u), b = norm_hess(w.v);
  return std::sqrt(a * a + b * b);
}

double norm_h2(const ScalarField& f) {
  const double a = norm_h1(f), b = norm_hess(f);
  return std::sqrt(a * a + b * b);
}

double norm_h2v(const VectorField& w) {
  const double a = norm_h2(w.u), b = norm_h2(w.v);
  return std::sqrt(a * a + b * b);
}

double norm_w2p(const ScalarField& f, double p) {
  ScalarField fx = apply_dx(f), fy = apply_dy(f);
  double s = 0.0;
  for (const ScalarField* d :
       std::initializer_list<const ScalarField*>{&f, &fx, &fy})
    s += std::pow(norm_lp(*d, p), p);
  ScalarField fxx = apply_dx(fx), fxy = apply_dy(fx), fyy = apply_dy(fy);
  for (const ScalarField* d : {&fxx, &fxy, &fyy}) s += std::pow(norm_lp(*d, p), p);
  return std::pow(s, 1.0 / p);
}

double norm_w2pv(const VectorField& w, double p) {
  return std::pow(std::pow(norm_w2p(w.u, p), p) + std::pow(norm_w2p(w.v, p), p),
                  1.0 / p);
}

double colmax_grad_lp(const ScalarField& f, double p) {
  ScalarField fx = apply_dx(f), fy = apply_dy(f);
  ScalarField mag2 = add(sq(fx), sq(fy));
  double m = 0.0;
  for (int i = 0; i <= f.g->nx; ++i) m = std::max(m, col_lp_of(mag2, p, i));
  return m;
}

double colmax_lp(const ScalarField& f, double p) {
  ScalarField mag2 = sq(f);
  double m = 0.0;
  for (int i = 0; i <= f.g->nx; ++i) m = std::max(m, col_lp_of(mag2, p, i));
  return m;
}

double trace_l2(const std::vector<double>& f, double h) {
  std::vector<double> s(f.size());
  for (size_t k = 0; k < f.size(); ++k) s[k] = f[k] * f[k];
  return std::sqrt(trapz(s, h));
}

double trace_lp(const std::vector<double>& f, double h, double p) {
  std::vector<double> s(f.size());
  for (size_t k = 0; k < f.size(); ++k) s[k] = std::pow(std::fabs(f[k]), p);
  return std::pow(trapz(s, h), 1.0 / p);
}

double trace_h1(const std::vector<double>& f, double h) {
  const double a = trace_l2(f, h), b = trace_l2(deriv1d(f, h), h);
  return std::sqrt(a * a + b * b);
}

NormReport norm_A(const ScalarField& rho, const FlowParams& p) {
  NormReport r;
  const Grid& g = *rho.g;
  const double se = std::sqrt(p.eps);
  ScalarField rx = apply_dx(rho), ry = apply_dy(rho);
  ScalarField rxx = apply_dx(rx), rxy = apply_dx(ry), ryy = apply_dy(ry);
  r.add("h1", norm_h1(rho));
  r.add("grad_colmax", se * p.eta * colmax_grad_lp(rho, 2.0));
  r.add("rho_xx", p.eps * p.eta * norm_l2(rxx));
  {
    const double a = norm_l2(rxy), b = norm_l2(ryy);
    r.add("grad_rho_y", se * std::sqrt(a * a + b * b));
  }
  r.add("rho_xx_colmax", se * p.eps * p.eta * p.eta * colmax_lp(rxx, 2.0));
  {
    ScalarField m2 = add(sq(rxy), sq(ryy));
    double m = 0.0;
    for (int i = 0; i <= g.nx; ++i) m = std::max(m, col_lp_of(m2, 2.0, i));
    r.add("grad_rho_y_colmax", p.eps * p.eta * m);
  }
  r.add("trace_h1", trace_h1(extract_trace(rho, Side::X0).v, g.hy));
  {
    std::vector<double> tr = extract_trace(rho, Side::X0).v;
    r.add("trace_yy", se * trace_l2(deriv1d_second(tr, g.hy), g.hy));
  }
  return r;
}

NormReport norm_B(const VectorField& w, const FlowParams& p, double pexp) {
  NormReport r;
  const Grid& g = *w.u.g;
  const double se = std::sqrt(p.eps);
  const double e32 = std::pow(p.eps, 1.5);
  const double ewp = std::pow(p.eps, 2.0 - 2.0 / pexp);

  ScalarField curl = curl2d(w);
  ScalarField div = divergence(w);

  r.add("h1", norm_h1v(w));
  r.add("hess", se * norm_hessv(w));
  r.add("curl_h1", se * norm_h1(curl));
  r.add("w2p", ewp * norm_w2pv(w, pexp));
  r.add("curl_w2p", ewp * norm_w2p(curl, pexp));
  {
    std::vector<double> tr = extract_trace(div, Side::X0).v;
    r.add("div_yy_trace", e32 * trace_l2(deriv1d_second(tr, g.hy), g.hy));
  }
  ScalarField div_x = apply_dx(div);
  r.add("div_xx", p.eps * p.eps * p.eta * norm_l2(apply_dx(div_x)));
  {
    ScalarField uy = apply_dy(w.u);
    ScalarField a = apply_dx(apply_dx(uy)), b = apply_dy(apply_dx(uy)),
                c = apply_dy(apply_dy(uy));
    const double na = norm_l2_weighted_lx(a), nb = norm_l2_weighted_lx(b),
                 nc = norm_l2_weighted_lx(c);
    r.add("w_hess_uy", e32 * std::sqrt(na * na + 2.0 * nb * nb + nc * nc));
  }
  {
    ScalarField vx = apply_dx(w.v), vy = apply_dy(w.v);
    ScalarField vxx = apply_dx(vx), vxy = apply_dy(vx), vyy = apply_dy(vy);
    const double n3 = norm_l2_weighted_lx(apply_dx(vxx)),
                 n2 = norm_l2_weighted_lx(apply_dy(vxx)),
                 n1 = norm_l2_weighted_lx(apply_dy(vxy)),
                 n0 = norm_l2_weighted_lx(apply_dy(vyy));
    r.add("w_d3v", e32 * std::sqrt(n3 * n3 + 3.0 * n2 * n2 + 3.0 * n1 * n1 + n0 * n0));
  }
  {
    ScalarField ux = apply_dx(w.u);
    r.add("w_uxxx",
          p.eps * p.eps * p.eta * norm_l2_weighted_lx(apply_dx(apply_dx(ux))));
  }
  {
    ScalarField divy = apply_dy(div);
    const double a = norm_l2(apply_dx(divy)), b = norm_l2(apply_dy(divy));
    r.add("grad_div_y", e32 * std::sqrt(a * a + b * b));
  }
  return r;
}

NormReport norm_X(const VectorField& w, const FlowParams& p) {
  NormReport r;
  const Grid& g = *w.u.g;
  ScalarField curl = curl2d(w);
  ScalarField div = divergence(w);
  r.add("h1", norm_h1v(w));
  r.add("curl_h1", std::sqrt(p.eps) * norm_h1(curl));
  r.add("h2", p.eps * norm_h2v(w));
  {
    std::vector<double> tr = extract_trace(div, Side::X0).v;
    r.add("div_y_trace", p.eps * trace_l2(deriv1d(tr, g.hy), g.hy));
  }
  return r;
}

NormReport norm_Y(const ScalarField& rho, const FlowParams& p) {
  NormReport r;
  const Grid& g = *rho.g;
  r.add("h1", norm_h1(rho));
  {
    std::vector<double> tr = extract_trace(rho, Side::X0).v;
    r.add("rho_y_trace", trace_l2(deriv1d(tr, g.hy), g.hy));
  }
  r.add("grad_colmax", std::sqrt(p.eps) * p.eta * colmax_grad_lp(rho, 2.0));
  return r;
}

}  // namespace pcflow
