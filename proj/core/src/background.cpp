#include "pcflow/background.hpp"

#include <cmath>

namespace pcflow {

void FlowParams::validate() const {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("params: need 0 < eps < 1");
  if (!(gamma > 1.0)) throw std::invalid_argument("params: need gamma > 1");
  if (!(alpha0 > 0.0)) throw std::invalid_argument("params: need alpha0 > 0");
  if (alpha1 < 0.0 || alpha2 < 0.0 || !(alpha1 + alpha2 > 0.0))
    throw std::invalid_argument("params: need alpha1, alpha2 >= 0 and alpha1+alpha2 > 0");
  if (!(sigma > 0.0)) throw std::invalid_argument("params: need sigma > 0");
  if (!(delta > 0.0 && delta <= 0.25))
    throw std::invalid_argument("params: need 0 < delta <= 0.25");
  const double gate = std::pow(eps, 0.5 + 0.5 * delta);
  if (!(eta > 0.0) || eta > gate * (1.0 + 1e-12))
    throw std::invalid_argument("params: need 0 < eta <= eps^{1/2+delta/2}");
}

FlowParams FlowParams::make(double eps, double gamma, double alpha0, double alpha1,
                            double alpha2, double sigma, double delta, double eta) {
  FlowParams p;
  p.eps = eps;
  p.gamma = gamma;
  p.alpha0 = alpha0;
  p.alpha1 = alpha1;
  p.alpha2 = alpha2;
  p.sigma = sigma;
  p.delta = delta;
  p.eta = (eta > 0.0) ? eta : std::pow(eps, 0.5 + delta);
  p.validate();
  return p;
}

double FlowParams::eps_half_plus() const { return std::pow(eps, 0.5 + delta); }
double FlowParams::eps_half_minus() const { return std::pow(eps, 0.5 - delta); }
double FlowParams::eps_mhalf_minus() const { return std::pow(eps, -0.5 - delta); }

BoundaryData BoundaryData::zero(const Grid& g) {
  BoundaryData bd;
  bd.a1.assign(g.ny + 1, 0.0);
  bd.a2.assign(g.ny + 1, 0.0);
  bd.a3.assign(g.ny + 1, 0.0);
  bd.a4.assign(g.ny + 1, 0.0);
  bd.h0.assign(g.ny + 1, 0.0);
  bd.b0.assign(g.nx + 1, 0.0);
  bd.b1.assign(g.nx + 1, 0.0);
  bd.hx = g.hx;
  bd.hy = g.hy;
  return bd;
}

void BoundaryData::scale_all(double c) {
  for (auto* f : {&a1, &a2, &a3, &a4, &h0, &b0, &b1})
    for (double& x : *f) x *= c;
}

double eval_us(const FlowParams& p, double y) {
  return p.alpha0 + p.alpha1 * y + p.alpha2 * y * (2.0 - y);
}

double eval_us_y(const FlowParams& p, double y) {
  return p.alpha1 + 2.0 * p.alpha2 * (1.0 - y);
}

double eval_us_yy(const FlowParams& p) { return -2.0 * p.alpha2; }

double cutoff_chi(double t) {
  if (t < 0.0) throw std::domain_error("cutoff_chi: t must be >= 0");
  if (t <= 0.5) return 1.0;
  if (t >= 1.0) return 0.0;
  const double s = 2.0 * t - 1.0;
  // Rising degree-9 smoothstep S with S(0)=0, S(1)=1 and four vanishing
  // derivatives at both ends; chi = 1 - S.
  const double s5 = s * s * s * s * s;
  const double S = s5 * (126.0 + s * (-420.0 + s * (540.0 + s * (-315.0 + s * 70.0))));
  return 1.0 - S;
}

CompatReport check_compatibility(const BoundaryData& bd, double tol) {
  CompatReport r;
  auto addc = [&](const std::string& name, double defect) {
    r.conditions.push_back({name, std::fabs(defect)});
  };
  addc("a1'(0)=b0(0)", end_deriv(bd.a1, bd.hy, 1, true) - bd.b0.front());
  addc("a1'(2)=b1(0)", end_deriv(bd.a1, bd.hy, 1, false) - bd.b1.front());
  addc("a4(0)=b0'(L)", bd.a4.front() - end_deriv(bd.b0, bd.hx, 1, false));
  addc("a4(2)=b1'(L)", bd.a4.back() - end_deriv(bd.b1, bd.hx, 1, false));
  addc("a2(0)=0", bd.a2.front());
  addc("a2(2)=0", bd.a2.back());
  addc("a3(0)=0", bd.a3.front());
  addc("a3(2)=0", bd.a3.back());
  addc("a4''(0)=0", end_deriv(bd.a4, bd.hy, 2, true));
  addc("a4''(2)=0", end_deriv(bd.a4, bd.hy, 2, false));
  r.max_defect = 0.0;
  for (const auto& c : r.conditions) r.max_defect = std::max(r.max_defect, c.defect);
  r.pass = r.max_defect <= tol;
  return r;
}

ScalarField background_density(const FlowParams& p, const BoundaryData& bd,
                               const Grid& g) {
  ScalarField f(g);
  const double ie2 = 1.0 / (p.eta * p.eta);
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) f.at(i, j) = g.x(i) * bd.h0[j] * ie2;
  return f;
}

double sobolev1d(const std::vector<double>& f, double h, int k) {
  std::vector<double> d = f;
  double s = 0.0;
  for (int m = 0; m <= k; ++m) {
    std::vector<double> sq(d.size());
    for (size_t q = 0; q < d.size(); ++q) sq[q] = d[q] * d[q];
    s += trapz(sq, h);
    if (m < k) d = deriv1d(d, h);
  }
  return std::sqrt(s);
}

double lambda_norm(const BoundaryData& bd, const FlowParams& p) {
  double s = sobolev1d(bd.h0, bd.hy, 3) / (p.eta * p.eta);
  for (const auto* a : {&bd.a1, &bd.a2, &bd.a3, &bd.a4}) s += sobolev1d(*a, bd.hy, 4);
  s += sobolev1d(bd.b0, bd.hx, 4);
  s += sobolev1d(bd.b1, bd.hx, 4);
  return s;
}

namespace {

ScalarField us_field(const FlowParams& p, const Grid& g) {
  ScalarField f(g);
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) f.at(i, j) = eval_us(p, g.y(j));
  return f;
}

}  // namespace

double euler_residual(const FlowParams& p, const Grid& g) {
  ScalarField U = us_field(p, g);
  ScalarField V(g), P(g, 1.0);
  // u.grad(u) + grad(p), div u for (u_s(y), 0, 1).
  ScalarField r1 = add(add(mul(U, apply_dx(U)), mul(V, apply_dy(U))), apply_dx(P));
  ScalarField r2 = add(add(mul(U, apply_dx(V)), mul(V, apply_dy(V))), apply_dy(P));
  ScalarField r3 = divergence({U, V});
  return std::max({max_abs(r1), max_abs(r2), max_abs(r3)});
}

double ns_residual(const FlowParams& p, const Grid& g) {
  ScalarField U = us_field(p, g);
  ScalarField V(g), P(g);
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) P.at(i, j) = 1.0 - 2.0 * p.eps * p.alpha2 * g.x(i);
  ScalarField r1 = sub(add(add(mul(U, apply_dx(U)), mul(V, apply_dy(U))), apply_dx(P)),
                       scale(laplacian(U), p.eps));
  ScalarField r2 = sub(add(add(mul(U, apply_dx(V)), mul(V, apply_dy(V))), apply_dy(P)),
                       scale(laplacian(V), p.eps));
  ScalarField r3 = divergence({U, V});
  return std::max({max_abs(r1), max_abs(r2), max_abs(r3)});
}

}  // namespace pcflow
