#include "pcflow/linsolve.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <Eigen/UmfPackSupport>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fd_internal.hpp"
#include "pcflow/norms.hpp"

namespace pcflow {

namespace {

std::vector<double> us_profile(const FlowParams& p, const Grid& g) {
  std::vector<double> us(g.ny + 1);
  for (int j = 0; j <= g.ny; ++j) us[j] = eval_us(p, g.y(j));
  return us;
}

std::vector<double> usy_profile(const FlowParams& p, const Grid& g) {
  std::vector<double> usy(g.ny + 1);
  for (int j = 0; j <= g.ny; ++j) usy[j] = eval_us_y(p, g.y(j));
  return usy;
}

// Convection vector of the frozen iterate: (us*wu_x + usy*wv, us*wv_x).
VectorField conv_vec(const FlowParams& p, const VectorField& w) {
  const Grid& g = *w.u.g;
  const auto us = us_profile(p, g), usy = usy_profile(p, g);
  ScalarField wux = apply_dx(w.u), wvx = apply_dx(w.v);
  VectorField out(g);
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) {
      out.u.at(i, j) = us[j] * wux.at(i, j) + usy[j] * w.v.at(i, j);
      out.v.at(i, j) = us[j] * wvx.at(i, j);
    }
  return out;
}

// The gradient components of P recovered from the momentum equations:
// R1 = t g1 - t (us wu_x + usy wv) + eps Hc_y,
// R2 = t g2 - t us wv_x - eps Hc_x.
VectorField r_fields(const LinearInput& in, const ScalarField& Hc,
                     const VectorField& w) {
  const Grid& g = *Hc.g;
  const double eps = in.params.eps;
  VectorField cv = conv_vec(in.params, w);
  ScalarField hx = apply_dx(Hc), hy = apply_dy(Hc);
  VectorField r(g);
  for (size_t k = 0; k < r.u.v.size(); ++k) {
    r.u.v[k] = in.t * (in.g.u.v[k] - cv.u.v[k]) + eps * hy.v[k];
    r.v.v[k] = in.t * (in.g.v.v[k] - cv.v.v[k]) - eps * hx.v[k];
  }
  return r;
}

std::array<BCKind, 4> curl_kinds() {
  return {BCKind::Dirichlet, BCKind::Neumann, BCKind::Dirichlet,
          BCKind::Dirichlet};
}

std::array<BCKind, 4> flux_kinds() {
  return {BCKind::Dirichlet, BCKind::Neumann, BCKind::Neumann, BCKind::Neumann};
}

// -eps lap(Hc) = t curl(g - conv(w)): the curl of the momentum system with
// the convection frozen at the iterate w.
ScalarField curl_rhs(const LinearInput& in, const VectorField& w) {
  VectorField cv = conv_vec(in.params, w);
  VectorField forced(sub(in.g.u, cv.u), sub(in.g.v, cv.v));
  return scale(curl2d(forced), in.t);
}

std::array<std::vector<double>, 4> zero_bc(const Grid& g) {
  return {std::vector<double>(g.ny + 1, 0.0), std::vector<double>(g.ny + 1, 0.0),
          std::vector<double>(g.nx + 1, 0.0), std::vector<double>(g.nx + 1, 0.0)};
}

// Inflow trace P0 from the y-ODE P0' = R2(0,.) anchored at
// P0(0) = -2 t eps g0(0,0); row 0 is the anchor, rows 1..ny the
// derivative stencil, so P_y - R2 vanishes on those inflow rows.
std::vector<double> flux_inflow_trace(const LinearInput& in,
                                      const VectorField& r) {
  const Grid& g = *r.u.g;
  const int n = g.ny + 1;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b(n);
  A(0, 0) = 1.0;
  b[0] = -2.0 * in.t * in.params.eps * in.g0.at(0, 0);
  const double c = 1.0 / (2.0 * g.hy);
  for (int j = 1; j < n; ++j) {
    if (j < n - 1) {
      A(j, j - 1) = -c;
      A(j, j + 1) = c;
    } else {
      A(j, j) = 3.0 * c;
      A(j, j - 1) = -4.0 * c;
      A(j, j - 2) = c;
    }
    b[j] = r.v.at(0, j);
  }
  Eigen::VectorXd p0 = A.partialPivLu().solve(b);
  std::vector<double> out(n);
  for (int j = 0; j < n; ++j) out[j] = p0[j];
  return out;
}

ScalarField flux_rhs(const LinearInput& in, const VectorField& w) {
  VectorField cv = conv_vec(in.params, w);
  VectorField forced(sub(in.g.u, cv.u), sub(in.g.v, cv.v));
  // the operator is -lap, and lap P = t div(g - conv) recovers the momentum
  // gradient identities exactly
  return scale(divergence(forced), -in.t);
}

std::array<std::vector<double>, 4> flux_bc(const LinearInput& in,
                                           const VectorField& r) {
  std::array<std::vector<double>, 4> bc;
  bc[0] = flux_inflow_trace(in, r);
  bc[1] = extract_trace(r.u, Side::XL).v;
  bc[2] = extract_trace(r.v, Side::Y0).v;
  bc[3] = extract_trace(r.v, Side::Y2).v;
  return bc;
}

// Velocity with the wall values of v forced to exact zero; inputs are
// required to be within round-off of that already.
VectorField snapped_velocity(const VectorField& ueps) {
  VectorField out = ueps;
  const Grid& g = *ueps.u.g;
  for (int i = 0; i <= g.nx; ++i) {
    out.v.at(i, 0) = 0.0;
    out.v.at(i, g.ny) = 0.0;
  }
  return out;
}

double transport_stencil_defect(const VectorField& vel, double coef,
                                double gamma, const ScalarField& rhs,
                                const std::vector<double>& inflow,
                                const ScalarField& r) {
  const Grid& g = *r.g;
  double d = 0.0;
  for (int j = 0; j <= g.ny; ++j)
    d = std::max(d, std::fabs(r.at(0, j) - inflow[j]));
  for (int i = 1; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) {
      double lhs = gamma * r.at(i, j) +
                   coef * vel.u.at(i, j) * (r.at(i, j) - r.at(i - 1, j)) / g.hx;
      if (j > 0 && j < g.ny)
        lhs += coef * vel.v.at(i, j) * (r.at(i, j + 1) - r.at(i, j - 1)) /
               (2.0 * g.hy);
      d = std::max(d, std::fabs(lhs - rhs.at(i, j)));
    }
  return d;
}

}  // namespace

void validate_input(const LinearInput& in) {
  const Grid& g = *in.g0.g;
  if (!g.same(*in.ueps.u.g) || !g.same(*in.g.u.g))
    throw std::invalid_argument("linsolve: field grids differ");
  in.params.validate();
  if (in.t < 0.0 || in.t > 1.0)
    throw std::invalid_argument("linsolve: homotopy weight outside [0,1]");
  if (in.alpha_mollify < 0.0)
    throw std::invalid_argument("linsolve: negative mollifier width");
  check_finite(in.g0, "g0");
  check_finite(in.g.u, "g1");
  check_finite(in.g.v, "g2");
  check_finite(in.ueps.u, "ueps.u");
  check_finite(in.ueps.v, "ueps.v");
  double vscale = 1.0 + max_abs(in.ueps.v);
  for (int i = 0; i <= g.nx; ++i) {
    if (std::fabs(in.ueps.v.at(i, 0)) > 1e-8 * vscale ||
        std::fabs(in.ueps.v.at(i, g.ny)) > 1e-8 * vscale)
      throw std::invalid_argument(
          "linsolve: transport velocity not wall-parallel");
  }
  for (double u : in.ueps.u.v)
    if (u <= 0.0)
      throw std::invalid_argument("linsolve: transport flow reversal");
}

std::vector<double> mollify_trace(const std::vector<double>& f, double h,
                                  double alpha) {
  if (alpha <= 0.0) return f;
  const int n = static_cast<int>(f.size());
  const int K = static_cast<int>(std::ceil(4.0 * alpha / h));
  std::vector<double> w(2 * K + 1);
  for (int m = -K; m <= K; ++m)
    w[m + K] = std::exp(-0.5 * (m * h) * (m * h) / (alpha * alpha));
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) {
    double s = 0.0, z = 0.0;
    for (int m = -K; m <= K; ++m) {
      const int idx = k + m;
      if (idx < 0 || idx >= n) continue;
      s += w[m + K] * f[idx];
      z += w[m + K];
    }
    out[k] = s / z;
  }
  return out;
}

ScalarField step_curl(const LinearInput& in, const VectorField& w,
                      double solver_tol) {
  const Grid& g = *in.g0.g;
  PoissonSolver solver(g, in.params.eps, {}, curl_kinds(), solver_tol);
  return solver.solve(curl_rhs(in, w), zero_bc(g));
}

std::pair<ScalarField, Trace> step_flux(const LinearInput& in,
                                        const ScalarField& Hc,
                                        const VectorField& w,
                                        double solver_tol) {
  const Grid& g = *in.g0.g;
  VectorField r = r_fields(in, Hc, w);
  auto bc = flux_bc(in, r);
  PoissonSolver solver(g, 1.0, {}, flux_kinds(), solver_tol);
  ScalarField P = solver.solve(flux_rhs(in, w), bc);
  Trace p0;
  p0.side = Side::X0;
  p0.v = bc[0];
  return {P, p0};
}

Trace step_inflow_ode(const LinearInput& in, const ScalarField& Hc) {
  const Grid& g = *in.g0.g;
  const FlowParams& p = in.params;
  const int n = g.ny + 1;
  std::vector<double> hx0 = extract_trace(apply_dx(Hc), Side::X0).v;
  std::vector<double> hxa = mollify_trace(hx0, g.hy, in.alpha_mollify);
  std::vector<double> g0y = extract_trace(apply_dy(in.g0), Side::X0).v;
  std::vector<double> v0 = extract_trace(snapped_velocity(in.ueps).v, Side::X0).v;

  const double c = 2.0 * p.eps * p.eta * p.eta;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b(n);
  const double cy = 1.0 / (2.0 * g.hy);
  for (int j = 0; j < n; ++j) {
    A(j, j) += p.gamma;
    if (j == 0) {
      A(j, 0) += c * (-3.0 * cy) * v0[0];
      A(j, 1) += c * (4.0 * cy) * v0[1];
      A(j, 2) += c * (-cy) * v0[2];
    } else if (j == n - 1) {
      A(j, n - 1) += c * (3.0 * cy) * v0[n - 1];
      A(j, n - 2) += c * (-4.0 * cy) * v0[n - 2];
      A(j, n - 3) += c * cy * v0[n - 3];
    } else {
      A(j, j - 1) += c * (-cy) * v0[j - 1];
      A(j, j + 1) += c * cy * v0[j + 1];
    }
    b[j] = in.t * in.g.v.at(0, j) + 2.0 * p.eps * in.t * g0y[j] -
           p.eps * hxa[j];
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  Eigen::VectorXd r = lu.solve(b);
  if (!r.allFinite() || (A * r - b).lpNorm<Eigen::Infinity>() >
                            1e-8 * (b.lpNorm<Eigen::Infinity>() + 1.0))
    throw std::runtime_error("linsolve: inflow ODE solve failed");
  Trace out;
  out.side = Side::X0;
  out.v.assign(r.data(), r.data() + n);
  return out;
}

ScalarField transport_solve(const VectorField& vel, double coef, double gamma,
                            const ScalarField& rhs,
                            const std::vector<double>& inflow) {
  const Grid& g = *rhs.g;
  if (static_cast<int>(inflow.size()) != g.ny + 1)
    throw std::invalid_argument("transport: inflow length mismatch");
  for (int i = 0; i <= g.nx; ++i)
    if (vel.v.at(i, 0) != 0.0 || vel.v.at(i, g.ny) != 0.0)
      throw std::invalid_argument("transport: nonzero wall-normal velocity");
  for (double u : vel.u.v)
    if (u <= 0.0) throw std::invalid_argument("transport: flow reversal");

  const int n = g.ny + 1;
  ScalarField r(g);
  for (int j = 0; j < n; ++j) r.at(0, j) = inflow[j];
  std::vector<double> a(n), b(n), c(n), d(n);
  for (int i = 1; i <= g.nx; ++i) {
    for (int j = 0; j < n; ++j) {
      const double ax = coef * vel.u.at(i, j) / g.hx;
      const double ay = coef * vel.v.at(i, j) / (2.0 * g.hy);
      a[j] = (j > 0 && j < n - 1) ? -ay : 0.0;
      c[j] = (j > 0 && j < n - 1) ? ay : 0.0;
      b[j] = gamma + ax;
      d[j] = rhs.at(i, j) + ax * r.at(i - 1, j);
    }
    // Thomas sweep
    for (int j = 1; j < n; ++j) {
      const double m = a[j] / b[j - 1];
      b[j] -= m * c[j - 1];
      d[j] -= m * d[j - 1];
    }
    r.at(i, n - 1) = d[n - 1] / b[n - 1];
    for (int j = n - 2; j >= 0; --j)
      r.at(i, j) = (d[j] - c[j] * r.at(i, j + 1)) / b[j];
  }
  check_finite(r, "transport solution");
  return r;
}

ScalarField step_transport(const LinearInput& in, const ScalarField& P,
                           const Trace& rho0y) {
  const Grid& g = *in.g0.g;
  const FlowParams& p = in.params;
  ScalarField rhs(g);
  for (size_t k = 0; k < rhs.v.size(); ++k)
    rhs.v[k] = P.v[k] + 2.0 * in.t * p.eps * in.g0.v[k];
  std::vector<double> inflow(g.ny + 1, 0.0);
  for (int j = 1; j <= g.ny; ++j)
    inflow[j] = inflow[j - 1] + 0.5 * g.hy * (rho0y.v[j - 1] + rho0y.v[j]);
  return transport_solve(snapped_velocity(in.ueps), 2.0 * p.eps * p.eta * p.eta,
                         p.gamma, rhs, inflow);
}

namespace {

std::array<BCKind, 4> phi_kinds() {
  return {BCKind::Neumann, BCKind::Dirichlet, BCKind::Neumann, BCKind::Neumann};
}

LinearOutput assemble_velocity(const LinearInput& in, const ScalarField& Hc,
                               const ScalarField& P, const ScalarField& rho,
                               const PoissonSolver& phi_solver,
                               const PoissonSolver& psi_solver) {
  const Grid& g = *in.g0.g;
  const FlowParams& p = in.params;

  // 2 eps lap(phi) = -P + gamma rho
  ScalarField phi_rhs(g);
  for (size_t k = 0; k < phi_rhs.v.size(); ++k)
    phi_rhs.v[k] = P.v[k] - p.gamma * rho.v[k];
  ScalarField phi = phi_solver.solve(phi_rhs, zero_bc(g));

  // lap(psi) = Hc
  ScalarField psi = psi_solver.solve(scale(Hc, -1.0), zero_bc(g));

  LinearOutput out;
  out.u = add(apply_dy(psi), apply_dx(phi));
  out.v = sub(apply_dy(phi), apply_dx(psi));
  out.rho = rho;
  out.Hc = Hc;
  out.P = P;
  out.phi = phi;
  out.psi = psi;

  // reconstruction identities
  ScalarField curl_defect = sub(curl2d({out.u, out.v}), Hc);
  ScalarField div_defect = divergence({out.u, out.v});
  for (size_t k = 0; k < div_defect.v.size(); ++k)
    div_defect.v[k] =
        2.0 * p.eps * div_defect.v[k] - (p.gamma * rho.v[k] - P.v[k]);
  auto interior_max = [&](const ScalarField& f) {
    double m = 0.0;
    for (int i = 1; i < g.nx; ++i)
      for (int j = 1; j < g.ny; ++j) m = std::max(m, std::fabs(f.at(i, j)));
    return m;
  };
  out.residual_report.recon_curl = interior_max(curl_defect);
  out.residual_report.recon_div = interior_max(div_defect);
  out.residual_report.recon_curl_full = max_abs(curl_defect);
  out.residual_report.recon_div_full = max_abs(div_defect);

  // the eight boundary conditions
  ScalarField uy = apply_dy(out.u), vx = apply_dx(out.v);
  ScalarField curl_x = apply_dx(curl2d({out.u, out.v}));
  auto trace_max = [&](const ScalarField& f, Side s) {
    double m = 0.0;
    for (double val : extract_trace(f, s).v) m = std::max(m, std::fabs(val));
    return m;
  };
  out.bc_report = {
      {"u_inflow", trace_max(out.u, Side::X0)},
      {"vx_inflow", trace_max(vx, Side::X0)},
      {"v_outflow", trace_max(out.v, Side::XL)},
      {"curlx_outflow", trace_max(curl_x, Side::XL)},
      {"uy_wall0", trace_max(uy, Side::Y0)},
      {"uy_wall2", trace_max(uy, Side::Y2)},
      {"v_wall0", trace_max(out.v, Side::Y0)},
      {"v_wall2", trace_max(out.v, Side::Y2)},
  };
  return out;
}

}  // namespace

// Implicit vorticity block: the coupled sparse system in (H, psi) with
// psi's convection contribution to the curl equation kept on the left.
// The psi -> convection -> curl -> H -> psi loop carries the 1/eps gain
// that makes plain sweep substitution diverge; with it implicit, the
// remaining explicit couplings are mild and a short GMRES run resolves the
// full fixed point. The matrix depends only on grid, eps, t and the
// background profile, so one factorization serves a whole Picard run.
namespace vort {

constexpr int hH = 0, hS = 1;
inline int vi(int f, int id) { return 2 * id + f; }

struct HPsiSystem {
  const Grid* g = nullptr;
  int dim = 0;
  double solver_tol = 1e-10;
  fd::SpMat A;
  Eigen::VectorXd dr, dc;  // row/column equilibration
  fd::SpMat As;
  Eigen::UmfPackLU<fd::SpMat> lu;

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    const Eigen::VectorXd bs = dr.asDiagonal() * b;
    Eigen::VectorXd y = lu.solve(bs);
    return dc.asDiagonal() * y;
  }
};

void assemble_hpsi(const LinearInput& in, double solver_tol, HPsiSystem& c) {
  const Grid& g = *in.g0.g;
  const FlowParams& p = in.params;
  const double eps = p.eps;
  const int N = g.npts();
  const int ny1 = g.ny + 1;
  const int dim = 2 * N;

  using fd::SpMat;
  using fd::SpMatR;
  const SpMat Axm = fd::deriv_matrix(g.nx + 1, g.hx);
  const SpMat Aym = fd::deriv_matrix(g.ny + 1, g.hy);
  const SpMat Dx = Eigen::kroneckerProduct(Axm, fd::identity(ny1)).eval();
  const SpMat Dy =
      Eigen::kroneckerProduct(fd::identity(g.nx + 1), Aym).eval();
  const SpMat Lap = (Dx * Dx + Dy * Dy).eval();

  const auto us = us_profile(p, g), usy = usy_profile(p, g);
  SpMat Us(N, N), Usy(N, N);
  {
    std::vector<fd::Triplet> tu, ty;
    for (int i = 0; i <= g.nx; ++i)
      for (int j = 0; j <= g.ny; ++j) {
        tu.push_back({g.id(i, j), g.id(i, j), us[j]});
        ty.push_back({g.id(i, j), g.id(i, j), usy[j]});
      }
    Us.setFromTriplets(tu.begin(), tu.end());
    Usy.setFromTriplets(ty.begin(), ty.end());
  }

  // curl of the psi part of the convection: the velocity of psi is
  // (Dy psi, -Dx psi), its convection (Us Dx Dy - Usy Dx, -Us Dx Dx) psi,
  // and KS = Dy cu - Dx cv.
  const SpMat CuS = (Us * Dx * Dy - Usy * Dx).eval();
  const SpMat CvS = (-(Us * Dx * Dx)).eval();
  const SpMatR KS((Dy * CuS - Dx * CvS).eval());
  const SpMatR LapR(Lap), DxR(Dx);

  std::vector<fd::Triplet> rows;
  rows.reserve(static_cast<size_t>(dim) * 16);
  auto copy_row = [&](int row, const SpMatR& M, int src, int field, double s) {
    for (SpMatR::InnerIterator it(M, src); it; ++it)
      rows.push_back(
          {row, 2 * static_cast<int>(it.col()) + field, s * it.value()});
  };

  const auto curl_bc = curl_kinds();
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) {
      const int id = g.id(i, j);
      const auto info = fd::owning_side(g, i, j, curl_bc);
      // H row: -eps lap(H) + t KS psi = t curl(g - conv(grad phi))
      {
        const int r = vi(hH, id);
        if (!info.boundary) {
          copy_row(r, LapR, id, hH, -eps);
          copy_row(r, KS, id, hS, in.t);
        } else if (curl_bc[static_cast<int>(info.side)] == BCKind::Dirichlet) {
          rows.push_back({r, vi(hH, id), 1.0});
        } else {
          copy_row(r, DxR, id, hH, 1.0);
        }
      }
      // psi row: -lap(psi) + H = 0
      {
        const int r = vi(hS, id);
        if (!info.boundary) {
          copy_row(r, LapR, id, hS, -1.0);
          rows.push_back({r, vi(hH, id), 1.0});
        } else if (curl_bc[static_cast<int>(info.side)] == BCKind::Dirichlet) {
          rows.push_back({r, vi(hS, id), 1.0});
        } else {
          copy_row(r, DxR, id, hS, 1.0);
        }
      }
    }

  c.g = &g;
  c.dim = dim;
  c.solver_tol = solver_tol;
  c.A.resize(dim, dim);
  c.A.setFromTriplets(rows.begin(), rows.end());

  // Equilibrate: rows span O(1) anchors to O(1/h^3) composed stencils,
  // which defeats threshold pivoting. Factor Dr A Dc.
  c.dr = Eigen::VectorXd::Zero(dim);
  {
    SpMatR Ar(c.A);
    for (int r = 0; r < dim; ++r) {
      double m = 0.0;
      for (SpMatR::InnerIterator it(Ar, r); it; ++it)
        m = std::max(m, std::fabs(it.value()));
      c.dr[r] = (m > 0.0) ? 1.0 / m : 1.0;
    }
  }
  c.dc = Eigen::VectorXd::Zero(dim);
  for (int col = 0; col < dim; ++col) {
    double m = 0.0;
    for (SpMat::InnerIterator it(c.A, col); it; ++it)
      m = std::max(m, c.dr[it.row()] * std::fabs(it.value()));
    c.dc[col] = (m > 0.0) ? 1.0 / m : 1.0;
  }
  c.As = (c.dr.asDiagonal() * c.A * c.dc.asDiagonal()).eval();
  c.lu.umfpackControl()[UMFPACK_ORDERING] = UMFPACK_ORDERING_METIS;
  c.lu.compute(c.As);
  if (c.lu.info() != Eigen::Success)
    throw std::runtime_error("linsolve: vorticity block factorization failed");
}

}  // namespace vort

LinearOutput step_helmholtz(const LinearInput& in, const ScalarField& Hc,
                            const ScalarField& P, const ScalarField& rho,
                            double solver_tol) {
  const Grid& g = *in.g0.g;
  PoissonSolver phi_solver(g, 2.0 * in.params.eps, {}, phi_kinds(), solver_tol);
  PoissonSolver psi_solver(g, 1.0, {}, curl_kinds(), solver_tol);
  return assemble_velocity(in, Hc, P, rho, phi_solver, psi_solver);
}

struct LinearWorkspace::Impl {
  Grid grid;
  double eps = 0.0, t = -1.0, tol = 0.0;
  double a0 = 0.0, a1 = 0.0, a2 = 0.0;
  bool ready = false;
  std::unique_ptr<PoissonSolver> curl, flux, phi, psi;
  vort::HPsiSystem hpsi;
  Eigen::VectorXd prev_phi;  // warm start for the phi fixed point
};

LinearWorkspace::LinearWorkspace() : impl(new Impl) {}
LinearWorkspace::~LinearWorkspace() = default;

LinearOutput solve_linear(const LinearInput& in, const SolveOptions& opt,
                          LinearWorkspace* ws) {
  validate_input(in);
  const Grid& g = *in.g0.g;
  const FlowParams& p = in.params;
  const int N = g.npts();

  LinearWorkspace local;
  if (!ws) ws = &local;
  LinearWorkspace::Impl& W = *ws->impl;
  if (!W.ready || !W.grid.same(g) || W.eps != p.eps || W.t != in.t ||
      W.tol != opt.solver_tol || W.a0 != p.alpha0 || W.a1 != p.alpha1 ||
      W.a2 != p.alpha2) {
    W.ready = false;
    W.grid = g;
    W.eps = p.eps;
    W.t = in.t;
    W.tol = opt.solver_tol;
    W.a0 = p.alpha0;
    W.a1 = p.alpha1;
    W.a2 = p.alpha2;
    W.curl = std::make_unique<PoissonSolver>(W.grid, p.eps,
                                             std::vector<double>{},
                                             curl_kinds(), opt.solver_tol);
    W.flux = std::make_unique<PoissonSolver>(W.grid, 1.0,
                                             std::vector<double>{},
                                             flux_kinds(), opt.solver_tol);
    W.phi = std::make_unique<PoissonSolver>(W.grid, 2.0 * p.eps,
                                            std::vector<double>{},
                                            phi_kinds(), opt.solver_tol);
    W.psi = std::make_unique<PoissonSolver>(W.grid, 1.0,
                                            std::vector<double>{},
                                            curl_kinds(), opt.solver_tol);
    LinearInput shim;
    shim.params = p;
    shim.t = in.t;
    shim.g0 = ScalarField(W.grid);
    shim.g = VectorField(W.grid);
    shim.ueps = VectorField(W.grid);
    vort::assemble_hpsi(shim, opt.solver_tol, W.hpsi);
    W.ready = true;
  }

  int sweeps = 0;
  Trace p0;
  auto sweep = [&](const VectorField& w) {
    ++sweeps;
    ScalarField Hc = W.curl->solve(curl_rhs(in, w), zero_bc(g));
    VectorField r = r_fields(in, Hc, w);
    auto bc = flux_bc(in, r);
    ScalarField P = W.flux->solve(flux_rhs(in, w), bc);
    p0.side = Side::X0;
    p0.v = bc[0];
    Trace r0y = step_inflow_ode(in, Hc);
    ScalarField rho = step_transport(in, P, r0y);
    LinearOutput o = assemble_velocity(in, Hc, P, rho, *W.phi, *W.psi);
    o.rho0y = r0y;
    return o;
  };

  // Half-implicit sweep on the velocity potential phi: the vorticity block
  // is solved with psi's convection implicit and phi's explicit, then flux,
  // transport and the phi solve run staged with the newest psi. The new
  // pair depends on phi alone, so the outer fixed point lives in phi.
  const auto kinds = curl_kinds();
  auto stilde = [&](const ScalarField& phi0) {
    ++sweeps;
    VectorField uphi(apply_dx(phi0), apply_dy(phi0));
    ScalarField bH = curl_rhs(in, uphi);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(W.hpsi.dim);
    for (int i = 0; i <= g.nx; ++i)
      for (int j = 0; j <= g.ny; ++j)
        if (!fd::owning_side(g, i, j, kinds).boundary)
          b[vort::vi(vort::hH, g.id(i, j))] = bH.at(i, j);
    Eigen::VectorXd x = W.hpsi.solve(b);
    ScalarField Hc(g), psi1(g);
    for (int k = 0; k < N; ++k) {
      Hc.v[k] = x[vort::vi(vort::hH, k)];
      psi1.v[k] = x[vort::vi(vort::hS, k)];
    }
    VectorField w_half(add(apply_dy(psi1), apply_dx(phi0)),
                       sub(apply_dy(phi0), apply_dx(psi1)));
    VectorField r = r_fields(in, Hc, w_half);
    auto bc = flux_bc(in, r);
    ScalarField P = W.flux->solve(flux_rhs(in, w_half), bc);
    Trace r0y = step_inflow_ode(in, Hc);
    ScalarField rho = step_transport(in, P, r0y);
    ScalarField phi_rhs(g);
    for (size_t k = 0; k < phi_rhs.v.size(); ++k)
      phi_rhs.v[k] = P.v[k] - p.gamma * rho.v[k];
    ScalarField phi1 = W.phi->solve(phi_rhs, zero_bc(g));
    return std::make_pair(phi1, psi1);
  };
  auto apply_phi = [&](const Eigen::VectorXd& v) {
    ScalarField a(g);
    for (int k = 0; k < N; ++k) a.v[k] = v[k];
    ScalarField pa = stilde(a).first;
    Eigen::VectorXd o(N);
    for (int k = 0; k < N; ++k) o[k] = pa.v[k];
    return o;
  };

  // The map phi -> phi' is affine with a mild gain, so GMRES on
  // (I - A) phi = b converges in a handful of iterations; the previous
  // solution on this workspace warm-starts it.
  VectorField w_used(g);
  const Eigen::VectorXd bt = apply_phi(Eigen::VectorXd::Zero(N));
  const double bnorm = bt.norm();
  if (bnorm > 0.0) {
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(N);
    Eigen::VectorXd r0 = bt;
    if (W.prev_phi.size() == N) {
      x0 = W.prev_phi;
      r0 = apply_phi(x0) - x0;  // b - (I - A) x0
    }
    const int m = opt.max_iters;
    Eigen::MatrixXd V(N, m + 1);
    Eigen::MatrixXd Hm = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd cs = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd sn = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd gv = Eigen::VectorXd::Zero(m + 1);
    Eigen::VectorXd xs = x0;
    const double r0norm = r0.norm();
    if (r0norm > 1e-13 * bnorm) {
      V.col(0) = r0 / r0norm;
      gv[0] = r0norm;
      int kdim = 0;
      for (int k = 0; k < m; ++k) {
        Eigen::VectorXd w = V.col(k) - apply_phi(V.col(k)) + bt;
        for (int r = 0; r <= k; ++r) {
          Hm(r, k) = V.col(r).dot(w);
          w -= Hm(r, k) * V.col(r);
        }
        Hm(k + 1, k) = w.norm();
        if (Hm(k + 1, k) > 0.0) V.col(k + 1) = w / Hm(k + 1, k);
        for (int r = 0; r < k; ++r) {
          const double h0 = cs[r] * Hm(r, k) + sn[r] * Hm(r + 1, k);
          Hm(r + 1, k) = -sn[r] * Hm(r, k) + cs[r] * Hm(r + 1, k);
          Hm(r, k) = h0;
        }
        const double d = std::hypot(Hm(k, k), Hm(k + 1, k));
        if (d == 0.0) break;
        cs[k] = Hm(k, k) / d;
        sn[k] = Hm(k + 1, k) / d;
        Hm(k, k) = d;
        Hm(k + 1, k) = 0.0;
        gv[k + 1] = -sn[k] * gv[k];
        gv[k] = cs[k] * gv[k];
        kdim = k + 1;
        if (std::fabs(gv[k + 1]) <= 1e-13 * bnorm) break;
      }
      const Eigen::VectorXd yk = Hm.topLeftCorner(kdim, kdim)
                                     .triangularView<Eigen::Upper>()
                                     .solve(gv.head(kdim));
      xs += V.leftCols(kdim) * yk;
    }
    W.prev_phi = xs;
    ScalarField phis(g);
    for (int k = 0; k < N; ++k) phis.v[k] = xs[k];
    auto [phif, psif] = stilde(phis);
    w_used = VectorField(add(apply_dy(psif), apply_dx(phif)),
                         sub(apply_dy(phif), apply_dx(psif)));
  } else {
    W.prev_phi = Eigen::VectorXd::Zero(N);
  }
  LinearOutput out = sweep(w_used);
  const ScalarField& Hc = out.Hc;
  const ScalarField& P = out.P;
  const ScalarField& rho = out.rho;
  const Trace& r0y = out.rho0y;
  out.sweeps = sweeps;
  {
    VectorField delta(sub(out.u, w_used.u), sub(out.v, w_used.v));
    out.last_update = norm_X(delta, p).total;
  }
  if (!(out.last_update < opt.inner_tol))
    throw std::runtime_error(
        "linsolve: inner fixed point did not converge, last update " +
        std::to_string(out.last_update));

  // momentum residual through the gauge vector F = (P_x - R1, P_y - R2)
  VectorField r = r_fields(in, Hc, w_used);
  VectorField F(sub(apply_dx(P), r.u), sub(apply_dy(P), r.v));
  ResidualReport& rr = out.residual_report;
  rr.gauge = harmonic_gauge_check(F);
  {
    double mx = 0.0, my = 0.0;
    for (int i = 1; i < g.nx; ++i)
      for (int j = 1; j < g.ny; ++j) {
        mx = std::max(mx, std::fabs(F.u.at(i, j)));
        my = std::max(my, std::fabs(F.v.at(i, j)));
      }
    rr.mom_x = mx;
    rr.mom_y = my;
  }
  const double scale_g =
      1.0 + max_abs(in.g.u) + max_abs(in.g.v) + max_abs(in.g0);
  if (rr.gauge.div_max_interior > opt.consistency_tol * scale_g ||
      rr.gauge.curl_max_interior > opt.consistency_tol * scale_g)
    throw std::runtime_error("linsolve: gauge consistency check failed");

  // independent field-operator momentum residuals on the assembled fields
  {
    ScalarField curl = curl2d({out.u, out.v});
    ScalarField div = divergence({out.u, out.v});
    ScalarField curl_y = apply_dy(curl), curl_x = apply_dx(curl);
    ScalarField div_x = apply_dx(div), div_y = apply_dy(div);
    ScalarField ux = apply_dx(out.u), vx = apply_dx(out.v);
    ScalarField rx = apply_dx(rho), ry = apply_dy(rho);
    const auto us = us_profile(p, g), usy = usy_profile(p, g);
    double mx = 0.0, my = 0.0, mm = 0.0;
    for (int i = 1; i < g.nx; ++i)
      for (int j = 1; j < g.ny; ++j) {
        const double e1 = in.t * us[j] * ux.at(i, j) +
                          in.t * usy[j] * out.v.at(i, j) -
                          p.eps * curl_y.at(i, j) - 2.0 * p.eps * div_x.at(i, j) +
                          p.gamma * rx.at(i, j) - in.t * in.g.u.at(i, j);
        const double e2 = in.t * us[j] * vx.at(i, j) +
                          p.eps * curl_x.at(i, j) - 2.0 * p.eps * div_y.at(i, j) +
                          p.gamma * ry.at(i, j) - in.t * in.g.v.at(i, j);
        const double e0 = div.at(i, j) +
                          p.eta * p.eta * (in.ueps.u.at(i, j) * rx.at(i, j) +
                                           in.ueps.v.at(i, j) * ry.at(i, j)) -
                          in.t * in.g0.at(i, j);
        mx = std::max(mx, std::fabs(e1));
        my = std::max(my, std::fabs(e2));
        mm = std::max(mm, std::fabs(e0));
      }
    rr.mom_x_fieldop = mx;
    rr.mom_y_fieldop = my;
    rr.mass_fieldop = mm;
  }

  // mass residual through the transport stencils (round-off level)
  {
    ScalarField rhs(g);
    for (size_t k = 0; k < rhs.v.size(); ++k)
      rhs.v[k] = P.v[k] + 2.0 * in.t * p.eps * in.g0.v[k];
    std::vector<double> inflow(g.ny + 1, 0.0);
    for (int j = 1; j <= g.ny; ++j)
      inflow[j] = inflow[j - 1] + 0.5 * g.hy * (r0y.v[j - 1] + r0y.v[j]);
    rr.mass = transport_stencil_defect(snapped_velocity(in.ueps),
                                       2.0 * p.eps * p.eta * p.eta, p.gamma,
                                       rhs, inflow, rho);
  }

  // recovered inflow identity diagnostic
  {
    std::vector<double> hx0 = extract_trace(apply_dx(Hc), Side::X0).v;
    std::vector<double> hxa = mollify_trace(hx0, g.hy, in.alpha_mollify);
    std::vector<double> rx0 = extract_trace(apply_dx(rho), Side::X0).v;
    double cum = 0.0, m = 0.0;
    for (int j = 0; j <= g.ny; ++j) {
      if (j > 0)
        cum += 0.5 * g.hy *
               ((hxa[j - 1] - hx0[j - 1]) + (hxa[j] - hx0[j]));
      const double lhs = 2.0 * p.eta * p.eta * rx0[j];
      m = std::max(m, std::fabs(lhs - cum / in.ueps.u.at(0, j)));
    }
    rr.inflow_identity = m;
  }

  // inflow corner compatibility of the flux trace
  {
    std::vector<double> dp0 = deriv1d(p0.v, g.hy);
    VectorField rr2 = r_fields(in, Hc, w_used);
    out.bc_report.push_back(
        {"p0_corner_compat", std::fabs(dp0[0] - rr2.v.at(0, 0))});
  }
  return out;
}

}  // namespace pcflow
