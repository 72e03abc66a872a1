#include "pcflow/elliptic.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>

#include "fd_internal.hpp"

namespace pcflow {

using fd::deriv_matrix;
using fd::identity;
using fd::NodeSideInfo;
using fd::owning_side;
using fd::side_index;
using fd::SpMat;
using fd::SpMatR;
using fd::Triplet;

struct PoissonSolver::Impl {
  const Grid* g = nullptr;
  double diffusion = 1.0;
  std::vector<double> advect;
  std::array<BCKind, 4> kinds;
  double tol = 1e-10;
  bool pure_neumann = false;
  SpMat A;
  SpMatR Arow;
  Eigen::SparseLU<SpMat> lu;
  double a_inf_norm = 0.0;
};

PoissonSolver::PoissonSolver(const Grid& g, double diffusion,
                             std::vector<double> advect,
                             std::array<BCKind, 4> kinds, double solver_tol)
    : impl_(std::make_unique<Impl>()) {
  Impl& im = *impl_;
  im.g = &g;
  im.diffusion = diffusion;
  im.advect = std::move(advect);
  im.kinds = kinds;
  im.tol = solver_tol;
  if (!im.advect.empty() && static_cast<int>(im.advect.size()) != g.ny + 1)
    throw std::invalid_argument("poisson: advect must have ny+1 entries");
  if (!(diffusion > 0.0)) throw std::invalid_argument("poisson: diffusion <= 0");

  const int n = g.npts();
  SpMat Ax = deriv_matrix(g.nx + 1, g.hx), Ay = deriv_matrix(g.ny + 1, g.hy);
  SpMat Dx = Eigen::kroneckerProduct(Ax, identity(g.ny + 1)).eval();
  SpMat Dy = Eigen::kroneckerProduct(identity(g.nx + 1), Ay).eval();
  SpMat lap = (Dx * Dx + Dy * Dy).eval();

  SpMat M = (-diffusion * lap).eval();
  if (!im.advect.empty()) {
    SpMat adv(n, n);
    std::vector<Triplet> t;
    for (int i = 0; i <= g.nx; ++i)
      for (int j = 0; j <= g.ny; ++j)
        t.push_back({g.id(i, j), g.id(i, j), im.advect[j]});
    adv.setFromTriplets(t.begin(), t.end());
    M = (M + adv * Dx).eval();
  }

  SpMatR Mr(M), Dxr(Dx), Dyr(Dy);
  im.pure_neumann = true;
  for (BCKind k : kinds)
    if (k == BCKind::Dirichlet) im.pure_neumann = false;

  std::vector<Triplet> rows;
  auto copy_row = [&](const SpMatR& src, int r) {
    for (SpMatR::InnerIterator it(src, r); it; ++it)
      rows.push_back({r, static_cast<int>(it.col()), it.value()});
  };
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) {
      const int r = g.id(i, j);
      NodeSideInfo info = owning_side(g, i, j, kinds);
      if (!info.boundary) {
        copy_row(Mr, r);
        continue;
      }
      const BCKind k = kinds[static_cast<int>(info.side)];
      if (k == BCKind::Dirichlet) {
        rows.push_back({r, r, 1.0});
      } else if (info.side == Side::X0 || info.side == Side::XL) {
        copy_row(Dxr, r);
      } else {
        copy_row(Dyr, r);
      }
    }
  if (im.pure_neumann) {
    // Bordered system: an extra unknown spreads the residual of the singular
    // system over every equation, and an extra mean-zero row fixes the gauge.
    // Pinning a single node instead concentrates the O(h^2) discrete
    // incompatibility there and pollutes the whole solution.
    for (int r = 0; r < n; ++r) rows.push_back({r, n, 1.0});
    for (int i = 0; i <= g.nx; ++i)
      for (int j = 0; j <= g.ny; ++j) {
        double w = g.hx * g.hy;
        if (i == 0 || i == g.nx) w *= 0.5;
        if (j == 0 || j == g.ny) w *= 0.5;
        rows.push_back({n, g.id(i, j), w});
      }
  }
  const int dim = im.pure_neumann ? n + 1 : n;
  im.A.resize(dim, dim);
  im.A.setFromTriplets(rows.begin(), rows.end());
  im.Arow = SpMatR(im.A);
  for (int r = 0; r < dim; ++r) {
    double s = 0.0;
    for (SpMatR::InnerIterator it(im.Arow, r); it; ++it) s += std::fabs(it.value());
    im.a_inf_norm = std::max(im.a_inf_norm, s);
  }
  im.lu.compute(im.A);
  if (im.lu.info() != Eigen::Success)
    throw std::runtime_error("poisson: singular or ill-posed operator");
}

PoissonSolver::~PoissonSolver() = default;
PoissonSolver::PoissonSolver(PoissonSolver&&) noexcept = default;
PoissonSolver& PoissonSolver::operator=(PoissonSolver&&) noexcept = default;

ScalarField PoissonSolver::solve(
    const ScalarField& rhs, const std::array<std::vector<double>, 4>& bcdata) const {
  const Impl& im = *impl_;
  const Grid& g = *im.g;
  if (!rhs.g->same(g))
    throw std::invalid_argument("poisson: rhs grid mismatch");
  for (int s = 0; s < 4; ++s) {
    const size_t want = (s < 2) ? g.ny + 1 : g.nx + 1;
    if (bcdata[s].size() != want)
      throw std::invalid_argument("poisson: bc data length mismatch");
  }
  const int n = g.npts();
  const int dim = im.pure_neumann ? n + 1 : n;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) {
      const int r = g.id(i, j);
      NodeSideInfo info = owning_side(g, i, j, im.kinds);
      if (!info.boundary)
        b[r] = rhs.at(i, j);
      else
        b[r] = bcdata[static_cast<int>(info.side)][side_index(info.side, i, j)];
    }

  if (im.pure_neumann && im.advect.empty()) {
    // -d*lap(u) = rhs needs  int(rhs) = -d * contour integral of du/dn.
    double vol = 0.0;
    {
      ScalarField interior(g);
      for (int i = 1; i < g.nx; ++i)
        for (int j = 1; j < g.ny; ++j) interior.at(i, j) = rhs.at(i, j);
      vol = integrate(interior);
    }
    const double flux = trapz(bcdata[1], g.hy) - trapz(bcdata[0], g.hy) +
                        trapz(bcdata[3], g.hx) - trapz(bcdata[2], g.hx);
    const double mismatch = vol + im.diffusion * flux;
    double scale = std::fabs(vol) + im.diffusion * std::fabs(flux) + 1.0;
    if (std::fabs(mismatch) > 1e-6 * scale)
      throw std::runtime_error("poisson: incompatible pure-Neumann data");
  }

  Eigen::VectorXd x = im.lu.solve(b);
  for (int pass = 0; pass < 2; ++pass) x += im.lu.solve(b - im.A * x);
  Eigen::VectorXd r = im.A * x - b;
  const double scale =
      b.lpNorm<Eigen::Infinity>() + im.a_inf_norm * x.lpNorm<Eigen::Infinity>();
  if (r.lpNorm<Eigen::Infinity>() > im.tol * (scale + 1.0))
    throw std::runtime_error("poisson: solve residual exceeds tolerance");

  // bind the result to the caller's grid so it outlives the solver
  ScalarField out(*rhs.g);
  for (int k = 0; k < n; ++k) out.v[k] = x[k];
  if (im.pure_neumann) {
    const double mean = integrate(out) / (2.0 * g.L);
    for (double& vv : out.v) vv -= mean;
  }
  check_finite(out, "poisson solution");
  return out;
}

ScalarField solve_poisson(const Grid& g, const EllipticProblem& p,
                          double solver_tol) {
  std::array<BCKind, 4> kinds;
  std::array<std::vector<double>, 4> data;
  for (int s = 0; s < 4; ++s) {
    kinds[s] = p.bc[s].kind;
    data[s] = p.bc[s].data;
  }
  PoissonSolver solver(g, p.diffusion, p.advect, kinds, solver_tol);
  return solver.solve(p.rhs, data);
}

namespace {

// Unknown indexing for the biharmonic system: physical nodes first, then
// ghost layers per side. layers[s] is 1 for value sides, 2 otherwise.
struct BhIndex {
  const Grid* g;
  std::array<int, 4> layers;
  std::array<std::array<int, 2>, 4> base;  // base[s][layer-1]
  int total = 0;

  BhIndex(const Grid& g_, const std::array<int, 4>& layers_) : g(&g_), layers(layers_) {
    int off = g->npts();
    for (int s = 0; s < 4; ++s)
      for (int l = 0; l < 2; ++l) {
        base[s][l] = -1;
        if (l < layers[s]) {
          base[s][l] = off;
          off += (s < 2) ? g->ny + 1 : g->nx + 1;
        }
      }
    total = off;
  }

  int ghost(int s, int layer, int k) const {
    const int b = base[s][layer - 1];
    if (b < 0) throw std::logic_error("biharmonic: missing ghost layer");
    return b + k;
  }

  int operator()(int i, int j) const {
    const int nx = g->nx, ny = g->ny;
    if (i >= 0 && i <= nx && j >= 0 && j <= ny) return g->id(i, j);
    if (i == -1) return ghost(0, 1, j);
    if (i == -2) return ghost(0, 2, j);
    if (i == nx + 1) return ghost(1, 1, j);
    if (i == nx + 2) return ghost(1, 2, j);
    if (j == -1) return ghost(2, 1, i);
    if (j == -2) return ghost(2, 2, i);
    if (j == ny + 1) return ghost(3, 1, i);
    if (j == ny + 2) return ghost(3, 2, i);
    throw std::logic_error("biharmonic: node outside ghost range");
  }
};

struct BhRow {
  std::vector<std::pair<int, double>> coef;
  double rhs = 0.0;
};

void emit_pde_row(const Grid& g, const BhIndex& idx, int i, int j, double rhs,
                  std::vector<BhRow>& rows) {
  const double cx4 = 1.0 / (g.hx * g.hx * g.hx * g.hx);
  const double cy4 = 1.0 / (g.hy * g.hy * g.hy * g.hy);
  const double cxy = 1.0 / (g.hx * g.hx * g.hy * g.hy);
  BhRow row;
  row.rhs = rhs;
  auto add = [&](int ii, int jj, double c) { row.coef.push_back({idx(ii, jj), c}); };
  add(i, j, 6.0 * cx4 + 6.0 * cy4 + 8.0 * cxy);
  add(i - 1, j, -4.0 * cx4 - 4.0 * cxy);
  add(i + 1, j, -4.0 * cx4 - 4.0 * cxy);
  add(i, j - 1, -4.0 * cy4 - 4.0 * cxy);
  add(i, j + 1, -4.0 * cy4 - 4.0 * cxy);
  add(i - 2, j, cx4);
  add(i + 2, j, cx4);
  add(i, j - 2, cy4);
  add(i, j + 2, cy4);
  add(i - 1, j - 1, 2.0 * cxy);
  add(i - 1, j + 1, 2.0 * cxy);
  add(i + 1, j - 1, 2.0 * cxy);
  add(i + 1, j + 1, 2.0 * cxy);
  rows.push_back(std::move(row));
}

void emit_bc_row(const Grid& g, const BhIndex& idx, int s, const BhCondition& c,
                 int k, std::vector<BhRow>& rows) {
  // k is the running index along side s; (i, j) the boundary node.
  const bool xside = s < 2;
  const int i = xside ? (s == 0 ? 0 : g.nx) : k;
  const int j = xside ? k : (s == 2 ? 0 : g.ny);
  const double h = xside ? g.hx : g.hy;
  const int d = (s == 0 || s == 2) ? 1 : -1;  // +1 when inward = +axis
  auto off = [&](int m) {  // node m steps along the axis from the boundary
    return xside ? std::pair<int, int>{i + m, j} : std::pair<int, int>{i, j + m};
  };
  BhRow row;
  row.rhs = c.data[k];
  auto add = [&](int m, double coef) {
    auto [ii, jj] = off(m);
    row.coef.push_back({idx(ii, jj), coef});
  };
  switch (c.kind) {
    case BhKind::Value:
      add(0, 1.0);
      break;
    case BhKind::D1:
      // axis derivative: centered through the ghost
      add(d, 1.0 / (2.0 * h) * d);
      add(-d, -1.0 / (2.0 * h) * d);
      break;
    case BhKind::D2:
      add(d, 1.0 / (h * h));
      add(0, -2.0 / (h * h));
      add(-d, 1.0 / (h * h));
      break;
    case BhKind::D3:
      // f''' = (-f(-2) + 2 f(-1) - 2 f(+1) + f(+2)) / (2 h^3) along the axis
      add(-2 * d, -d / (2.0 * h * h * h));
      add(-d, 2.0 * d / (2.0 * h * h * h));
      add(d, -2.0 * d / (2.0 * h * h * h));
      add(2 * d, d / (2.0 * h * h * h));
      break;
  }
  rows.push_back(std::move(row));
}

}  // namespace

BiharmonicResult solve_biharmonic(const Grid& g, const BiharmonicProblem& p,
                                  double solver_tol) {
  std::array<bool, 4> has_value{};
  std::array<int, 4> layers{};
  for (int s = 0; s < 4; ++s) {
    const int len = (s < 2) ? g.ny + 1 : g.nx + 1;
    for (const auto& c : p.bc[s]) {
      if (static_cast<int>(c.data.size()) != len)
        throw std::invalid_argument("biharmonic: bc data length mismatch");
      if (c.kind == BhKind::Value) has_value[s] = true;
    }
    if (p.bc[s][0].kind == p.bc[s][1].kind)
      throw std::invalid_argument("biharmonic: duplicate condition kind on a side");
    layers[s] = has_value[s] ? 1 : 2;
  }
  // adjacent derivative-only sides are not needed by the homogenization
  const bool deriv_x = !has_value[0] || !has_value[1];
  const bool deriv_y = !has_value[2] || !has_value[3];
  if (deriv_x && deriv_y)
    throw std::invalid_argument(
        "biharmonic: adjacent derivative-only sides unsupported");

  BhIndex idx(g, layers);
  std::vector<BhRow> rows;

  for (int i = 1; i < g.nx; ++i)
    for (int j = 1; j < g.ny; ++j) emit_pde_row(g, idx, i, j, p.rhs.at(i, j), rows);
  // PDE on boundary nodes of derivative-only sides (corners on value sides excluded)
  for (int s = 0; s < 4; ++s) {
    if (has_value[s]) continue;
    if (s < 2) {
      const int i = (s == 0) ? 0 : g.nx;
      for (int j = 1; j < g.ny; ++j) emit_pde_row(g, idx, i, j, p.rhs.at(i, j), rows);
    } else {
      const int j = (s == 2) ? 0 : g.ny;
      for (int i = 1; i < g.nx; ++i) emit_pde_row(g, idx, i, j, p.rhs.at(i, j), rows);
    }
  }
  // BC rows; at a corner shared by two value sides the duplicate value row
  // is imposed from the x-side only.
  const int n_pde_rows = static_cast<int>(rows.size());
  std::vector<std::pair<int, int>> bc_tag;  // (side, cond) per bc row
  for (int s = 0; s < 4; ++s) {
    const int len = (s < 2) ? g.ny + 1 : g.nx + 1;
    for (int ci = 0; ci < 2; ++ci) {
      const auto& c = p.bc[s][ci];
      for (int k = 0; k < len; ++k) {
        if (c.kind == BhKind::Value && s >= 2) {
          const bool corner = (k == 0 || k == g.nx);
          if (corner) {
            const int other = (k == 0) ? 0 : 1;
            if (has_value[other]) continue;
          }
        }
        emit_bc_row(g, idx, s, c, k, rows);
        bc_tag.push_back({s, ci});
      }
    }
  }

  if (static_cast<int>(rows.size()) != idx.total)
    throw std::logic_error("biharmonic: equation/unknown count mismatch");

  std::vector<Triplet> t;
  Eigen::VectorXd b(idx.total);
  for (size_t r = 0; r < rows.size(); ++r) {
    b[r] = rows[r].rhs;
    for (auto& [c, v] : rows[r].coef) t.push_back({static_cast<int>(r), c, v});
  }
  SpMat A(idx.total, idx.total);
  A.setFromTriplets(t.begin(), t.end());
  Eigen::SparseLU<SpMat> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("biharmonic: singular or ill-posed system");
  Eigen::VectorXd x = lu.solve(b);
  for (int pass = 0; pass < 3; ++pass) x += lu.solve(b - A * x);

  BiharmonicResult res;
  res.sol = ScalarField(g);
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) res.sol.at(i, j) = x[g.id(i, j)];
  check_finite(res.sol, "biharmonic solution");

  // Readback through the assembled rows themselves.
  for (size_t r = 0; r < rows.size(); ++r) {
    double val = -rows[r].rhs;
    for (auto& [c, v] : rows[r].coef) val += v * x[c];
    if (static_cast<int>(r) < n_pde_rows) {
      res.max_pde_residual = std::max(res.max_pde_residual, std::fabs(val));
    } else {
      res.max_bc_defect = std::max(res.max_bc_defect, std::fabs(val));
      auto [s, ci] = bc_tag[r - n_pde_rows];
      res.bc_defect[s][ci] = std::max(res.bc_defect[s][ci], std::fabs(val));
    }
  }
  double a_inf = 0.0;
  for (const auto& row : rows) {
    double s = 0.0;
    for (auto& [c, v] : row.coef) s += std::fabs(v);
    a_inf = std::max(a_inf, s);
  }
  const double scale =
      b.lpNorm<Eigen::Infinity>() + a_inf * x.lpNorm<Eigen::Infinity>();
  if (res.max_pde_residual > solver_tol * (scale + 1.0))
    throw std::runtime_error("biharmonic: solve residual exceeds tolerance");
  return res;
}

GaugeReport harmonic_gauge_check(const VectorField& F) {
  const Grid& g = *F.u.g;
  ScalarField d = divergence(F), c = curl2d(F);
  GaugeReport r;
  r.div_max = max_abs(d);
  r.curl_max = max_abs(c);
  r.f_max = std::max(max_abs(F.u), max_abs(F.v));
  for (int i = 1; i < g.nx; ++i)
    for (int j = 1; j < g.ny; ++j) {
      r.div_max_interior = std::max(r.div_max_interior, std::fabs(d.at(i, j)));
      r.curl_max_interior = std::max(r.curl_max_interior, std::fabs(c.at(i, j)));
    }
  return r;
}

}  // namespace pcflow
