#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcflow {

// Uniform collocated grid on the closed channel [0,L] x [0,2].
// Nodes are (x_i, y_j) = (i*hx, j*hy), 0 <= i <= nx, 0 <= j <= ny.
struct Grid {
  int nx = 0;
  int ny = 0;
  double L = 0.0;
  double hx = 0.0;
  double hy = 0.0;

  Grid() = default;
  Grid(int nx_, int ny_, double L_);

  int npts() const { return (nx + 1) * (ny + 1); }
  // Column-major in i: one x-column of nodes is contiguous.
  int id(int i, int j) const { return i * (ny + 1) + j; }
  double x(int i) const { return i * hx; }
  double y(int j) const { return j * hy; }
  bool same(const Grid& o) const {
    return nx == o.nx && ny == o.ny && L == o.L;
  }
};

enum class Side { X0 = 0, XL = 1, Y0 = 2, Y2 = 3 };

struct ScalarField {
  const Grid* g = nullptr;
  std::vector<double> v;

  ScalarField() = default;
  explicit ScalarField(const Grid& grid, double fill = 0.0)
      : g(&grid), v(grid.npts(), fill) {}

  double& at(int i, int j) { return v[g->id(i, j)]; }
  double at(int i, int j) const { return v[g->id(i, j)]; }
};

struct VectorField {
  ScalarField u;
  ScalarField v;

  VectorField() = default;
  VectorField(const Grid& grid) : u(grid), v(grid) {}
  VectorField(ScalarField uu, ScalarField vv);
};

struct Trace {
  Side side = Side::X0;
  std::vector<double> v;
};

// Throws if any entry is NaN/Inf; label names the offending field.
void check_finite(const ScalarField& f, const std::string& label);

// First derivatives: second-order centered interior, second-order
// one-sided at the ends. Exact on quadratics at every node.
ScalarField apply_dx(const ScalarField& f);
ScalarField apply_dy(const ScalarField& f);

ScalarField divergence(const VectorField& w);
// Sign convention: curl2d(u, v) = u_y - v_x.
ScalarField curl2d(const VectorField& w);
// Composed second-order operator dx(dx f) + dy(dy f); exact on quadratics.
ScalarField laplacian(const ScalarField& f);

ScalarField add(const ScalarField& a, const ScalarField& b);
ScalarField sub(const ScalarField& a, const ScalarField& b);
ScalarField scale(const ScalarField& a, double c);
ScalarField mul(const ScalarField& a, const ScalarField& b);

double max_abs(const ScalarField& f);

// Trapezoidal quadrature over the closed domain.
double integrate(const ScalarField& f);

Trace extract_trace(const ScalarField& f, Side side);

// 1D stencils on a trace (same closures as the field operators).
std::vector<double> deriv1d(const std::vector<double>& f, double h);
std::vector<double> deriv1d_second(const std::vector<double>& f, double h);
double trapz(const std::vector<double>& f, double h);

// One-sided endpoint derivatives from samples (orders 1..3), used for
// boundary-data endpoint values like b0'(L) or a2''(0).
double end_deriv(const std::vector<double>& f, double h, int order, bool left);

}  // namespace pcflow
