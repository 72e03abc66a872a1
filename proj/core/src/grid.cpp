#include "pcflow/grid.hpp"

#include <cmath>

namespace pcflow {

Grid::Grid(int nx_, int ny_, double L_) : nx(nx_), ny(ny_), L(L_) {
  if (nx < 8 || ny < 8) throw std::invalid_argument("grid: nx, ny must be >= 8");
  if (!(L > 0.0) || L > 1.0) throw std::invalid_argument("grid: need 0 < L <= 1");
  hx = L / nx;
  hy = 2.0 / ny;
}

VectorField::VectorField(ScalarField uu, ScalarField vv)
    : u(std::move(uu)), v(std::move(vv)) {
  if (!u.g || !v.g || !u.g->same(*v.g))
    throw std::invalid_argument("vector field components must share one grid");
}

void check_finite(const ScalarField& f, const std::string& label) {
  for (double x : f.v)
    if (!std::isfinite(x))
      throw std::runtime_error("non-finite value in field " + label);
}

namespace {

// d/ds along one line of samples: centered interior, one-sided ends.
inline void line_deriv(const double* f, int n, int stride, double h, double* out,
                       int ostride) {
  const double c = 1.0 / (2.0 * h);
  out[0] = c * (-3.0 * f[0] + 4.0 * f[stride] - f[2 * stride]);
  for (int k = 1; k < n - 1; ++k)
    out[k * ostride] = c * (f[(k + 1) * stride] - f[(k - 1) * stride]);
  out[(n - 1) * ostride] =
      c * (3.0 * f[(n - 1) * stride] - 4.0 * f[(n - 2) * stride] + f[(n - 3) * stride]);
}

}  // namespace

ScalarField apply_dx(const ScalarField& f) {
  const Grid& g = *f.g;
  ScalarField out(g);
  std::vector<double> line(g.nx + 1), dline(g.nx + 1);
  for (int j = 0; j <= g.ny; ++j) {
    for (int i = 0; i <= g.nx; ++i) line[i] = f.at(i, j);
    line_deriv(line.data(), g.nx + 1, 1, g.hx, dline.data(), 1);
    for (int i = 0; i <= g.nx; ++i) out.at(i, j) = dline[i];
  }
  check_finite(out, "apply_dx output");
  return out;
}

ScalarField apply_dy(const ScalarField& f) {
  const Grid& g = *f.g;
  ScalarField out(g);
  for (int i = 0; i <= g.nx; ++i)
    line_deriv(&f.v[g.id(i, 0)], g.ny + 1, 1, g.hy, &out.v[g.id(i, 0)], 1);
  check_finite(out, "apply_dy output");
  return out;
}

ScalarField divergence(const VectorField& w) {
  return add(apply_dx(w.u), apply_dy(w.v));
}

ScalarField curl2d(const VectorField& w) {
  return sub(apply_dy(w.u), apply_dx(w.v));
}

ScalarField laplacian(const ScalarField& f) {
  return add(apply_dx(apply_dx(f)), apply_dy(apply_dy(f)));
}

ScalarField add(const ScalarField& a, const ScalarField& b) {
  ScalarField out(*a.g);
  for (size_t k = 0; k < out.v.size(); ++k) out.v[k] = a.v[k] + b.v[k];
  return out;
}

ScalarField sub(const ScalarField& a, const ScalarField& b) {
  ScalarField out(*a.g);
  for (size_t k = 0; k < out.v.size(); ++k) out.v[k] = a.v[k] - b.v[k];
  return out;
}

ScalarField scale(const ScalarField& a, double c) {
  ScalarField out(*a.g);
  for (size_t k = 0; k < out.v.size(); ++k) out.v[k] = c * a.v[k];
  return out;
}

ScalarField mul(const ScalarField& a, const ScalarField& b) {
  ScalarField out(*a.g);
  for (size_t k = 0; k < out.v.size(); ++k) out.v[k] = a.v[k] * b.v[k];
  return out;
}

double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (double x : f.v) m = std::max(m, std::fabs(x));
  return m;
}

double integrate(const ScalarField& f) {
  const Grid& g = *f.g;
  double s = 0.0;
  for (int i = 0; i <= g.nx; ++i) {
    const double wx = (i == 0 || i == g.nx) ? 0.5 : 1.0;
    for (int j = 0; j <= g.ny; ++j) {
      const double wy = (j == 0 || j == g.ny) ? 0.5 : 1.0;
      s += wx * wy * f.at(i, j);
    }
  }
  return s * g.hx * g.hy;
}

Trace extract_trace(const ScalarField& f, Side side) {
  const Grid& g = *f.g;
  Trace t;
  t.side = side;
  switch (side) {
    case Side::X0:
      t.v.resize(g.ny + 1);
      for (int j = 0; j <= g.ny; ++j) t.v[j] = f.at(0, j);
      break;
    case Side::XL:
      t.v.resize(g.ny + 1);
      for (int j = 0; j <= g.ny; ++j) t.v[j] = f.at(g.nx, j);
      break;
    case Side::Y0:
      t.v.resize(g.nx + 1);
      for (int i = 0; i <= g.nx; ++i) t.v[i] = f.at(i, 0);
      break;
    case Side::Y2:
      t.v.resize(g.nx + 1);
      for (int i = 0; i <= g.nx; ++i) t.v[i] = f.at(i, g.ny);
      break;
  }
  return t;
}

std::vector<double> deriv1d(const std::vector<double>& f, double h) {
  std::vector<double> out(f.size());
  line_deriv(f.data(), static_cast<int>(f.size()), 1, h, out.data(), 1);
  return out;
}

std::vector<double> deriv1d_second(const std::vector<double>& f, double h) {
  const int n = static_cast<int>(f.size());
  std::vector<double> out(n);
  const double c = 1.0 / (h * h);
  out[0] = c * (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]);
  for (int k = 1; k < n - 1; ++k) out[k] = c * (f[k + 1] - 2.0 * f[k] + f[k - 1]);
  out[n - 1] = c * (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]);
  return out;
}

double trapz(const std::vector<double>& f, double h) {
  double s = 0.5 * (f.front() + f.back());
  for (size_t k = 1; k + 1 < f.size(); ++k) s += f[k];
  return s * h;
}

double end_deriv(const std::vector<double>& f, double h, int order, bool left) {
  const int n = static_cast<int>(f.size());
  if (n < 6) throw std::invalid_argument("end_deriv: need at least 6 samples");
  auto s = [&](int k) { return left ? f[k] : f[n - 1 - k]; };
  const double sgn = left ? 1.0 : -1.0;  // odd orders flip under reversal
  switch (order) {
    case 1:
      return sgn *
             (-25.0 * s(0) + 48.0 * s(1) - 36.0 * s(2) + 16.0 * s(3) - 3.0 * s(4)) /
             (12.0 * h);
    case 2:
      return (35.0 * s(0) - 104.0 * s(1) + 114.0 * s(2) - 56.0 * s(3) + 11.0 * s(4)) /
             (12.0 * h * h);
    case 3:
      return sgn *
             (-5.0 * s(0) + 18.0 * s(1) - 24.0 * s(2) + 14.0 * s(3) - 3.0 * s(4)) /
             (2.0 * h * h * h);
    default:
      throw std::invalid_argument("end_deriv: order must be 1..3");
  }
}

}  // namespace pcflow
