#pragma once

#include <array>
#include <memory>
#include <vector>

#include "pcflow/grid.hpp"

namespace pcflow {

enum class BCKind { Dirichlet, Neumann };

struct PoissonBC {
  BCKind kind = BCKind::Dirichlet;
  std::vector<double> data;  // one value per node along the side
};

// Scalar problem  advect(y)*u_x - diffusion*lap(u) = rhs  with one condition
// per side. Neumann conditions fix the axis derivative (u_x on x-sides, u_y
// on y-sides) using the same one-sided stencils as the field operators, so a
// Neumann readback through apply_dx/apply_dy is exact.
struct EllipticProblem {
  double diffusion = 1.0;
  std::vector<double> advect;  // empty, or size ny+1: coefficient of u_x
  ScalarField rhs;
  std::array<PoissonBC, 4> bc;  // indexed by Side
};

// Factors the operator once; solve() may be called repeatedly with new data.
// The discrete Laplacian is the composed operator dx(dx .) + dy(dy .), the
// same one the field operators implement, so interior equation rows agree
// exactly with derivative identities formed from apply_dx/apply_dy.
class PoissonSolver {
 public:
  PoissonSolver(const Grid& g, double diffusion, std::vector<double> advect,
                std::array<BCKind, 4> kinds, double solver_tol = 1e-10);
  ~PoissonSolver();
  PoissonSolver(PoissonSolver&&) noexcept;
  PoissonSolver& operator=(PoissonSolver&&) noexcept;

  ScalarField solve(const ScalarField& rhs,
                    const std::array<std::vector<double>, 4>& bcdata) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

ScalarField solve_poisson(const Grid& g, const EllipticProblem& p,
                          double solver_tol = 1e-10);

// Biharmonic problem with two conditions per side; kinds are the value and
// the first/second/third axis derivative. Sides lacking a Value condition
// get the PDE imposed on their boundary nodes (two ghost layers); value
// sides carry one ghost layer for their derivative condition.
enum class BhKind { Value, D1, D2, D3 };

struct BhCondition {
  BhKind kind = BhKind::Value;
  std::vector<double> data;
};

struct BiharmonicProblem {
  ScalarField rhs;  // right-hand side of lap^2(u) = rhs
  std::array<std::array<BhCondition, 2>, 4> bc;
};

struct BiharmonicResult {
  ScalarField sol;
  double max_bc_defect = 0.0;   // readback through the solver's own stencils
  double max_pde_residual = 0.0;
  // bc_defect[side][cond]: per-condition readback defect, same stencils
  std::array<std::array<double, 2>, 4> bc_defect{};
};

BiharmonicResult solve_biharmonic(const Grid& g, const BiharmonicProblem& p,
                                  double solver_tol = 1e-10);

struct GaugeReport {
  double div_max_interior = 0.0;
  double curl_max_interior = 0.0;
  double div_max = 0.0;
  double curl_max = 0.0;
  double f_max = 0.0;
};

// Diagnostic for the recovered momentum equations: F should vanish.
GaugeReport harmonic_gauge_check(const VectorField& F);

}  // namespace pcflow
