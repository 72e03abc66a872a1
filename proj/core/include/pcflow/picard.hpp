#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pcflow/background.hpp"
#include "pcflow/grid.hpp"
#include "pcflow/homogenize.hpp"
#include "pcflow/linsolve.hpp"

namespace pcflow {

// Remainder triple of the perturbative expansion around the lifted
// background, plus the iteration index that produced it.
struct State {
  ScalarField u, v, rho;
  int n = 0;

  State() = default;
  State(const Grid& g) : u(g), v(g), rho(g), n(0) {}
};

// Right-hand sides of the remainder system, with the split parts retained
// so the split-sum identities g0 = g01 + g0r etc. stay checkable.
struct GTerms {
  ScalarField g0, g1, g2;
  ScalarField g01, g0r;
  ScalarField g11, g12, g1r;
  ScalarField g21, g22, g2r;
};

struct IterationRow {
  int n = 0;
  double du_x = 0.0;    // X norm of the velocity update
  double drho_y = 0.0;  // Y norm of the density update
  double ratio = 0.0;   // contraction ratio, 0 until two updates exist
  double u_b = 0.0;     // B norm of the iterate
  double rho_a = 0.0;   // A norm of the iterate
};

struct IterationReport {
  std::vector<IterationRow> rows;
  bool converged = false;
  int iterations = 0;
  double final_update = 0.0;
};

// Full physical fields rebuilt from a remainder state, with the two inflow
// density identities read back as defects.
struct Reconstruction {
  VectorField ueps;
  ScalarField rhoeps;
  double corner_defect = 0.0;  // rho(0,0) minus one
  double inflow_slope_defect = 0.0;  // rho_x(0,.) against its prescribed data
};

struct NonlinearResidual {
  double mass = 0.0;   // interior max of div(rho u)
  double mom_x = 0.0;  // interior max of the x-momentum residual
  double mom_y = 0.0;
  std::vector<BCDefect> bc;  // physical boundary conditions
  double max_bc = 0.0;
};

struct PicardOptions {
  double tol = 1e-9;  // X x Y norm of the update
  int max_iter = 50;
  double stall_ratio = 0.95;   // non-contraction threshold
  int stall_count = 3;         // consecutive stalls tolerated
  double envelope_factor = 10.0;  // divergence gate over eps^{sigma/2}
  SolveOptions solve;
};

// Remainder forcing assembled from the previous iterate and the lifted
// background; throws if the reconstructed density loses positivity.
GTerms assemble_g(const State& s, const Lift& lift, const BoundaryData& bd,
                  const FlowParams& p);

Reconstruction reconstruct(const State& s, const Lift& lift,
                           const BoundaryData& bd, const FlowParams& p);

// Residuals of the physical system (unit viscosities, pressure rho^gamma
// over the squared Mach number) and its boundary conditions.
NonlinearResidual nonlinear_residual(const VectorField& ueps,
                                     const ScalarField& rhoeps,
                                     const BoundaryData& bd,
                                     const FlowParams& p);

// Outer iteration from the zero state with the transport velocity lagged
// one step; every linearized solve reuses one workspace. start may pass a
// warm initial state for the uniqueness check.
std::pair<State, IterationReport> picard_iterate(
    const BoundaryData& bd, const FlowParams& p, const Grid& g,
    const PicardOptions& opt = PicardOptions(), const State* start = nullptr);

}  // namespace pcflow
