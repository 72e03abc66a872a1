#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pcflow/background.hpp"
#include "pcflow/grid.hpp"

namespace pcflow {

struct LiftInvariant {
  std::string name;
  double defect = 0.0;
};

// Boundary lift (ubar, vbar) together with the closed-form profiles used in
// its construction, retained for diagnostics.
struct Lift {
  ScalarField ubar, vbar;
  ScalarField h1, h2, u0, v0;
  double h4_norm_estimate = 0.0;
  std::vector<LiftInvariant> invariants;
  double max_invariant_defect = 0.0;
};

// Wall profiles h1, h2 assembled from the closed forms with the cutoff chi.
std::pair<ScalarField, ScalarField> build_h1_h2(const BoundaryData& bd,
                                                const Grid& g,
                                                double compat_tol = 1e-4);

// Solves the two homogenized biharmonic problems and verifies the seven
// lifted boundary identities via readback through the solver stencils.
Lift build_lift(const BoundaryData& bd, const Grid& g, double lift_tol = 1e-6,
                double compat_tol = 1e-4);

// Discrete H^4-type seminorm aggregate used in the lift bound report.
double h4_norm(const VectorField& w);

}  // namespace pcflow
