#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pcflow/background.hpp"
#include "pcflow/elliptic.hpp"
#include "pcflow/grid.hpp"

namespace pcflow {

// Data of one linearized solve: frozen transport velocity, forcing terms,
// homotopy weight t and the inflow mollifier width.
struct LinearInput {
  VectorField ueps;  // frozen transport velocity, v-component zero on walls
  ScalarField g0;
  VectorField g;  // (g1, g2)
  FlowParams params;
  double t = 1.0;
  double alpha_mollify = 0.0;  // 0 disables mollification
};

struct ResidualReport {
  GaugeReport gauge;  // F = (P_x - R1, P_y - R2) on the assembled solution
  double mom_x = 0.0, mom_y = 0.0;  // interior max of the F components
  // independent field-operator evaluation of the momentum equations
  double mom_x_fieldop = 0.0, mom_y_fieldop = 0.0;
  double mass = 0.0;          // mass defect through the transport stencils
  double mass_fieldop = 0.0;  // mass defect through the field operators
  double inflow_identity = 0.0;  // recovered inflow identity diagnostic
  // reconstruction identities: curl u - Hc and 2 eps div u - (gamma rho - P)
  double recon_curl = 0.0, recon_div = 0.0;        // interior max
  double recon_curl_full = 0.0, recon_div_full = 0.0;  // whole domain
};

struct BCDefect {
  std::string name;
  double defect = 0.0;
};

struct LinearOutput {
  ScalarField u, v, rho;
  ScalarField Hc;   // curl of the velocity
  ScalarField P;    // effective viscous flux
  ScalarField phi, psi;
  Trace rho0y;      // inflow density-derivative data
  ResidualReport residual_report;
  std::vector<BCDefect> bc_report;
  int sweeps = 0;
  double last_update = 0.0;  // X-norm of the final sweep update
};

struct SolveOptions {
  double solver_tol = 1e-10;
  double inner_tol = 1e-9;  // X-norm of the verification sweep update
  double consistency_tol = 1e-6;
  int max_iters = 300;  // GMRES iteration cap for the convection fixed point
};

// Reusable factorizations for repeated solves sharing one grid, eps,
// homotopy weight and background profile (one Picard run). solve_linear
// rebuilds the contents whenever they do not match its input.
struct LinearWorkspace {
  LinearWorkspace();
  ~LinearWorkspace();
  struct Impl;
  std::unique_ptr<Impl> impl;
};

void validate_input(const LinearInput& in);

// Step I: curl problem. w is the frozen iterate entering the convection
// terms.
ScalarField step_curl(const LinearInput& in, const VectorField& w,
                      double solver_tol = 1e-10);

// Step II: effective viscous flux. Returns P and the inflow trace P0.
std::pair<ScalarField, Trace> step_flux(const LinearInput& in,
                                        const ScalarField& Hc,
                                        const VectorField& w,
                                        double solver_tol = 1e-10);

// Step III a: inflow ODE for the y-derivative of the density trace.
Trace step_inflow_ode(const LinearInput& in, const ScalarField& Hc);

// Step III b: density transport from the inflow column.
ScalarField step_transport(const LinearInput& in, const ScalarField& P,
                           const Trace& rho0y);

// Step IV: Helmholtz recomposition; fills the identity and boundary reports.
LinearOutput step_helmholtz(const LinearInput& in, const ScalarField& Hc,
                            const ScalarField& P, const ScalarField& rho,
                            double solver_tol = 1e-10);

// All four steps, with the convection fixed point resolved by GMRES around
// an implicit vorticity block and verified by a staged sweep.
LinearOutput solve_linear(const LinearInput& in,
                          const SolveOptions& opt = SolveOptions(),
                          LinearWorkspace* ws = nullptr);

// Low-level transport kernel gamma*r + coef*(vel . grad r) = rhs with inflow
// data on x=0, upwind-implicit marching in x. Exposed for convergence tests.
ScalarField transport_solve(const VectorField& vel, double coef, double gamma,
                            const ScalarField& rhs,
                            const std::vector<double>& inflow);

// Discrete Gaussian mollifier of a trace sample, width alpha truncated at
// 4*alpha and renormalized near the ends; alpha = 0 is the identity.
std::vector<double> mollify_trace(const std::vector<double>& f, double h,
                                  double alpha);

}  // namespace pcflow
