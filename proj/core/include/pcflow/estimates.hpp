#pragma once

#include <string>
#include <vector>

#include "pcflow/linsolve.hpp"

namespace pcflow {

// One evaluated inequality: left side from the solution, right side from
// the data, and the implied constant tracked across parameter sweeps.
struct EstimateAudit {
  std::string name;
  double eps = 0.0, eta = 0.0, L = 0.0;
  double p = 2.0;  // Lebesgue exponent where one applies
  double lhs = 0.0;
  double rhs_data = 0.0;
  double implied_constant = 0.0;  // lhs / rhs_data when rhs_data > 0
  bool vacuous = false;           // rhs_data = 0
};

// Density gradient estimate at exponent p.
EstimateAudit audit_density(const LinearOutput& sol, const LinearInput& in,
                            double p);

// Vorticity energy estimate.
EstimateAudit audit_curl(const LinearOutput& sol, const LinearInput& in);

// Horizontal derivative energy estimate (stated in squares).
EstimateAudit audit_A1(const LinearOutput& sol, const LinearInput& in);

// Boundary vorticity, velocity H2, density H2, viscous flux and weighted
// third derivative estimates, in statement order.
std::vector<EstimateAudit> audit_higher(const LinearOutput& sol,
                                        const LinearInput& in);

// The two closing estimates of the linear theory and the X x Y bound.
std::vector<EstimateAudit> audit_theorems(const LinearOutput& sol,
                                          const LinearInput& in);

// All audits in report order: the theorem bounds, the density estimate at
// p = 2 and p = 4, the energy estimates and the higher order family.
std::vector<EstimateAudit> audit_all(const LinearOutput& sol,
                                     const LinearInput& in);

}  // namespace pcflow
