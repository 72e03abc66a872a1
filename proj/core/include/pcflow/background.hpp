#pragma once

#include <string>
#include <vector>

#include "pcflow/grid.hpp"

namespace pcflow {

// Physical and asymptotic parameters. Every "+"/"-" exponent superscript
// is realized through the single offset delta, e.g. eps^{1/2+} = eps^{1/2+delta}.
struct FlowParams {
  double eps = 1e-2;
  double gamma = 1.4;
  double alpha0 = 1.0;
  double alpha1 = 1.0;
  double alpha2 = 0.5;
  double sigma = 0.2;
  double delta = 0.05;
  double eta = 0.0;  // 0 means: use default eps^{1/2+delta}

  void validate() const;
  static FlowParams make(double eps, double gamma, double alpha0, double alpha1,
                         double alpha2, double sigma, double delta, double eta);

  double eps_half_plus() const;   // eps^{1/2+delta}
  double eps_half_minus() const;  // eps^{1/2-delta}
  double eps_mhalf_minus() const; // eps^{-1/2-delta}
};

// Boundary perturbation profiles sampled on the grid traces:
// a1..a4, h0 on [0,2] (size ny+1), b0, b1 on [0,L] (size nx+1).
struct BoundaryData {
  std::vector<double> a1, a2, a3, a4, h0;
  std::vector<double> b0, b1;
  double hx = 0.0, hy = 0.0;

  static BoundaryData zero(const Grid& g);
  void scale_all(double c);
};

struct CompatCondition {
  std::string name;
  double defect = 0.0;
};

struct CompatReport {
  std::vector<CompatCondition> conditions;
  bool pass = false;
  double max_defect = 0.0;
};

// Background shear profile u_s = alpha0 + alpha1*y + alpha2*y*(2-y).
double eval_us(const FlowParams& p, double y);
double eval_us_y(const FlowParams& p, double y);
double eval_us_yy(const FlowParams& p);

// C^4 cutoff: 1 on [0,1/2], 0 on [1,inf), degree-9 smoothstep between.
double cutoff_chi(double t);

CompatReport check_compatibility(const BoundaryData& bd, double tol);

// rho_bar = x*h0(y)/eta^2 (so that eta^2*rho_bar = x*h0).
ScalarField background_density(const FlowParams& p, const BoundaryData& bd,
                               const Grid& g);

// Lambda = eta^{-2}|h0|_{H3} + sum_i |a_i|_{H4} + |b0|_{H4} + |b1|_{H4}.
double lambda_norm(const BoundaryData& bd, const FlowParams& p);

// Max-norm residual of the incompressible Euler system for (u_s, 0, 1).
double euler_residual(const FlowParams& p, const Grid& g);
// Max-norm residual of incompressible NS for (u_s, 0, 1 - 2*eps*alpha2*x).
double ns_residual(const FlowParams& p, const Grid& g);

// 1D Sobolev H^k norm of samples via repeated first-derivative stencils.
double sobolev1d(const std::vector<double>& f, double h, int k);

}  // namespace pcflow
