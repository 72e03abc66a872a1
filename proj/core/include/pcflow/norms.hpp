#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pcflow/background.hpp"
#include "pcflow/grid.hpp"

namespace pcflow {

struct NormReport {
  std::vector<std::pair<std::string, double>> terms;
  double total = 0.0;

  void add(const std::string& name, double value) {
    terms.push_back({name, value});
    total += value;
  }
  double term(const std::string& name) const;
};

// Building blocks shared by the norm definitions and the estimate audits.
double norm_l2(const ScalarField& f);
double norm_lp(const ScalarField& f, double p);
double norm_l2_weighted_lx(const ScalarField& f);  // ||(L-x) f||_L2
double norm_h1(const ScalarField& f);
double norm_h1v(const VectorField& w);
double norm_hess(const ScalarField& f);   // (|fxx|^2 + 2|fxy|^2 + |fyy|^2)^{1/2}
double norm_hessv(const VectorField& w);
double norm_h2(const ScalarField& f);
double norm_h2v(const VectorField& w);
double norm_w2p(const ScalarField& f, double p);
double norm_w2pv(const VectorField& w, double p);
// max over grid columns of the column L^p_y norm of |grad f|.
double colmax_grad_lp(const ScalarField& f, double p);
// same for a single scalar field magnitude.
double colmax_lp(const ScalarField& f, double p);
// L2 norm of a 1D trace.
double trace_l2(const std::vector<double>& f, double h);
double trace_lp(const std::vector<double>& f, double h, double p);
// H1 norm of a 1D trace (1D stencils on the trace itself).
double trace_h1(const std::vector<double>& f, double h);

NormReport norm_A(const ScalarField& rho, const FlowParams& p);
NormReport norm_B(const VectorField& w, const FlowParams& p, double pexp = 4.0);
NormReport norm_X(const VectorField& w, const FlowParams& p);
NormReport norm_Y(const ScalarField& rho, const FlowParams& p);

}  // namespace pcflow
