#include <cmath>
#include <random>

#include "doctest.h"
#include "pcflow/norms.hpp"

using namespace pcflow;

namespace {

ScalarField sample(const Grid& g, double (*f)(double, double)) {
  ScalarField out(g);
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) out.at(i, j) = f(g.x(i), g.y(j));
  return out;
}

ScalarField smooth_random(const Grid& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  double c[6];
  for (double& ck : c) ck = dist(rng);
  ScalarField out(g);
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) {
      double x = g.x(i), y = g.y(j);
      out.at(i, j) = c[0] + c[1] * x + c[2] * y + c[3] * std::sin(3.0 * x + c[4]) +
                     c[5] * std::cos(1.7 * y);
    }
  return out;
}

FlowParams unit_params() {
  FlowParams p;  // bypasses validate: the symbolic oracles use eps = eta = 1
  p.eps = 1.0;
  p.eta = 1.0;
  return p;
}

}  // namespace

TEST_CASE("norm_A oracle on rho = y") {
  Grid g(96, 96, 0.25);
  ScalarField rho = sample(g, [](double, double y) { return y; });
  NormReport r = norm_A(rho, unit_params());
  CHECK(r.term("h1") == doctest::Approx(1.0801234497346435).epsilon(2e-4));
  CHECK(r.term("trace_h1") == doctest::Approx(2.160246899469287).epsilon(2e-4));
  CHECK(r.term("grad_colmax") == doctest::Approx(std::sqrt(2.0)).epsilon(2e-4));
  CHECK(r.term("rho_xx") < 1e-9);
  CHECK(r.term("grad_rho_y") < 1e-9);
  CHECK(r.term("trace_yy") < 1e-8);
}

TEST_CASE("norm_Y oracle on rho = y") {
  Grid g(96, 96, 0.25);
  ScalarField rho = sample(g, [](double, double y) { return y; });
  NormReport r = norm_Y(rho, unit_params());
  const double expect = 1.0801234497346435 + std::sqrt(2.0) + std::sqrt(2.0);
  CHECK(r.total == doctest::Approx(expect).epsilon(2e-4));
}

TEST_CASE("norm_B oracle terms on u = x^2 y (2-y) (L-x)") {
  Grid g(128, 128, 0.25);
  FlowParams p = unit_params();
  VectorField w(sample(g, [](double x, double y) {
                  return x * x * y * (2.0 - y) * (0.25 - x);
                }),
                ScalarField(g));
  NormReport r = norm_B(w, p, 4.0);
  CHECK(r.term("h1") == doctest::Approx(0.011876827344782688).epsilon(3e-3));
  CHECK(r.term("hess") == doctest::Approx(0.25954915027549247).epsilon(3e-3));
  CHECK(r.term("w_d3v") == doctest::Approx(0.0));
  for (const auto& [name, val] : r.terms) {
    CHECK(std::isfinite(val));
    CHECK(val >= 0.0);
  }
}

TEST_CASE("homogeneity and triangle inequality") {
  Grid g(32, 32, 0.25);
  FlowParams p = FlowParams::make(1e-2, 1.4, 1, 1, 0.5, 0.2, 0.05, 0.0);
  ScalarField f1 = smooth_random(g, 1), f2 = smooth_random(g, 2);
  VectorField w1(smooth_random(g, 3), smooth_random(g, 4));
  VectorField w2(smooth_random(g, 5), smooth_random(g, 6));

  CHECK(norm_A(scale(f1, 3.7), p).total ==
        doctest::Approx(3.7 * norm_A(f1, p).total).epsilon(1e-12));
  CHECK(norm_B(VectorField(scale(w1.u, 2.5), scale(w1.v, 2.5)), p, 4.0).total ==
        doctest::Approx(2.5 * norm_B(w1, p, 4.0).total).epsilon(1e-12));
  CHECK(norm_X(VectorField(scale(w1.u, 0.3), scale(w1.v, 0.3)), p).total ==
        doctest::Approx(0.3 * norm_X(w1, p).total).epsilon(1e-12));
  CHECK(norm_Y(scale(f1, 5.0), p).total ==
        doctest::Approx(5.0 * norm_Y(f1, p).total).epsilon(1e-12));

  ScalarField fs = add(f1, f2);
  CHECK(norm_A(fs, p).total <=
        norm_A(f1, p).total + norm_A(f2, p).total + 1e-12);
  CHECK(norm_Y(fs, p).total <=
        norm_Y(f1, p).total + norm_Y(f2, p).total + 1e-12);
  VectorField ws(add(w1.u, w2.u), add(w1.v, w2.v));
  CHECK(norm_B(ws, p, 4.0).total <=
        norm_B(w1, p, 4.0).total + norm_B(w2, p, 4.0).total + 1e-12);
  CHECK(norm_X(ws, p).total <= norm_X(w1, p).total + norm_X(w2, p).total + 1e-12);
}

TEST_CASE("norm_X dominated by norm_B at p=2") {
  Grid g(32, 32, 0.25);
  FlowParams p = FlowParams::make(1e-2, 1.4, 1, 1, 0.5, 0.2, 0.05, 0.0);
  for (unsigned s = 10; s < 14; ++s) {
    VectorField w(smooth_random(g, s), smooth_random(g, s + 100));
    CHECK(norm_X(w, p).total <= norm_B(w, p, 2.0).total * (1.0 + 1e-10));
  }
}

TEST_CASE("column-max norm is monotone under domination") {
  Grid g(24, 24, 0.25);
  ScalarField f = smooth_random(g, 42);
  ScalarField bigger(g);
  for (size_t k = 0; k < f.v.size(); ++k) bigger.v[k] = std::fabs(f.v[k]) + 0.5;
  CHECK(colmax_lp(bigger, 2.0) >= colmax_lp(f, 2.0));
}
