#include <cmath>
#include <random>

#include "doctest.h"
#include "pcflow/homogenize.hpp"

using namespace pcflow;

namespace {

const double kPi = 3.14159265358979323846;

// Compatible polynomial family (degree <= 4, so every endpoint stencil in
// the compatibility check is exact):
//   b0 = c1 + c2 x^2,  b1 = c1 + c3 x^2
//   a1 = c1 y + c4 y^2 (2-y)^2   (a1'(0) = a1'(2) = c1)
//   a4 = 2 c2 L + (c3 - c2) L y  (matches b0'(L), b1'(L), linear)
//   a2, a3 vanish at the walls.
BoundaryData make_compatible(const Grid& g, double c1, double c2, double c3,
                             double c4, double c5, double c6) {
  BoundaryData bd = BoundaryData::zero(g);
  for (int j = 0; j <= g.ny; ++j) {
    const double y = g.y(j);
    const double q = y * (2.0 - y);
    bd.a1[j] = c1 * y + c4 * q * q;
    bd.a2[j] = c5 * q * (1.0 + 0.3 * y);
    bd.a3[j] = c6 * q * (1.0 - 0.2 * y);
    bd.a4[j] = 2.0 * c2 * g.L + (c3 - c2) * g.L * y;
  }
  for (int i = 0; i <= g.nx; ++i) {
    const double x = g.x(i);
    bd.b0[i] = c1 + c2 * x * x;
    bd.b1[i] = c1 + c3 * x * x;
  }
  return bd;
}

BoundaryData combine(const Grid& g, const BoundaryData& p, double a,
                     const BoundaryData& q, double b) {
  BoundaryData out = BoundaryData::zero(g);
  auto mix = [&](std::vector<double> BoundaryData::* m) {
    for (size_t k = 0; k < (out.*m).size(); ++k)
      (out.*m)[k] = a * (p.*m)[k] + b * (q.*m)[k];
  };
  mix(&BoundaryData::a1);
  mix(&BoundaryData::a2);
  mix(&BoundaryData::a3);
  mix(&BoundaryData::a4);
  mix(&BoundaryData::h0);
  mix(&BoundaryData::b0);
  mix(&BoundaryData::b1);
  return out;
}

}  // namespace

TEST_CASE("zero data gives zero profiles and zero lift") {
  Grid g(32, 32, 0.25);
  BoundaryData bd = BoundaryData::zero(g);
  auto [h1, h2] = build_h1_h2(bd, g);
  CHECK(max_abs(h1) == doctest::Approx(0.0));
  CHECK(max_abs(h2) == doctest::Approx(0.0));
  Lift lift = build_lift(bd, g);
  CHECK(max_abs(lift.ubar) < 1e-10);
  CHECK(max_abs(lift.vbar) < 1e-10);
  CHECK(lift.h4_norm_estimate < 1e-9);
}

TEST_CASE("h1 closed form samples") {
  Grid g(40, 40, 0.25);
  BoundaryData bd = BoundaryData::zero(g);
  for (int i = 0; i <= g.nx; ++i) bd.b0[i] = 1.0;
  // incompatible data on purpose: pass a wide tolerance to reach the formula
  auto [h1, h2] = build_h1_h2(bd, g, 10.0);
  CHECK(max_abs(h2) == doctest::Approx(0.0));
  const int j01 = 2;  // y = 0.1 with hy = 0.05
  CHECK(g.y(j01) == doctest::Approx(0.1));
  for (int i = 0; i <= g.nx; ++i)
    CHECK(h1.at(i, j01) == doctest::Approx(0.1));
  // above the cutoff support h1 vanishes
  CHECK(h1.at(5, g.ny / 2) == doctest::Approx(0.0));

  // incompatible data rejected at a strict tolerance
  CHECK_THROWS_AS(build_h1_h2(bd, g, 1e-8), std::invalid_argument);
}

TEST_CASE("wall derivative of h1 reproduces b0") {
  Grid g(40, 40, 0.25);
  BoundaryData bd = BoundaryData::zero(g);
  for (int i = 0; i <= g.nx; ++i) bd.b0[i] = 1.0 + g.x(i);
  auto [h1, h2] = build_h1_h2(bd, g, 10.0);
  (void)h2;
  for (int i = 0; i <= g.nx; ++i) {
    std::vector<double> col(g.ny + 1);
    for (int j = 0; j <= g.ny; ++j) col[j] = h1.at(i, j);
    CHECK(end_deriv(col, g.hy, 1, true) ==
          doctest::Approx(bd.b0[i]).epsilon(1e-10));
  }
}

TEST_CASE("b0 = b1 = 0 reduces h1 to the a1 endpoint terms") {
  Grid g(32, 32, 0.25);
  BoundaryData bd = BoundaryData::zero(g);
  for (int j = 0; j <= g.ny; ++j) bd.a1[j] = 2.0 + std::sin(kPi * g.y(j));
  // a1'(0) = a1'(2) = pi: incompatible with b = 0, use the wide tolerance
  auto [h1, h2] = build_h1_h2(bd, g, 10.0);
  (void)h2;
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) {
      const double y = g.y(j);
      const double expect = bd.a1[0] * cutoff_chi(2.0 * y) +
                            bd.a1[g.ny] * cutoff_chi(4.0 - 2.0 * y);
      CHECK(h1.at(i, j) == doctest::Approx(expect).epsilon(1e-13));
    }
}

TEST_CASE("lift with only a3 data: vbar outflow trace, ubar zero") {
  Grid g(48, 48, 0.25);
  BoundaryData bd = BoundaryData::zero(g);
  for (int j = 0; j <= g.ny; ++j) bd.a3[j] = std::sin(kPi * g.y(j));
  Lift lift = build_lift(bd, g);
  CHECK(max_abs(lift.ubar) < 1e-10);
  Trace out = extract_trace(lift.vbar, Side::XL);
  for (int j = 0; j <= g.ny; ++j)
    CHECK(out.v[j] == doctest::Approx(bd.a3[j]).epsilon(1e-9));
  CHECK(lift.max_invariant_defect <= 1e-6);
  CHECK(lift.invariants.size() == 7);
}

TEST_CASE("lift boundary identities for full random compatible data") {
  Grid g(48, 48, 0.25);
  BoundaryData bd = make_compatible(g, 0.8, -0.4, 0.6, 0.5, 0.7, -0.9);
  Lift lift = build_lift(bd, g);
  CHECK(lift.max_invariant_defect <= 1e-6);
  // outflow value trace exact
  Trace out = extract_trace(lift.vbar, Side::XL);
  for (int j = 0; j <= g.ny; ++j)
    CHECK(out.v[j] == doctest::Approx(bd.a3[j]).epsilon(1e-8));
  // inflow value trace of ubar exact
  Trace in = extract_trace(lift.ubar, Side::X0);
  for (int j = 0; j <= g.ny; ++j)
    CHECK(in.v[j] == doctest::Approx(bd.a1[j]).epsilon(1e-8));
  CHECK(lift.h4_norm_estimate > 0.0);
}

TEST_CASE("build_lift is linear in the data") {
  Grid g(32, 32, 0.25);
  BoundaryData bd1 = make_compatible(g, 0.5, 0.3, -0.2, 0.1, 0.4, 0.6);
  BoundaryData bd2 = make_compatible(g, -0.3, 0.2, 0.5, -0.6, 0.1, -0.4);
  BoundaryData bdc = combine(g, bd1, 1.5, bd2, -2.0);
  Lift l1 = build_lift(bd1, g), l2 = build_lift(bd2, g), lc = build_lift(bdc, g);
  ScalarField eu = add(scale(l1.ubar, 1.5), scale(l2.ubar, -2.0));
  ScalarField ev = add(scale(l1.vbar, 1.5), scale(l2.vbar, -2.0));
  const double s = std::max(max_abs(eu), max_abs(ev)) + 1.0;
  CHECK(max_abs(sub(lc.ubar, eu)) < 1e-8 * s);
  CHECK(max_abs(sub(lc.vbar, ev)) < 1e-8 * s);
}

TEST_CASE("h4 bound constant stable across random compatible data") {
  Grid g(32, 32, 0.25);
  FlowParams p = FlowParams::make(1e-2, 1.4, 1, 1, 0.5, 0.2, 0.05, 0.0);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> ratios;
  for (int k = 0; k < 5; ++k) {
    BoundaryData bd = make_compatible(g, dist(rng), dist(rng), dist(rng),
                                      dist(rng), dist(rng), dist(rng));
    Lift lift = build_lift(bd, g);
    ratios.push_back(lift.h4_norm_estimate / lambda_norm(bd, p));
  }
  double mean = 0.0;
  for (double r : ratios) mean += r / ratios.size();
  for (double r : ratios) {
    CHECK(r > 0.5 * mean);
    CHECK(r < 1.5 * mean);
  }
}
