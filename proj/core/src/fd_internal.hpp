#pragma once

// Shared sparse finite-difference building blocks for the elliptic and the
// coupled linear solvers. Internal to core/src.

#include <Eigen/Sparse>

#include <array>
#include <vector>

#include "pcflow/elliptic.hpp"
#include "pcflow/grid.hpp"

namespace pcflow::fd {

using SpMat = Eigen::SparseMatrix<double>;
using SpMatR = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

// 1D first-derivative matrix matching the field operators.
inline SpMat deriv_matrix(int n, double h) {
  std::vector<Triplet> t;
  const double c = 1.0 / (2.0 * h);
  t.push_back({0, 0, -3.0 * c});
  t.push_back({0, 1, 4.0 * c});
  t.push_back({0, 2, -c});
  for (int k = 1; k < n - 1; ++k) {
    t.push_back({k, k - 1, -c});
    t.push_back({k, k + 1, c});
  }
  t.push_back({n - 1, n - 1, 3.0 * c});
  t.push_back({n - 1, n - 2, -4.0 * c});
  t.push_back({n - 1, n - 3, c});
  SpMat m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

inline SpMat identity(int n) {
  SpMat m(n, n);
  m.setIdentity();
  return m;
}

struct NodeSideInfo {
  bool boundary = false;
  Side side = Side::X0;  // owning side after priority resolution
};

inline NodeSideInfo owning_side(const Grid& g, int i, int j,
                                const std::array<BCKind, 4>& kinds) {
  std::vector<Side> sides;
  if (i == 0) sides.push_back(Side::X0);
  if (i == g.nx) sides.push_back(Side::XL);
  if (j == 0) sides.push_back(Side::Y0);
  if (j == g.ny) sides.push_back(Side::Y2);
  NodeSideInfo info;
  if (sides.empty()) return info;
  info.boundary = true;
  for (Side s : sides)
    if (kinds[static_cast<int>(s)] == BCKind::Dirichlet) {
      info.side = s;
      return info;
    }
  info.side = sides.front();
  return info;
}

inline int side_index(Side s, int i, int j) {
  return (s == Side::X0 || s == Side::XL) ? j : i;
}

}  // namespace pcflow::fd
