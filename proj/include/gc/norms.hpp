#pragma once

#include <string>
#include <vector>

#include "gc/expr.hpp"
#include "gc/symbol.hpp"

namespace gc {

// Sampling lattice for weighted sups that resist closed-form evaluation:
// a radial log grid (always containing 0) crossed with quasi-uniform unit
// directions. The direction count scales with the ambient dimension.
struct NormGrid {
  std::vector<double> radii;
  int dirs1 = 2;
  int dirs2 = 64;
  int dirs3 = 256;
  int dirsHigh = 512;

  int directions(int d) const {
    if (d <= 1) return dirs1;
    if (d == 2) return dirs2;
    if (d == 3) return dirs3;
    return dirsHigh;
  }
  std::string describe(int d) const;
};

NormGrid default_norm_grid();

double op_norm(const Mat& M);

struct SupResult {
  double value = 0.0;
  bool exact = false;
};

// sup over xi of <xi>^{-gamma} * ||e(xi)||_op. Entries whose radial profile
// is a power product c * |xi|^h * <xi>^j restricted to an annulus are
// resolved in closed form (value may be +inf); everything else is sampled
// on the grid, which gives a lower estimate of the true sup.
SupResult weighted_sup(const ExprPtr& e, double gamma, int d, int m, const NormGrid& grid);

struct NormEstimate {
  double value = 0.0;
  bool exact = true;
  std::string grid;  // empty when every sup was exact
};

// [[b]]_l^{(gamma)} = sum over frequencies theta of
//   <theta>^l * sup_xi <xi>^{-gamma} ||b_theta(xi)||_op.
NormEstimate symbol_norm(const MatrixSymbol& b, double l, double gamma);
NormEstimate symbol_norm(const MatrixSymbol& b, double l, double gamma, const NormGrid& grid);

// Restriction of an entry to {lo <= |xi| < hi}; hi may be +inf.
ExprPtr restrict_annulus(ExprPtr e, double lo, double hi);

}  // namespace gc
