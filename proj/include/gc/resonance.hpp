#pragma once

#include <utility>
#include <vector>

#include "gc/freq.hpp"
#include "gc/types.hpp"

namespace gc {

class MatrixSymbol;

// Declares which (theta, entry) directions count as non-resonant and may be
// removed by a gauge rotation. The scalar variant thresholds the diagonal-value
// gap against s * W^delta where W symmetrizes <xi> and <theta+xi>; the system
// variants gate couplings purely on the radius s' >= 1.
struct ResonanceSpec {
  enum class Symmetrization { MaxWeight, MinWeight };
  enum class Variant { Scalar, SystemOneStep, SystemFull };

  double delta = 0.0;
  double s = 1.0;  // must be > 0
  Symmetrization symmetrization = Symmetrization::MaxWeight;
  Variant variant = Variant::Scalar;
  double sPrime = 1.0;  // system variants only; radius, >= 1
  // Entry pairs (j,k) that stay resonant at every point, regardless of radius.
  // Used by uncoupling when two principal coefficients coincide. Unordered:
  // (j,k) freezes (k,j) as well. 0-based indices.
  std::vector<std::pair<int, int>> frozenPairs;

  bool pair_frozen(int j, int k) const {
    for (const auto& p : frozenPairs)
      if ((p.first == j && p.second == k) || (p.first == k && p.second == j)) return true;
    return false;
  }
};

// Scalar-variant spec with the symmetrization picked by the sign of delta
// (max-weight for delta >= 0, min-weight otherwise), which is the choice that
// keeps the cutoff symmetric and the psi bound valid for either sign.
inline ResonanceSpec make_scalar_spec(double delta, double s) {
  ResonanceSpec r;
  r.delta = delta;
  r.s = s;
  r.symmetrization = delta >= 0 ? ResonanceSpec::Symmetrization::MaxWeight
                                : ResonanceSpec::Symmetrization::MinWeight;
  return r;
}

// chi_theta(xi)(j,k) in {0,1}. 1 means the coupling is non-resonant there and
// will be divided out; 0 means it is left alone. theta = 0 with j = k is
// always 0. aD must be a diagonal symbol (single zero frequency, diagonal
// coefficient); throws NotDiagonal otherwise.
int resonance_cutoff(const MatrixSymbol& aD, const Freq& theta, int j, int k,
                     const std::vector<double>& xi, const ResonanceSpec& spec);

// Same rule on pre-evaluated diagonal values a_j(theta+xi), a_k(xi) and the
// two weights; callers that already hold the evaluations use this directly.
int resonance_cutoff_values(Cplx ajAtShift, Cplx akAtXi, double wXi, double wShift,
                            bool thetaZero, int j, int k, const ResonanceSpec& spec);

}  // namespace gc
