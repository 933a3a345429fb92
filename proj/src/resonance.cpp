#include "gc/resonance.hpp"

#include <cmath>

#include "gc/errors.hpp"
#include "gc/symbol.hpp"

namespace gc {

// Core rule on already-evaluated diagonal values. The (theta=0, j=k) entry is
// unconditionally resonant: it is the part the gauge transform preserves, and
// its divisor would vanish identically.
int resonance_cutoff_values(Cplx ajAtShift, Cplx akAtXi, double wXi, double wShift,
                            bool thetaZero, int j, int k, const ResonanceSpec& spec) {
  if (thetaZero && j == k) return 0;
  switch (spec.variant) {
    case ResonanceSpec::Variant::Scalar: {
      double W = spec.symmetrization == ResonanceSpec::Symmetrization::MaxWeight
                     ? std::max(wXi, wShift)
                     : std::min(wXi, wShift);
      return std::abs(ajAtShift - akAtXi) > spec.s * std::pow(W, spec.delta) ? 1 : 0;
    }
    case ResonanceSpec::Variant::SystemOneStep:
    case ResonanceSpec::Variant::SystemFull: {
      // Radius-gated coupling removal: matrix-diagonal entries and frozen
      // pairs are never touched, couplings are non-resonant outside s'.
      if (j == k) return 0;
      if (spec.pair_frozen(j, k)) return 0;
      return std::min(wXi, wShift) > spec.sPrime ? 1 : 0;
    }
  }
  return 0;
}

int resonance_cutoff(const MatrixSymbol& aD, const Freq& theta, int j, int k,
                     const std::vector<double>& xi, const ResonanceSpec& spec) {
  if (j < 0 || k < 0 || j >= aD.m() || k >= aD.m())
    throw DimensionMismatch("entry index out of range in resonance cutoff");
  Freq z = Freq::zero(aD.d());
  for (const auto& [t, e] : aD.entries())
    if (!(t == z) && !is_zero_const(e))
      throw NotDiagonal("reference symbol has nonzero entries away from frequency 0");
  std::vector<double> xs = shift_point(xi, theta);
  Mat aXi = aD.eval(z, xi, nullptr);
  Mat aSh = aD.eval(z, xs, nullptr);
  double scaleRef = 1.0 + std::max(aXi.cwiseAbs().maxCoeff(), aSh.cwiseAbs().maxCoeff());
  for (int r = 0; r < aD.m(); ++r)
    for (int c = 0; c < aD.m(); ++c)
      if (r != c && (std::abs(aXi(r, c)) > 1e-10 * scaleRef ||
                     std::abs(aSh(r, c)) > 1e-10 * scaleRef))
        throw NotDiagonal("reference symbol evaluates to a non-diagonal matrix");
  return resonance_cutoff_values(aSh(j, j), aXi(k, k), weight(xi), weight(xs),
                                 theta.is_zero(), j, k, spec);
}

}  // namespace gc
