#pragma once

#include <vector>

#include "gc/symbol.hpp"
#include "gc/types.hpp"

namespace gc {

// Hermitian Clifford generators: h_j h_k + h_k h_j = 2 delta_jk Id, together
// with a grading Gamma that anticommutes with every generator, squares to the
// identity, and is sorted to diag(Id, -Id). m = 2^ceil(d/2).
struct CliffordRep {
  int d = 0;
  int m = 0;
  std::vector<Mat> h;
  Mat Gamma;
};

// Supported for 1 <= d <= 8; throws UnsupportedDimension outside that range.
CliffordRep build_generators(int d);

// sum_j xi_j h_j + mass * Gamma as a single-frequency symbol of order 1.
// Pointwise eigenvalues are +-sqrt(|xi|^2 + mass^2), each with multiplicity m/2.
MatrixSymbol free_dirac_symbol(const CliffordRep& rep, double mass);

// u(xi) = Id inside the unit ball and (Id + Gamma P(xi)) / sqrt(2) outside,
// with P(xi) = sum_j xi_j h_j / |xi|. Unitary at every point.
MatrixSymbol diagonalizing_unitary(const CliffordRep& rep);

struct DiracConjugation {
  MatrixSymbol transformed;  // u o A o u^*
  MatrixSymbol principal;    // (|xi| Gamma - mass P(xi)) outside the unit ball
  MatrixSymbol residual;     // transformed - principal; supported in |xi| < 1
};
DiracConjugation conjugate_dirac(const CliffordRep& rep, double mass);

// Conjugation u o B o u^* of a perturbation B = bId (x) Id + bGamma (x) Gamma
// + sum_j bVec[j] (x) h_j (scalar symbols), sorted into structural buckets:
//   uncoupled:  Id and Gamma components (matrix-diagonal in the sorted basis),
//   odd:        h_j components (swap the Gamma blocks),
//   lowerOrder: commutator-type terms, one order below B,
//   cutoffRemainder: everything else, concentrated where the unit-ball cutoff
//                    of u interacts with the frequency shifts.
// The four parts sum to `conjugated` identically.
struct PerturbationParts {
  MatrixSymbol uncoupled;
  MatrixSymbol odd;
  MatrixSymbol lowerOrder;
  MatrixSymbol cutoffRemainder;
  MatrixSymbol conjugated;
};
PerturbationParts decompose_perturbation(const CliffordRep& rep, const MatrixSymbol& bId,
                                         const MatrixSymbol& bGamma,
                                         const std::vector<MatrixSymbol>& bVec);

}  // namespace gc
