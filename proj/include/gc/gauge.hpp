#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "gc/norms.hpp"
#include "gc/resonance.hpp"
#include "gc/symbol.hpp"

namespace gc {

// Entrywise split of b against the cutoff: nonResonant carries the entries
// where chi = 1 (the part a gauge rotation can remove), resonant the rest.
// The two parts sum to b identically.
struct ResonantSplit {
  MatrixSymbol resonant;
  MatrixSymbol nonResonant;
};
ResonantSplit split_resonant(const MatrixSymbol& b,
                             std::shared_ptr<const MatrixSymbol> aD,
                             const ResonanceSpec& spec);

// psi_theta(xi)_{jk} = i b_theta(xi)_{jk} / (aD_j(theta+xi) - aD_k(xi)) on the
// non-resonant set, zero elsewhere. Satisfies ad(aD, psi) = -b^{NR} exactly.
MatrixSymbol build_psi(std::shared_ptr<const MatrixSymbol> aD, const MatrixSymbol& bNR,
                       const ResonanceSpec& spec);

// Truncated conjugation series sum_{k=0}^{K} ad^k(a; psi) / k!.
MatrixSymbol gauge_conjugate(const MatrixSymbol& a, const MatrixSymbol& psi, int K);

// Smallest K with (2x)^{K+1}/(K+1)! e^{2x} <= relTol, clamped to cap. x is a
// zero-order norm of psi, so the result bounds the dropped series tail
// relative to the norm of a.
int choose_K(double psiNorm, double relTol, int cap = 24);

struct OneStepResult {
  MatrixSymbol transformed;  // sum_{k<=K} ad^k(a; psi)/k!
  MatrixSymbol psi;
  MatrixSymbol diag;       // zero-frequency matrix-diagonal part of a
  MatrixSymbol resonant;   // resonant off-diagonal part, kept as-is
  MatrixSymbol remainder;  // transformed - diag - resonant
  int K = 0;
  double psiWeight = 0.0;      // beta - delta, the weight exponent of psi
  double psiNormBound = 0.0;   // (1/s) [[a^OD]]_l^{(beta)}
  double remainderBound = 0.0; // (3/s) x^2 exp(2x/s)
};

// One gauge rotation against the zero-frequency diagonal of a. l and beta
// feed the predicted bounds (beta should be the order of the off-diagonal
// part). K < 0 selects the series length from the measured psi norm.
OneStepResult one_step_weak(const MatrixSymbol& a, const ResonanceSpec& spec, double l,
                            double beta, int K = -1, double relTol = 1e-9);

struct ParallelResult {
  MatrixSymbol transformed;
  std::vector<MatrixSymbol> psis;  // order-homogeneous generators, 1..kTilde
  MatrixSymbol diag;
  MatrixSymbol removedResonant;  // resonant content of the first kTilde orders
  MatrixSymbol remainder;        // transformed - diag - removedResonant
  int K = 0;
};

// Higher-order scheme: one exponential with generator Psi_1 + ... + Psi_kTilde
// chosen so the non-resonant couplings cancel through order kTilde. kTilde = 1
// coincides with one_step_weak.
ParallelResult parallel_transform(const MatrixSymbol& a, const ResonanceSpec& spec,
                                  int kTilde, double l, double beta, int K = -1,
                                  double relTol = 1e-9);

enum class UncoupleMode { OneStep, Full };

struct UncoupleResult {
  MatrixSymbol transformed;
  MatrixSymbol diag;        // zero-frequency matrix-diagonal reference
  MatrixSymbol uncoupledY;  // matrix-diagonal content gained by the rotation
  MatrixSymbol remainder;   // coupled content of the transformed symbol
  MatrixSymbol trimmed;     // entries dropped before the rotation
  std::vector<MatrixSymbol> psis;
  double sPrime = 1.0;
  std::vector<std::pair<int, int>> frozenPairs;
  double trimBound = 0.0;  // sum of dropped-entry sups at weight beta
  int kTilde = 1;
  double coeffSeparation = 0.0;  // min over pairs of principal coefficient gaps
};

// Removes couplings of an order-alpha system with order-beta perturbation.
// Full mode pushes the coupled remainder below order -targetN and requires
// pairwise distinct principal coefficients (DegenerateSeparation otherwise);
// OneStep freezes coinciding pairs and performs a single rotation. Entries
// whose weighted sups sum below epsTrim are dropped first, largest |theta|
// first. The gate radius sPrime is the smallest radius >= 1 at which the
// sampled diagonal gaps clear half the coefficient separation times <xi>^alpha.
UncoupleResult uncouple_system(const MatrixSymbol& a, double alpha, double beta,
                               UncoupleMode mode, int targetN = 1, double epsTrim = 1e-9);

// Least-squares slope of log sup-over-directions ||s_theta(r u)|| against
// log <r> on a log radius grid. Needs at least 1.5 decades (InsufficientRadii
// otherwise); returns -infinity when the entry vanishes on every sample.
double estimate_decay_order(const MatrixSymbol& s, const Freq& theta, double rLo,
                            double rHi, int nRadii = 24, int nDirs = 16);

// Closed-form bound calculators, for ledgers that compare measured norms
// against the predicted right-hand sides.
double predicted_psi_bound(double offDiagNorm, double s);
double predicted_remainder_bound(double offDiagNorm, double s);
// Bound on the series tail sum_{k>K} (2 psiNorm)^k / k! * aNorm.
double series_tail_bound(double psiNorm, double aNorm, int K);

struct OrderFit {
  double order = 0.0;     // largest fitted growth exponent over frequencies
  double residual = 0.0;  // RMS log-residual of the winning frequency's fit
};

// Growth order of ad(a, psi): fits log sup-over-directions of the commutator
// entry against log <r> for every frequency and keeps the steepest slope.
// order is -infinity when the commutator vanishes at every sample.
OrderFit commutator_order_estimate(const MatrixSymbol& a, const MatrixSymbol& psi,
                                   double rLo, double rHi, int nRadii = 24,
                                   int nDirs = 16);

}  // namespace gc
