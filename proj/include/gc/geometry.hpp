#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gc/spectra.hpp"
#include "gc/types.hpp"

namespace gc {

// Shell geometry around the level rho^alpha: sheet j carries the radial
// profile g_j(xi) = a_j |xi|^alpha + G_j(|xi|). kappa bounds the frequency
// ball that defines resonant directions, nu the perpendicularity threshold
// 2 rho^{-nu}, Z the widened collar factor. The radial profiles must be
// increasing across the sampled shell; the bracket search assumes it.
struct ResonanceGeometryConfig {
  int d = 2;
  std::vector<double> sheetCoeffs;
  double alpha = 2.0;
  double rho = 50.0;
  double delta = 1e-2;
  double kappa = 0.2;
  double nu = 0.7;
  double omega = 0.6;
  std::vector<Eigen::VectorXd> freqs;
  double Z = 8.0;
  std::vector<std::function<double(double)>> radialPerturbations;

  int sheets() const { return static_cast<int>(sheetCoeffs.size()); }
};

// Throws ConfigError unless 0 < kappa < 1/d^2, kappa d < nu < 1,
// delta < rho^alpha / 4, and the remaining fields are positive and sized
// consistently.
void validate_geometry(const ResonanceGeometryConfig& cfg);

// Radial profile value g_j(r).
double sheet_value(const ResonanceGeometryConfig& cfg, int sheet, double r);

// Per-sheet region flags at xi. shell: |g_j - rho^alpha| <= delta; resonant:
// in the shell and nearly perpendicular to some frequency of norm <= rho^kappa
// (|cos| < 2 rho^{-nu}); good: in the shell and not resonant. The wide
// variants use the collar half-width Z delta instead.
struct RegionMembership {
  std::vector<bool> shell, resonant, good;
  std::vector<bool> shellWide, resonantWide, goodWide;
};
RegionMembership region_membership(const ResonanceGeometryConfig& cfg,
                                   const Eigen::VectorXd& xi);

enum class GeoRegion { Shell, Resonant, Good, ShellWide, ResonantWide, GoodWide };

// Monte Carlo volume of the selected region on one sheet. Directions are
// uniform on the sphere, radii uniform over the per-direction bracket of the
// widened shell; the weight (rHi - rLo) r^{d-1} area(S^{d-1}) makes the
// estimate unbiased. Counter-based draws with a fixed per-sample stride, so
// the parallel and serial versions return bit-identical results.
struct McEstimate {
  double value = 0.0;
  double stderrValue = 0.0;
  long hits = 0;
  long samples = 0;
};
McEstimate mc_volume(const ResonanceGeometryConfig& cfg, int sheet, GeoRegion region,
                     long nSamples, std::uint64_t seed);
McEstimate mc_volume_serial(const ResonanceGeometryConfig& cfg, int sheet,
                            GeoRegion region, long nSamples, std::uint64_t seed);

// Volume of the wide-angle self-intersection: points of sheet i's shell whose
// translate by -offset lies on sheet j's shell while xi and xi - offset open
// an angle beyond omega.
McEstimate crossing_volume(const ResonanceGeometryConfig& cfg, int sheetI, int sheetJ,
                           double omega, const Eigen::VectorXd& offset, long nSamples,
                           std::uint64_t seed);

// Exact count of (theta, sheet) pairs with |theta| <= searchRadius and
// xi + theta in the selected region.
long n_count(const ResonanceGeometryConfig& cfg, const Eigen::VectorXd& xi,
             GeoRegion region, double searchRadius);

// Rejection sampling for a point of the good region whose translates see the
// good region strictly more often than the widened resonant one (factor =
// sheet count) and admit no wide-angle pair of widened-good translates.
// Throws NotFound with the rejection tallies after maxIterations draws.
struct GoodPointResult {
  Eigen::VectorXd xi;
  long iterations = 0;
  long goodCount = 0;
  long resonantWideCount = 0;
  long rejectedShell = 0;
  long rejectedCounting = 0;
  long rejectedWideAngle = 0;
  double searchRadius = 0.0;
};
GoodPointResult find_good_point(const ResonanceGeometryConfig& cfg, std::uint64_t seed,
                                long maxIterations = 10000, double searchFactor = 3.0);

// Certificate for the segment [(1-t) xi0, (1+t) xi0]: folds the segment to
// quasi-momenta with the fixed fold vector of xi0, classifies fiber branches
// by the radial proxy at the segment midpoint (mu = in the good region, tau =
// outside the wide collar, nu = the rest), samples the proxy at nine points to
// confirm that mu branches rise through the window while tau branches stay
// clear of it, and checks the eigenvalue-count drop across the window on the
// truncated fibers. t = tFactor rho^{-nu}, floored so the mu branches can
// traverse the window; the factor keeps distant branches from drifting
// through the window during the segment, which would spoil the count.
struct SegmentReport {
  double t = 0.0;
  Eigen::VectorXd k1, k2;
  long muCount = 0, tauCount = 0, nuCount = 0;
  long muCoveringCount = 0;  // mu branches whose sampled range spans the window
  bool muIncreasing = false;
  bool muEndpointsOk = false;  // each mu starts below or ends above the window
  bool tauStaysOutside = false;
  bool nuOutnumbered = false;  // more covering mu branches than nu branches
  bool classificationConsistent = false;
  long countBelowAtStart = 0, countBelowAtEnd = 0;
  bool countingOk = false;
};
SegmentReport counting_certificate(const ResonanceGeometryConfig& cfg,
                                   const Eigen::VectorXd& xi0,
                                   const PeriodicModel& model, double R,
                                   double tFactor = 0.005);

// Arithmetic diagnostics of a frequency set under kTilde-fold sums: the
// largest and smallest nonzero sum lengths, the smallest gap between distinct
// frequencies, and the smallest principal-angle sine between strongly
// distinct spans of at most d frequencies (after removing their
// intersection). noSubspacePairs reports when every pair of spans is nested,
// in which case the sine defaults to 1.
struct FreqDiagnostics {
  double maxSum = 0.0;
  double minNonzeroSum = 0.0;
  double subspaceGap = 1.0;
  double minPairDistance = 0.0;
  bool noSubspacePairs = false;
};
FreqDiagnostics freq_diagnostics(const std::vector<Eigen::VectorXd>& freqs, int kTilde,
                                 long budget = 100000);

}  // namespace gc
