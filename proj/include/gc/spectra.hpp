#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "gc/symbol.hpp"
#include "gc/types.hpp"

namespace gc {

// Periodic realization of a symbol: a position lattice (columns of `lattice`),
// its dual 2 pi lattice^{-T}, and a symbol whose frequencies all lie on the
// dual lattice. Declared principal growth a_j <xi>^alpha, when available,
// sharpens the trusted spectral window; otherwise the window is measured from
// the zero-frequency block.
struct PeriodicModel {
  Eigen::MatrixXd lattice;
  Eigen::MatrixXd dual;
  std::shared_ptr<const MatrixSymbol> symbol;
  std::vector<double> principalCoeffs;
  double alpha = 1.0;
  bool hasPrincipal = false;

  int d() const { return static_cast<int>(lattice.rows()); }
  int m() const { return symbol->m(); }
};

PeriodicModel make_periodic_model(const Eigen::MatrixXd& lattice, MatrixSymbol symbol,
                                  double quantTol = 1e-9);
PeriodicModel make_periodic_model(const Eigen::MatrixXd& lattice, MatrixSymbol symbol,
                                  std::vector<double> principalCoeffs, double alpha,
                                  double quantTol = 1e-9);

// Dual-lattice points with |theta| <= R, sorted by (|theta|, lexicographic).
std::vector<Freq> enumerate_dual(const Eigen::MatrixXd& lattice, double R);

// Shifted uniform sampling of the fundamental dual cell: coordinate i runs
// through (idx + offset) / counts[i], mapped through the dual basis. The
// default half-step offset avoids the high-symmetry points.
struct KGrid {
  std::vector<int> counts;
  double offset = 0.5;
};
std::vector<Eigen::VectorXd> k_points(const PeriodicModel& model, const KGrid& grid);

// Galerkin truncation of the fiber at quasi-momentum k: block row theta',
// block column theta holds eval(symbol, theta' - theta, k + theta).
struct FiberMatrix {
  std::vector<Freq> basis;
  Mat matrix;
};
FiberMatrix assemble_fiber(const PeriodicModel& model, const Eigen::VectorXd& k,
                           double R);

// Eigenvalues of the truncated fibers over a k grid. Row = k index, column =
// band rank in ascending order. Values outside [-lambdaMax, lambdaMax] are
// truncation artifacts; window-dependent quantities refuse to use them.
struct BandTable {
  std::vector<Eigen::VectorXd> kPoints;
  Eigen::MatrixXd bands;
  double R = 0.0;
  double lambdaMax = 0.0;
  double cellVolume = 1.0;  // |det lattice|, the IDS normalization
};
BandTable band_table(const PeriodicModel& model, const KGrid& grid, double R);
// Reference implementation without threading; band_table must agree exactly.
BandTable band_table_serial(const PeriodicModel& model, const KGrid& grid, double R);

// Integrated density of states over the half-open interval (lo, hi]: averaged
// eigenvalue count per k, per unit position-cell volume. Throws
// UntrustedWindow unless [lo, hi] sits inside the trusted window.
double ids(const BandTable& table, double lo, double hi);
// Counting functions N^+(lambda) = ids over (0, lambda] and N^-(lambda) =
// the same average over [-lambda, 0).
double n_positive(const BandTable& table, double lambda);
double n_negative(const BandTable& table, double lambda);

// Band-overlap margin at lambda: the largest one-sided depth min(lambda - inf,
// sup - lambda) over bands whose range [inf, sup] covers lambda; zero when no
// band covers lambda.
double overlap_zeta(const BandTable& table, double lambda);
// The same margin through counting functions: sup of t such that some fiber
// has strictly more eigenvalues below lambda - t than another has at or below
// lambda + t. Located by bisection; agrees with overlap_zeta on the sampled
// data and serves as an independent cross-check.
double overlap_zeta_counting(const BandTable& table, double lambda, double tol = 1e-9);

// Overlap profile over a lambda grid: gapIntervals collects the maximal runs
// of zero overlap, minOverlap the smallest positive margin (0 if none).
struct OverlapScan {
  std::vector<double> lambdas;
  std::vector<double> zetas;
  std::vector<std::pair<double, double>> gapIntervals;
  double minOverlap = 0.0;
};
OverlapScan bs_scan(const BandTable& table, double lo, double hi, int nPoints);

// Eigenvalue-count bracketing for a perturbation of fiber norm <= eps: for
// random closed intervals J inside the common trusted window, checks per k
// that N(J shrunk by eps; A) <= N(J; A+B) <= N(J grown by eps; A). Slacks are
// the worst count margins observed (negative = violation).
struct BracketReport {
  bool passed = false;
  int intervalCount = 0;
  double minLowerSlack = 0.0;
  double minUpperSlack = 0.0;
};
BracketReport bracket_check(const BandTable& unperturbed, const BandTable& perturbed,
                            double eps, int nIntervals = 50,
                            unsigned long long seed = 12345);

// CSV rows kIndex, k components, rank, value, trusted flag; 17 significant
// digits so reruns are byte-identical.
void write_band_csv(const BandTable& table, std::ostream& out);
void write_band_csv(const BandTable& table, const std::string& path);

}  // namespace gc
