#include "gc/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>

#include "gc/errors.hpp"
#include "gc/grids.hpp"
#include "gc/rng.hpp"

namespace gc {

namespace {

void check_lattice(const Eigen::MatrixXd& lattice) {
  if (lattice.rows() != lattice.cols() || lattice.rows() < 1)
    throw ConfigError("lattice basis must be a square matrix");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(lattice);
  double smax = svd.singularValues()(0);
  double smin = svd.singularValues()(lattice.rows() - 1);
  if (!(smin > 1e-12 * std::max(1.0, smax)))
    throw SingularLattice("lattice basis vectors are linearly dependent");
}

Eigen::MatrixXd dual_basis(const Eigen::MatrixXd& lattice) {
  return 2.0 * M_PI * lattice.inverse().transpose();
}

PeriodicModel make_model_core(const Eigen::MatrixXd& lattice, MatrixSymbol symbol,
                              double quantTol) {
  check_lattice(lattice);
  if (lattice.rows() != symbol.d())
    throw ConfigError("lattice dimension does not match the symbol");
  PeriodicModel model;
  model.lattice = lattice;
  model.dual = dual_basis(lattice);
  // theta = dual * n resolves to integer coordinates n = lattice^T theta / 2pi.
  for (const auto& kv : symbol.entries()) {
    Eigen::VectorXd theta(symbol.d());
    for (int i = 0; i < symbol.d(); ++i) theta(i) = kv.first[i];
    Eigen::VectorXd n = lattice.transpose() * theta / (2.0 * M_PI);
    for (int i = 0; i < symbol.d(); ++i) {
      if (std::abs(n(i) - std::round(n(i))) > quantTol)
        throw ConfigError("frequency " + kv.first.to_string() +
                          " is not on the dual lattice");
    }
  }
  model.symbol = std::make_shared<const MatrixSymbol>(std::move(symbol));
  return model;
}

// Integer coordinates of a dual-lattice point in the dual basis. Frequency
// values are quantized, so block lookups go through these exact integers
// rather than through sums of rounded components.
std::vector<long> dual_coords(const Eigen::MatrixXd& lattice, const Freq& f) {
  Eigen::VectorXd theta(f.dim());
  for (int i = 0; i < f.dim(); ++i) theta(i) = f[i];
  Eigen::VectorXd n = lattice.transpose() * theta / (2.0 * M_PI);
  std::vector<long> out(f.dim());
  for (int i = 0; i < f.dim(); ++i) out[i] = std::lround(n(i));
  return out;
}

std::vector<long> coord_sum(const std::vector<long>& a, const std::vector<long>& b) {
  std::vector<long> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

// Count of row entries inside the interval with the given end inclusions.
long count_in(const Eigen::MatrixXd& bands, int row, double lo, double hi,
              bool incLo, bool incHi) {
  long c = 0;
  for (int j = 0; j < bands.cols(); ++j) {
    double v = bands(row, j);
    bool aboveLo = incLo ? (v >= lo) : (v > lo);
    bool belowHi = incHi ? (v <= hi) : (v < hi);
    if (aboveLo && belowHi) ++c;
  }
  return c;
}

void require_window(const BandTable& table, double lo, double hi) {
  double tol = 1e-12 * (1.0 + std::abs(table.lambdaMax));
  if (lo < -table.lambdaMax - tol || hi > table.lambdaMax + tol)
    throw UntrustedWindow("interval leaves the trusted window [-" +
                          std::to_string(table.lambdaMax) + ", " +
                          std::to_string(table.lambdaMax) + "]");
}

double trusted_heuristic(const PeriodicModel& model, double R) {
  double rStar = R - model.symbol->reach();
  if (rStar <= 0.0) return 0.0;
  if (model.hasPrincipal) {
    double cMin = std::numeric_limits<double>::infinity();
    for (double c : model.principalCoeffs) cMin = std::min(cMin, std::abs(c));
    return 0.5 * cMin * std::pow(rStar, model.alpha);
  }
  // Measured fallback: the smallest eigenvalue magnitude of the
  // zero-frequency block on the truncation sphere.
  auto dirs = unit_directions(model.d(), model.d() == 1 ? 2 : 32);
  double floor = std::numeric_limits<double>::infinity();
  EvalContext ctx;
  for (const auto& u : dirs) {
    std::vector<double> xi(model.d());
    for (int i = 0; i < model.d(); ++i) xi[i] = rStar * u[i];
    Mat block = model.symbol->eval(Freq::zero(model.d()), xi, &ctx);
    Mat herm = 0.5 * (block + block.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<Mat> es(herm, Eigen::EigenvaluesOnly);
    for (int j = 0; j < es.eigenvalues().size(); ++j)
      floor = std::min(floor, std::abs(es.eigenvalues()(j)));
  }
  return 0.5 * floor;
}

Mat fiber_matrix(const PeriodicModel& model, const std::vector<Freq>& basis,
                 const Eigen::VectorXd& k) {
  const int m = model.m();
  const int n = static_cast<int>(basis.size()) * m;
  std::map<std::vector<long>, int> index;
  std::vector<std::vector<long>> basisCoords(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    basisCoords[i] = dual_coords(model.lattice, basis[i]);
    index[basisCoords[i]] = static_cast<int>(i);
  }
  std::vector<std::pair<Freq, std::vector<long>>> entryCoords;
  for (const auto& kv : model.symbol->entries())
    entryCoords.emplace_back(kv.first, dual_coords(model.lattice, kv.first));
  Mat M = Mat::Zero(n, n);
  EvalContext ctx;
  for (std::size_t c = 0; c < basis.size(); ++c) {
    std::vector<double> point(model.d());
    for (int i = 0; i < model.d(); ++i) point[i] = k(i) + basis[c][i];
    for (const auto& ec : entryCoords) {
      auto it = index.find(coord_sum(ec.second, basisCoords[c]));
      if (it == index.end()) continue;
      M.block(it->second * m, static_cast<int>(c) * m, m, m) =
          model.symbol->eval(ec.first, point, &ctx);
    }
  }
  return M;
}

Eigen::VectorXd fiber_eigenvalues(const PeriodicModel& model,
                                  const std::vector<Freq>& basis,
                                  const Eigen::VectorXd& k) {
  Eigen::SelfAdjointEigenSolver<Mat> es(fiber_matrix(model, basis, k),
                                        Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

BandTable band_table_core(const PeriodicModel& model, const KGrid& grid, double R,
                          bool parallel) {
  BandTable table;
  table.kPoints = k_points(model, grid);
  table.R = R;
  table.cellVolume = std::abs(model.lattice.determinant());
  std::vector<Freq> basis = enumerate_dual(model.lattice, R);
  const int nk = static_cast<int>(table.kPoints.size());
  const int n = static_cast<int>(basis.size()) * model.m();
  table.bands.resize(nk, n);
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int ik = 0; ik < nk; ++ik)
      table.bands.row(ik) =
          fiber_eigenvalues(model, basis, table.kPoints[ik]).transpose();
  } else {
    for (int ik = 0; ik < nk; ++ik)
      table.bands.row(ik) =
          fiber_eigenvalues(model, basis, table.kPoints[ik]).transpose();
  }
  // The table cannot certify anything beyond the largest magnitude present in
  // every fiber, nor beyond the scale where the truncation boundary interferes.
  double coverage = std::numeric_limits<double>::infinity();
  for (int ik = 0; ik < nk; ++ik)
    coverage = std::min(coverage,
                        std::max(std::abs(table.bands(ik, 0)),
                                 std::abs(table.bands(ik, n - 1))));
  table.lambdaMax = std::min(trusted_heuristic(model, R), coverage);
  return table;
}

}  // namespace

PeriodicModel make_periodic_model(const Eigen::MatrixXd& lattice, MatrixSymbol symbol,
                                  double quantTol) {
  return make_model_core(lattice, std::move(symbol), quantTol);
}

PeriodicModel make_periodic_model(const Eigen::MatrixXd& lattice, MatrixSymbol symbol,
                                  std::vector<double> principalCoeffs, double alpha,
                                  double quantTol) {
  if (static_cast<int>(principalCoeffs.size()) != symbol.m())
    throw ConfigError("one principal coefficient per sheet is required");
  if (!(alpha > 0.0)) throw ConfigError("principal order must be positive");
  PeriodicModel model = make_model_core(lattice, std::move(symbol), quantTol);
  model.principalCoeffs = std::move(principalCoeffs);
  model.alpha = alpha;
  model.hasPrincipal = true;
  return model;
}

std::vector<Freq> enumerate_dual(const Eigen::MatrixXd& lattice, double R) {
  check_lattice(lattice);
  if (!(R >= 0.0)) throw ConfigError("enumeration radius must be nonnegative");
  Eigen::MatrixXd dual = dual_basis(lattice);
  const int d = static_cast<int>(lattice.rows());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(dual);
  double smin = svd.singularValues()(d - 1);
  const long box = static_cast<long>(std::ceil(R / smin)) + 1;
  const double rTol = R * (1.0 + 1e-12) + 1e-12;
  std::vector<Freq> out;
  std::vector<long> n(d, -box);
  while (true) {
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < d; ++i) theta += static_cast<double>(n[i]) * dual.col(i);
    if (theta.norm() <= rTol) {
      std::vector<double> comps(d);
      for (int i = 0; i < d; ++i) comps[i] = theta(i);
      out.push_back(Freq::from_doubles(comps));
    }
    int axis = d - 1;
    while (axis >= 0 && n[axis] == box) {
      n[axis] = -box;
      --axis;
    }
    if (axis < 0) break;
    ++n[axis];
  }
  std::sort(out.begin(), out.end(), [](const Freq& a, const Freq& b) {
    double na = a.norm(), nb = b.norm();
    if (na < nb - 1e-9) return true;
    if (nb < na - 1e-9) return false;
    return a < b;
  });
  return out;
}

std::vector<Eigen::VectorXd> k_points(const PeriodicModel& model, const KGrid& grid) {
  const int d = model.d();
  if (static_cast<int>(grid.counts.size()) != d)
    throw ConfigError("k grid needs one count per dimension");
  long total = 1;
  for (int c : grid.counts) {
    if (c < 1) throw ConfigError("k grid counts must be positive");
    total *= c;
  }
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(total);
  std::vector<int> idx(d, 0);
  while (true) {
    Eigen::VectorXd t(d);
    for (int i = 0; i < d; ++i)
      t(i) = (static_cast<double>(idx[i]) + grid.offset) / grid.counts[i];
    pts.push_back(model.dual * t);
    int axis = d - 1;
    while (axis >= 0 && idx[axis] == grid.counts[axis] - 1) {
      idx[axis] = 0;
      --axis;
    }
    if (axis < 0) break;
    ++idx[axis];
  }
  return pts;
}

FiberMatrix assemble_fiber(const PeriodicModel& model, const Eigen::VectorXd& k,
                           double R) {
  if (k.size() != model.d()) throw DimensionMismatch("quasi-momentum dimension");
  FiberMatrix fiber;
  fiber.basis = enumerate_dual(model.lattice, R);
  fiber.matrix = fiber_matrix(model, fiber.basis, k);
  return fiber;
}

BandTable band_table(const PeriodicModel& model, const KGrid& grid, double R) {
  return band_table_core(model, grid, R, true);
}

BandTable band_table_serial(const PeriodicModel& model, const KGrid& grid, double R) {
  return band_table_core(model, grid, R, false);
}

double ids(const BandTable& table, double lo, double hi) {
  if (!(hi >= lo)) throw ConfigError("interval ends out of order");
  require_window(table, lo, hi);
  long total = 0;
  for (int ik = 0; ik < table.bands.rows(); ++ik)
    total += count_in(table.bands, ik, lo, hi, false, true);
  return static_cast<double>(total) /
         (static_cast<double>(table.bands.rows()) * table.cellVolume);
}

double n_positive(const BandTable& table, double lambda) {
  return ids(table, 0.0, lambda);
}

double n_negative(const BandTable& table, double lambda) {
  if (!(lambda >= 0.0)) throw ConfigError("negative counting needs lambda >= 0");
  require_window(table, -lambda, 0.0);
  long total = 0;
  for (int ik = 0; ik < table.bands.rows(); ++ik)
    total += count_in(table.bands, ik, -lambda, 0.0, true, false);
  return static_cast<double>(total) /
         (static_cast<double>(table.bands.rows()) * table.cellVolume);
}

double overlap_zeta(const BandTable& table, double lambda) {
  require_window(table, lambda, lambda);
  double zeta = 0.0;
  for (int j = 0; j < table.bands.cols(); ++j) {
    double lo = table.bands.col(j).minCoeff();
    double hi = table.bands.col(j).maxCoeff();
    double depth = std::min(lambda - lo, hi - lambda);
    zeta = std::max(zeta, std::max(0.0, depth));
  }
  return zeta;
}

double overlap_zeta_counting(const BandTable& table, double lambda, double tol) {
  require_window(table, lambda, lambda);
  const double inf = std::numeric_limits<double>::infinity();
  auto overlaps_at = [&](double t) {
    long minUpper = std::numeric_limits<long>::max();
    long maxLower = std::numeric_limits<long>::min();
    for (int ik = 0; ik < table.bands.rows(); ++ik) {
      minUpper = std::min(minUpper,
                          count_in(table.bands, ik, -inf, lambda + t, false, true));
      maxLower = std::max(maxLower,
                          count_in(table.bands, ik, -inf, lambda - t, false, false));
    }
    return minUpper < maxLower;
  };
  if (!overlaps_at(0.0)) return 0.0;
  double lo = 0.0;
  double hi = 2.0 * (table.lambdaMax + std::abs(lambda)) + 1.0;
  for (int iter = 0; iter < 200 && hi - lo > tol; ++iter) {
    double mid = 0.5 * (lo + hi);
    (overlaps_at(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

OverlapScan bs_scan(const BandTable& table, double lo, double hi, int nPoints) {
  if (nPoints < 2) throw ConfigError("overlap scan needs at least two points");
  require_window(table, lo, hi);
  OverlapScan scan;
  for (int i = 0; i < nPoints; ++i) {
    double lambda = lo + (hi - lo) * static_cast<double>(i) / (nPoints - 1);
    scan.lambdas.push_back(lambda);
    scan.zetas.push_back(overlap_zeta(table, lambda));
  }
  double minPos = std::numeric_limits<double>::infinity();
  int runStart = -1;
  for (int i = 0; i < nPoints; ++i) {
    if (scan.zetas[i] == 0.0) {
      if (runStart < 0) runStart = i;
    } else {
      minPos = std::min(minPos, scan.zetas[i]);
      if (runStart >= 0) {
        scan.gapIntervals.emplace_back(scan.lambdas[runStart], scan.lambdas[i - 1]);
        runStart = -1;
      }
    }
  }
  if (runStart >= 0)
    scan.gapIntervals.emplace_back(scan.lambdas[runStart], scan.lambdas[nPoints - 1]);
  scan.minOverlap = std::isinf(minPos) ? 0.0 : minPos;
  return scan;
}

BracketReport bracket_check(const BandTable& unperturbed, const BandTable& perturbed,
                            double eps, int nIntervals, unsigned long long seed) {
  if (unperturbed.R != perturbed.R)
    throw GridMismatch("tables use different truncation radii");
  if (unperturbed.kPoints.size() != perturbed.kPoints.size())
    throw GridMismatch("tables use different k grids");
  for (std::size_t i = 0; i < unperturbed.kPoints.size(); ++i)
    if ((unperturbed.kPoints[i] - perturbed.kPoints[i]).norm() > 1e-12)
      throw GridMismatch("tables use different k grids");
  if (!(eps >= 0.0)) throw ConfigError("perturbation bound must be nonnegative");
  double W = std::min(unperturbed.lambdaMax, perturbed.lambdaMax);
  if (!(W > 2.0 * eps)) throw ConfigError("trusted window too small for the bracket");
  BracketReport report;
  report.intervalCount = nIntervals;
  report.minLowerSlack = std::numeric_limits<double>::infinity();
  report.minUpperSlack = std::numeric_limits<double>::infinity();
  for (int i = 0; i < nIntervals; ++i) {
    double u1 = rng_uniform(seed, 2 * static_cast<std::uint64_t>(i));
    double u2 = rng_uniform(seed, 2 * static_cast<std::uint64_t>(i) + 1);
    double a = -W + eps + u1 * 2.0 * (W - eps);
    double b = -W + eps + u2 * 2.0 * (W - eps);
    double lo = std::min(a, b), hi = std::max(a, b);
    for (int ik = 0; ik < unperturbed.bands.rows(); ++ik) {
      long inner = (lo + eps <= hi - eps)
                       ? count_in(unperturbed.bands, ik, lo + eps, hi - eps, true, true)
                       : 0;
      long mid = count_in(perturbed.bands, ik, lo, hi, true, true);
      long outer = count_in(unperturbed.bands, ik, lo - eps, hi + eps, true, true);
      report.minLowerSlack =
          std::min(report.minLowerSlack, static_cast<double>(mid - inner));
      report.minUpperSlack =
          std::min(report.minUpperSlack, static_cast<double>(outer - mid));
    }
  }
  report.passed = report.minLowerSlack >= 0.0 && report.minUpperSlack >= 0.0;
  return report;
}

void write_band_csv(const BandTable& table, std::ostream& out) {
  const int d = table.kPoints.empty() ? 0 : static_cast<int>(table.kPoints[0].size());
  out << "kIndex";
  for (int i = 0; i < d; ++i) out << ",k" << i;
  out << ",rank,value,trusted\n";
  char buf[40];
  for (int ik = 0; ik < table.bands.rows(); ++ik) {
    std::string prefix = std::to_string(ik);
    for (int i = 0; i < d; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", table.kPoints[ik](i));
      prefix += ",";
      prefix += buf;
    }
    for (int j = 0; j < table.bands.cols(); ++j) {
      double v = table.bands(ik, j);
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << prefix << ',' << j << ',' << buf << ','
          << (std::abs(v) <= table.lambdaMax ? 1 : 0) << '\n';
    }
  }
}

void write_band_csv(const BandTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  write_band_csv(table, out);
}

}  // namespace gc
