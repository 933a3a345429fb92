#include "gc/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "gc/errors.hpp"
#include "gc/rng.hpp"

namespace gc {
namespace {

constexpr double kPi = 3.14159265358979323846;

double sphere_area(int d) {
  return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
}

// Precomputed per-config quantities: the level rho^alpha, the
// perpendicularity threshold, and the unit vectors of the frequencies inside
// the kappa ball that define resonant directions.
struct GeoContext {
  double level = 0.0;
  double cosThresh = 0.0;
  std::vector<Eigen::VectorXd> smallDirs;
};

GeoContext make_context(const ResonanceGeometryConfig& cfg) {
  GeoContext ctx;
  ctx.level = std::pow(cfg.rho, cfg.alpha);
  ctx.cosThresh = 2.0 * std::pow(cfg.rho, -cfg.nu);
  const double ball = std::pow(cfg.rho, cfg.kappa);
  for (const auto& th : cfg.freqs) {
    const double n = th.norm();
    if (n > 0.0 && n <= ball) ctx.smallDirs.push_back(th / n);
  }
  return ctx;
}

bool direction_resonant(const GeoContext& ctx, const Eigen::VectorXd& unitXi) {
  for (const auto& u : ctx.smallDirs) {
    if (std::abs(unitXi.dot(u)) < ctx.cosThresh) return true;
  }
  return false;
}

bool wide_region(GeoRegion region) {
  return region == GeoRegion::ShellWide || region == GeoRegion::ResonantWide ||
         region == GeoRegion::GoodWide;
}

// Membership test for one sheet; points at the origin belong to no region.
bool region_flag(const ResonanceGeometryConfig& cfg, const GeoContext& ctx, int sheet,
                 GeoRegion region, const Eigen::VectorXd& xi) {
  const double r = xi.norm();
  if (r <= 0.0) return false;
  const double half = wide_region(region) ? cfg.Z * cfg.delta : cfg.delta;
  if (std::abs(sheet_value(cfg, sheet, r) - ctx.level) > half) return false;
  if (region == GeoRegion::Shell || region == GeoRegion::ShellWide) return true;
  const bool res = direction_resonant(ctx, xi / r);
  if (region == GeoRegion::Resonant || region == GeoRegion::ResonantWide) return res;
  return !res;
}

// Bracket [lo, hi] covering the radii where |g_j - level| <= halfWidth along
// any ray. The profile is assumed increasing through the collar; each edge is
// located by 60 bisection steps, keeping the outside iterate so the bracket
// never clips the shell.
struct RadialBracket {
  double lo = 0.0;
  double hi = 0.0;
};

RadialBracket shell_bracket(const ResonanceGeometryConfig& cfg, int sheet,
                            double halfWidth) {
  const double level = std::pow(cfg.rho, cfg.alpha);
  const double lowTarget = level - halfWidth;
  const double highTarget = level + halfWidth;
  double hi = cfg.rho > 0.0 ? cfg.rho : 1.0;
  int doublings = 0;
  while (sheet_value(cfg, sheet, hi) < highTarget) {
    hi *= 2.0;
    if (++doublings > 60) {
      throw RadialBracketFailure("radial profile never reaches the collar top");
    }
  }
  RadialBracket out;
  out.lo = 0.0;
  if (sheet_value(cfg, sheet, 0.0) < lowTarget) {
    double a = 0.0, b = hi;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (a + b);
      (sheet_value(cfg, sheet, mid) < lowTarget ? a : b) = mid;
    }
    out.lo = a;
  }
  double a = out.lo, b = hi;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (a + b);
    (sheet_value(cfg, sheet, mid) < highTarget ? a : b) = mid;
  }
  out.hi = b;
  if (!(out.lo < out.hi)) {
    throw RadialBracketFailure("degenerate radial bracket");
  }
  return out;
}

// d standard gaussians via Box-Muller on counter draws, normalized.
Eigen::VectorXd sample_direction(int d, std::uint64_t seed, std::uint64_t base) {
  Eigen::VectorXd u(d);
  const int pairs = (d + 1) / 2;
  for (int p = 0; p < pairs; ++p) {
    const double u1 = 1.0 - rng_uniform(seed, base + 2 * p);
    const double u2 = rng_uniform(seed, base + 2 * p + 1);
    const double r = std::sqrt(-2.0 * std::log(u1));
    u[2 * p] = r * std::cos(2.0 * kPi * u2);
    if (2 * p + 1 < d) u[2 * p + 1] = r * std::sin(2.0 * kPi * u2);
  }
  const double n = u.norm();
  if (n < 1e-12) {
    u.setZero();
    u[0] = 1.0;
    return u;
  }
  return u / n;
}

void check_sheet(const ResonanceGeometryConfig& cfg, int sheet) {
  if (sheet < 0 || sheet >= cfg.sheets()) {
    throw ConfigError("sheet index out of range");
  }
}

// Shared sampling kernel. Each sample owns a fixed counter window, per-batch
// partial sums are combined in batch order, so thread count and scheduling
// cannot change the result.
template <typename Indicator>
McEstimate mc_run(const ResonanceGeometryConfig& cfg, const RadialBracket& bracket,
                  long nSamples, std::uint64_t seed, bool parallel,
                  const Indicator& hit) {
  if (nSamples <= 0) throw ConfigError("sample count must be positive");
  const int d = cfg.d;
  const double area = sphere_area(d);
  const double span = bracket.hi - bracket.lo;
  const std::uint64_t stride = static_cast<std::uint64_t>(2 * d + 2);
  const long batch = 4096;
  const long nBatches = (nSamples + batch - 1) / batch;
  std::vector<double> sums(nBatches, 0.0), sqs(nBatches, 0.0);
  std::vector<long> hitCounts(nBatches, 0);

#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long b = 0; b < nBatches; ++b) {
    double sum = 0.0, sq = 0.0;
    long nh = 0;
    const long end = std::min(nSamples, (b + 1) * batch);
    for (long s = b * batch; s < end; ++s) {
      const std::uint64_t base = static_cast<std::uint64_t>(s) * stride;
      const Eigen::VectorXd u = sample_direction(d, seed, base);
      const double t = rng_uniform(seed, base + static_cast<std::uint64_t>(2 * d));
      const double r = bracket.lo + span * t;
      const Eigen::VectorXd xi = r * u;
      if (hit(xi)) {
        const double val = span * std::pow(r, d - 1) * area;
        sum += val;
        sq += val * val;
        ++nh;
      }
    }
    sums[b] = sum;
    sqs[b] = sq;
    hitCounts[b] = nh;
  }

  double total = 0.0, totalSq = 0.0;
  long hits = 0;
  for (long b = 0; b < nBatches; ++b) {
    total += sums[b];
    totalSq += sqs[b];
    hits += hitCounts[b];
  }
  McEstimate out;
  out.samples = nSamples;
  out.hits = hits;
  out.value = total / static_cast<double>(nSamples);
  if (nSamples > 1) {
    const double n = static_cast<double>(nSamples);
    const double var = std::max(0.0, (totalSq - total * total / n) / (n - 1.0));
    out.stderrValue = std::sqrt(var / n);
  }
  return out;
}

McEstimate region_volume(const ResonanceGeometryConfig& cfg, int sheet,
                         GeoRegion region, long nSamples, std::uint64_t seed,
                         bool parallel) {
  validate_geometry(cfg);
  check_sheet(cfg, sheet);
  const GeoContext ctx = make_context(cfg);
  const RadialBracket bracket = shell_bracket(cfg, sheet, cfg.Z * cfg.delta);
  return mc_run(cfg, bracket, nSamples, seed, parallel, [&](const Eigen::VectorXd& xi) {
    return region_flag(cfg, ctx, sheet, region, xi);
  });
}

double angle_between(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const double c = x.dot(y) / (x.norm() * y.norm());
  return std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace

void validate_geometry(const ResonanceGeometryConfig& cfg) {
  if (cfg.d < 1) throw ConfigError("dimension must be at least 1");
  if (cfg.sheetCoeffs.empty()) throw ConfigError("at least one sheet coefficient");
  for (double a : cfg.sheetCoeffs) {
    if (!(a > 0.0)) throw ConfigError("sheet coefficients must be positive");
  }
  if (!(cfg.alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (!(cfg.rho > 0.0)) throw ConfigError("rho must be positive");
  if (!(cfg.delta > 0.0)) throw ConfigError("delta must be positive");
  if (!(cfg.Z >= 1.0)) throw ConfigError("collar factor Z must be at least 1");
  if (!(cfg.omega > 0.0 && cfg.omega < kPi)) {
    throw ConfigError("angle threshold omega must lie in (0, pi)");
  }
  const double dd = static_cast<double>(cfg.d);
  if (!(cfg.kappa > 0.0 && cfg.kappa < 1.0 / (dd * dd))) {
    throw ConfigError("kappa must lie in (0, 1/d^2)");
  }
  if (!(cfg.nu > cfg.kappa * dd && cfg.nu < 1.0)) {
    throw ConfigError("nu must lie in (kappa d, 1)");
  }
  if (!(cfg.delta < std::pow(cfg.rho, cfg.alpha) / 4.0)) {
    throw ConfigError("delta must stay below rho^alpha / 4");
  }
  for (const auto& th : cfg.freqs) {
    if (th.size() != cfg.d) throw ConfigError("frequency dimension mismatch");
  }
  if (!cfg.radialPerturbations.empty() &&
      static_cast<int>(cfg.radialPerturbations.size()) != cfg.sheets()) {
    throw ConfigError("one radial perturbation per sheet, or none");
  }
}

double sheet_value(const ResonanceGeometryConfig& cfg, int sheet, double r) {
  check_sheet(cfg, sheet);
  double g = cfg.sheetCoeffs[sheet] * std::pow(r, cfg.alpha);
  if (!cfg.radialPerturbations.empty() && cfg.radialPerturbations[sheet]) {
    g += cfg.radialPerturbations[sheet](r);
  }
  return g;
}

RegionMembership region_membership(const ResonanceGeometryConfig& cfg,
                                   const Eigen::VectorXd& xi) {
  validate_geometry(cfg);
  if (xi.size() != cfg.d) throw ConfigError("point dimension mismatch");
  if (xi.norm() == 0.0) throw ZeroVector("region membership is undefined at 0");
  const GeoContext ctx = make_context(cfg);
  const int m = cfg.sheets();
  RegionMembership out;
  out.shell.resize(m);
  out.resonant.resize(m);
  out.good.resize(m);
  out.shellWide.resize(m);
  out.resonantWide.resize(m);
  out.goodWide.resize(m);
  for (int j = 0; j < m; ++j) {
    out.shell[j] = region_flag(cfg, ctx, j, GeoRegion::Shell, xi);
    out.resonant[j] = region_flag(cfg, ctx, j, GeoRegion::Resonant, xi);
    out.good[j] = region_flag(cfg, ctx, j, GeoRegion::Good, xi);
    out.shellWide[j] = region_flag(cfg, ctx, j, GeoRegion::ShellWide, xi);
    out.resonantWide[j] = region_flag(cfg, ctx, j, GeoRegion::ResonantWide, xi);
    out.goodWide[j] = region_flag(cfg, ctx, j, GeoRegion::GoodWide, xi);
  }
  return out;
}

McEstimate mc_volume(const ResonanceGeometryConfig& cfg, int sheet, GeoRegion region,
                     long nSamples, std::uint64_t seed) {
  return region_volume(cfg, sheet, region, nSamples, seed, true);
}

McEstimate mc_volume_serial(const ResonanceGeometryConfig& cfg, int sheet,
                            GeoRegion region, long nSamples, std::uint64_t seed) {
  return region_volume(cfg, sheet, region, nSamples, seed, false);
}

McEstimate crossing_volume(const ResonanceGeometryConfig& cfg, int sheetI, int sheetJ,
                           double omega, const Eigen::VectorXd& offset, long nSamples,
                           std::uint64_t seed) {
  validate_geometry(cfg);
  check_sheet(cfg, sheetI);
  check_sheet(cfg, sheetJ);
  if (offset.size() != cfg.d) throw ConfigError("offset dimension mismatch");
  if (!(omega > 0.0 && omega < kPi)) throw ConfigError("omega must lie in (0, pi)");
  const GeoContext ctx = make_context(cfg);
  const RadialBracket bracket = shell_bracket(cfg, sheetI, cfg.delta);
  return mc_run(cfg, bracket, nSamples, seed, true, [&](const Eigen::VectorXd& xi) {
    if (!region_flag(cfg, ctx, sheetI, GeoRegion::Shell, xi)) return false;
    const Eigen::VectorXd q = xi - offset;
    if (q.norm() == 0.0) return false;
    if (!region_flag(cfg, ctx, sheetJ, GeoRegion::Shell, q)) return false;
    return angle_between(xi, q) > omega;
  });
}

long n_count(const ResonanceGeometryConfig& cfg, const Eigen::VectorXd& xi,
             GeoRegion region, double searchRadius) {
  validate_geometry(cfg);
  if (xi.size() != cfg.d) throw ConfigError("point dimension mismatch");
  if (!(searchRadius >= 0.0)) throw ConfigError("search radius must be nonnegative");
  const GeoContext ctx = make_context(cfg);
  long count = 0;
  for (const auto& th : cfg.freqs) {
    if (th.norm() > searchRadius) continue;
    const Eigen::VectorXd p = xi + th;
    if (p.norm() == 0.0) continue;
    for (int j = 0; j < cfg.sheets(); ++j) {
      if (region_flag(cfg, ctx, j, region, p)) ++count;
    }
  }
  return count;
}

GoodPointResult find_good_point(const ResonanceGeometryConfig& cfg, std::uint64_t seed,
                                long maxIterations, double searchFactor) {
  validate_geometry(cfg);
  if (maxIterations <= 0) throw ConfigError("iteration budget must be positive");
  if (!(searchFactor > 0.0)) throw ConfigError("search factor must be positive");
  const GeoContext ctx = make_context(cfg);
  const int m = cfg.sheets();
  const int d = cfg.d;
  const double searchRadius = searchFactor * cfg.rho;
  std::vector<RadialBracket> brackets;
  brackets.reserve(m);
  for (int j = 0; j < m; ++j) brackets.push_back(shell_bracket(cfg, j, cfg.delta));
  const std::uint64_t stride = static_cast<std::uint64_t>(2 * d + 4);

  GoodPointResult res;
  res.searchRadius = searchRadius;
  for (long it = 0; it < maxIterations; ++it) {
    const std::uint64_t base = static_cast<std::uint64_t>(it) * stride;
    const int sheet = static_cast<int>(it % m);
    const Eigen::VectorXd u = sample_direction(d, seed, base);
    const double t = rng_uniform(seed, base + static_cast<std::uint64_t>(2 * d + 1));
    const RadialBracket& br = brackets[sheet];
    const Eigen::VectorXd xi = (br.lo + (br.hi - br.lo) * t) * u;

    if (!region_flag(cfg, ctx, sheet, GeoRegion::Good, xi)) {
      ++res.rejectedShell;
      continue;
    }
    const long nGood = n_count(cfg, xi, GeoRegion::Good, searchRadius);
    const long nResWide = n_count(cfg, xi, GeoRegion::ResonantWide, searchRadius);
    if (!(nGood > static_cast<long>(m) * nResWide)) {
      ++res.rejectedCounting;
      continue;
    }
    // Translates landing in the widened good region must stay within a
    // quarter-turn of each other.
    std::vector<Eigen::VectorXd> translates;
    for (const auto& th : cfg.freqs) {
      if (th.norm() > searchRadius) continue;
      const Eigen::VectorXd p = xi + th;
      if (p.norm() == 0.0) continue;
      for (int j = 0; j < m; ++j) {
        if (region_flag(cfg, ctx, j, GeoRegion::GoodWide, p)) {
          translates.push_back(p);
          break;
        }
      }
    }
    bool wideAngle = false;
    for (std::size_t a = 0; a < translates.size() && !wideAngle; ++a) {
      for (std::size_t b = a + 1; b < translates.size(); ++b) {
        if (angle_between(translates[a], translates[b]) > kPi / 4.0) {
          wideAngle = true;
          break;
        }
      }
    }
    if (wideAngle) {
      ++res.rejectedWideAngle;
      continue;
    }
    res.xi = xi;
    res.iterations = it + 1;
    res.goodCount = nGood;
    res.resonantWideCount = nResWide;
    return res;
  }
  char buf[192];
  std::snprintf(buf, sizeof buf,
                "no admissible point after %ld draws (shell %ld, counting %ld, wide "
                "angle %ld)",
                maxIterations, res.rejectedShell, res.rejectedCounting,
                res.rejectedWideAngle);
  throw NotFound(buf);
}

SegmentReport counting_certificate(const ResonanceGeometryConfig& cfg,
                                   const Eigen::VectorXd& xi0,
                                   const PeriodicModel& model, double R,
                                   double tFactor) {
  validate_geometry(cfg);
  if (!(tFactor > 0.0)) throw ConfigError("segment factor must be positive");
  if (xi0.size() != cfg.d || model.d() != cfg.d) {
    throw ConfigError("point and lattice dimensions must match the configuration");
  }
  if (model.m() != cfg.sheets()) {
    throw ConfigError("one fiber component per sheet");
  }
  if (xi0.norm() == 0.0) throw ZeroVector("segment base point must be nonzero");
  const GeoContext ctx = make_context(cfg);

  SegmentReport rep;
  // Floor: the leading radial term moves by about alpha t rho^alpha over the
  // segment, which must clear the window width 2 delta with room to spare.
  rep.t = std::max(tFactor * std::pow(cfg.rho, -cfg.nu),
                   3.0 * cfg.delta / (cfg.alpha * ctx.level));
  rep.t = std::min(rep.t, 0.5);
  // Fold vector of the base point, held fixed along the whole segment so the
  // folded quasi-momentum moves continuously.
  const Eigen::VectorXd frac = model.lattice.transpose() * xi0 / (2.0 * kPi);
  Eigen::VectorXd n0(cfg.d);
  for (int i = 0; i < cfg.d; ++i) n0[i] = std::round(frac[i]);
  const Eigen::VectorXd fold = model.dual * n0;
  rep.k1 = (1.0 - rep.t) * xi0 - fold;
  rep.k2 = (1.0 + rep.t) * xi0 - fold;

  const std::vector<Freq> basis = enumerate_dual(model.lattice, R);
  const double level = ctx.level;
  const int nSamples = 9;

  for (const auto& th : basis) {
    Eigen::VectorXd offset(cfg.d);
    for (int i = 0; i < cfg.d; ++i) offset[i] = th[i];
    offset -= fold;
    const Eigen::VectorXd q0 = xi0 + offset;
    for (int j = 0; j < cfg.sheets(); ++j) {
      const bool isMu = region_flag(cfg, ctx, j, GeoRegion::Good, q0);
      const bool inWideShell = region_flag(cfg, ctx, j, GeoRegion::ShellWide, q0);
      std::vector<double> values(nSamples);
      for (int s = 0; s < nSamples; ++s) {
        const double tp = -rep.t + 2.0 * rep.t * s / (nSamples - 1);
        const Eigen::VectorXd q = (1.0 + tp) * xi0 + offset;
        values[s] = sheet_value(cfg, j, q.norm());
      }
      if (isMu) {
        ++rep.muCount;
        bool inc = true;
        for (int s = 0; s + 1 < nSamples; ++s) inc = inc && values[s + 1] > values[s];
        const bool below = values.front() < level - cfg.delta;
        const bool above = values.back() > level + cfg.delta;
        if (below && above) ++rep.muCoveringCount;
        if (rep.muCount == 1) {
          rep.muIncreasing = inc;
          rep.muEndpointsOk = below || above;
        } else {
          rep.muIncreasing = rep.muIncreasing && inc;
          rep.muEndpointsOk = rep.muEndpointsOk && (below || above);
        }
      } else if (!inWideShell) {
        ++rep.tauCount;
        bool outside = true;
        for (double v : values) outside = outside && std::abs(v - level) > cfg.delta;
        rep.tauStaysOutside = (rep.tauCount == 1) ? outside
                                                  : (rep.tauStaysOutside && outside);
      } else {
        ++rep.nuCount;
      }
    }
  }
  if (rep.muCount == 0) {
    rep.muIncreasing = false;
    rep.muEndpointsOk = false;
  }
  if (rep.tauCount == 0) rep.tauStaysOutside = true;
  rep.nuOutnumbered = rep.muCoveringCount > rep.nuCount;
  rep.classificationConsistent = rep.muCount > 0 && rep.muIncreasing &&
                                 rep.muEndpointsOk && rep.tauStaysOutside &&
                                 rep.nuOutnumbered;

  const FiberMatrix f1 = assemble_fiber(model, rep.k1, R);
  const FiberMatrix f2 = assemble_fiber(model, rep.k2, R);
  Eigen::SelfAdjointEigenSolver<Mat> es1(f1.matrix, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Mat> es2(f2.matrix, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev1 = es1.eigenvalues();
  const Eigen::VectorXd ev2 = es2.eigenvalues();
  for (int i = 0; i < ev1.size(); ++i) {
    if (ev1[i] <= level - cfg.delta) ++rep.countBelowAtStart;
  }
  for (int i = 0; i < ev2.size(); ++i) {
    if (ev2[i] <= level + cfg.delta) ++rep.countBelowAtEnd;
  }
  rep.countingOk = rep.countBelowAtStart - rep.countBelowAtEnd >= 1;
  return rep;
}

FreqDiagnostics freq_diagnostics(const std::vector<Eigen::VectorXd>& freqs, int kTilde,
                                 long budget) {
  if (freqs.empty()) throw ConfigError("frequency set must be nonempty");
  if (kTilde < 1) throw ConfigError("fold count must be at least 1");
  const int d = static_cast<int>(freqs.front().size());
  for (const auto& th : freqs) {
    if (th.size() != d) throw ConfigError("frequency dimension mismatch");
  }
  const std::size_t n = freqs.size();

  double sumCombos = 0.0;
  for (int k = 1; k <= kTilde; ++k) sumCombos += std::pow(static_cast<double>(n), k);
  if (sumCombos > static_cast<double>(budget)) {
    throw CombinatorialBudgetExceeded("too many fold combinations");
  }

  FreqDiagnostics out;
  out.minNonzeroSum = std::numeric_limits<double>::infinity();
  // All sums of 1..kTilde frequencies, repetitions allowed, by odometer.
  for (int k = 1; k <= kTilde; ++k) {
    std::vector<std::size_t> idx(k, 0);
    while (true) {
      Eigen::VectorXd s = Eigen::VectorXd::Zero(d);
      for (int p = 0; p < k; ++p) s += freqs[idx[p]];
      const double len = s.norm();
      out.maxSum = std::max(out.maxSum, len);
      if (len > 1e-12) out.minNonzeroSum = std::min(out.minNonzeroSum, len);
      int pos = k - 1;
      while (pos >= 0 && ++idx[pos] == n) idx[pos--] = 0;
      if (pos < 0) break;
    }
  }
  if (std::isinf(out.minNonzeroSum)) out.minNonzeroSum = 0.0;

  out.minPairDistance = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      out.minPairDistance = std::min(out.minPairDistance, (freqs[a] - freqs[b]).norm());
    }
  }
  if (std::isinf(out.minPairDistance)) out.minPairDistance = 0.0;

  // Distinct spans of up to d frequencies, deduplicated by rounded projector.
  const int maxSize = std::min<int>(d, static_cast<int>(n));
  double subsetCombos = 0.0;
  {
    double binom = 1.0;
    for (int k = 1; k <= maxSize; ++k) {
      binom = binom * static_cast<double>(n - k + 1) / k;
      subsetCombos += binom;
    }
  }
  if (subsetCombos > static_cast<double>(budget)) {
    throw CombinatorialBudgetExceeded("too many span subsets");
  }

  std::vector<Eigen::MatrixXd> spans;
  std::map<std::vector<long long>, bool> seen;
  std::vector<std::size_t> pick;
  const std::function<void(std::size_t)> visit = [&](std::size_t start) {
    if (!pick.empty()) {
      Eigen::MatrixXd mat(d, pick.size());
      for (std::size_t c = 0; c < pick.size(); ++c) mat.col(c) = freqs[pick[c]];
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(mat, Eigen::ComputeThinU);
      const auto& sv = svd.singularValues();
      const double smax = sv.size() > 0 ? sv[0] : 0.0;
      int rank = 0;
      for (int i = 0; i < sv.size(); ++i) {
        if (sv[i] > 1e-10 * std::max(1.0, smax)) ++rank;
      }
      if (rank > 0) {
        Eigen::MatrixXd basis = svd.matrixU().leftCols(rank);
        Eigen::MatrixXd proj = basis * basis.transpose();
        std::vector<long long> key(d * d);
        for (int r = 0; r < d; ++r) {
          for (int c = 0; c < d; ++c) key[r * d + c] = std::llround(proj(r, c) * 1e8);
        }
        if (!seen.count(key)) {
          seen[key] = true;
          spans.push_back(std::move(basis));
        }
      }
    }
    if (static_cast<int>(pick.size()) == maxSize) return;
    for (std::size_t i = start; i < n; ++i) {
      pick.push_back(i);
      visit(i + 1);
      pick.pop_back();
    }
  };
  visit(0);

  out.subspaceGap = 1.0;
  bool anyPair = false;
  const double oneTol = 1e-10;
  for (std::size_t a = 0; a < spans.size(); ++a) {
    for (std::size_t b = a + 1; b < spans.size(); ++b) {
      Eigen::MatrixXd c = spans[a].transpose() * spans[b];
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(c);
      const auto& sv = svd.singularValues();
      int common = 0;
      double best = -1.0;
      for (int i = 0; i < sv.size(); ++i) {
        const double s = std::min(sv[i], 1.0);
        if (s >= 1.0 - oneTol) {
          ++common;
        } else {
          best = std::max(best, s);
        }
      }
      const long ra = spans[a].cols(), rb = spans[b].cols();
      // Nested spans have no complement on one side; they are not a pair.
      if (ra - common == 0 || rb - common == 0) continue;
      anyPair = true;
      // With fewer singular values than complement dimensions the extra
      // principal angles are right angles; best < 0 then means fully
      // orthogonal complements.
      const double sine = best < 0.0 ? 1.0 : std::sqrt(std::max(0.0, 1.0 - best * best));
      out.subspaceGap = std::min(out.subspaceGap, sine);
    }
  }
  out.noSubspacePairs = !anyPair;
  return out;
}

}  // namespace gc
