#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <vector>

#include "gc/errors.hpp"
#include "gc/gauge.hpp"
#include "gc/geometry.hpp"
#include "gc/norms.hpp"
#include "gc/spectra.hpp"

namespace gc::cli {

namespace {

using ojson = nlohmann::ordered_json;

void note(const CliOptions& opt, const std::string& msg) {
  if (opt.verbose) std::fprintf(stderr, "[gaugecalc] %s\n", msg.c_str());
}

std::string resolve_dir(const ExperimentConfig& cfg, const CliOptions& opt) {
  if (!opt.outDir.empty()) return opt.outDir;
  if (!cfg.output.dir.empty()) return cfg.output.dir;
  return ".";
}

ojson vec_json(const Eigen::VectorXd& v) {
  ojson a = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

ojson vec_json(const std::vector<double>& v) {
  ojson a = ojson::array();
  for (double x : v) a.push_back(x);
  return a;
}

ojson estimate_json(const McEstimate& e) {
  ojson j;
  j["value"] = e.value;
  j["stderr"] = e.stderrValue;
  j["hits"] = e.hits;
  j["samples"] = e.samples;
  return j;
}

// Non-finite doubles (vanished entries fit to -inf) must not reach the JSON
// layer as numbers.
ojson num_or_null(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

int emit(const ExperimentConfig& cfg, const CliOptions& opt, const std::string& cmd,
         const ojson& report) {
  namespace fs = std::filesystem;
  const fs::path dir = resolve_dir(cfg, opt);
  fs::create_directories(dir);
  const std::string name = cfg.output.report.empty() ? cmd + ".json" : cfg.output.report;
  const std::string text = dump_json17(report, 2) + "\n";
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw ConfigError("cannot write report file: " + (dir / name).string());
  out << text;
  out.close();
  std::cout << text;
  return kExitOk;
}

BandTable make_table(const ExperimentConfig& cfg, const PeriodicModel& model) {
  if (!cfg.spectra.present) throw ConfigError("this command needs a spectra block");
  KGrid grid;
  grid.counts = cfg.spectra.kGrid;
  grid.offset = cfg.spectra.kOffset;
  return band_table(model, grid, cfg.spectra.R);
}

// Lambda grid for per-level tables: the explicit list, or an inclusive
// linspace across the window.
std::vector<double> lambda_grid(const SpectraBlock& s) {
  if (!s.lambdas.empty()) return s.lambdas;
  std::vector<double> out;
  if (s.nLambda == 1) {
    out.push_back(0.5 * (s.windowLo + s.windowHi));
    return out;
  }
  for (int i = 0; i < s.nLambda; ++i)
    out.push_back(s.windowLo +
                  (s.windowHi - s.windowLo) * double(i) / double(s.nLambda - 1));
  return out;
}

// Steepest fitted growth exponent over the frequencies of s; null-like
// -infinity when every entry vanishes on the sample set. Conjugation series
// can carry very many combination frequencies, so the sweep is capped.
double max_decay_order(const MatrixSymbol& s) {
  double best = -std::numeric_limits<double>::infinity();
  int swept = 0;
  for (const auto& [theta, e] : s.entries()) {
    (void)e;
    if (++swept > 16) break;
    best = std::max(best, estimate_decay_order(s, theta, 50.0, 2000.0, 10, 6));
  }
  return best;
}

ojson norm_json(const MatrixSymbol& s, double l, double weight) {
  const NormEstimate n = symbol_norm(s, l, weight);
  ojson j;
  j["weight"] = weight;
  j["norm"] = n.value;
  j["exact"] = n.exact;
  return j;
}

int cmd_bands(const ExperimentConfig& cfg, const CliOptions& opt) {
  PeriodicModel model = build_periodic_model(cfg);
  note(opt, "assembling band table");
  BandTable table = make_table(cfg, model);
  namespace fs = std::filesystem;
  const fs::path dir = resolve_dir(cfg, opt);
  fs::create_directories(dir);
  const std::string csvName = cfg.output.bands.empty() ? "bands.csv" : cfg.output.bands;
  write_band_csv(table, (dir / csvName).string());
  ojson report;
  report["command"] = "bands";
  report["config"] = config_to_json(cfg);
  report["csv"] = csvName;
  report["kCount"] = (long)table.kPoints.size();
  report["bandCount"] = (long)table.bands.cols();
  report["R"] = table.R;
  report["lambdaMax"] = table.lambdaMax;
  report["cellVolume"] = table.cellVolume;
  return emit(cfg, opt, "bands", report);
}

int cmd_ids(const ExperimentConfig& cfg, const CliOptions& opt) {
  PeriodicModel model = build_periodic_model(cfg);
  BandTable table = make_table(cfg, model);
  const double lo = cfg.spectra.windowLo;
  const double hi = cfg.spectra.windowHi;
  ojson report;
  report["command"] = "ids";
  report["config"] = config_to_json(cfg);
  report["window"] = vec_json(std::vector<double>{lo, hi});
  report["idsWindow"] = ids(table, lo, hi);
  std::vector<double> lambdas = lambda_grid(cfg.spectra);
  ojson cumulative = ojson::array();
  for (double lam : lambdas) cumulative.push_back(ids(table, lo, lam));
  report["lambdas"] = vec_json(lambdas);
  report["cumulative"] = std::move(cumulative);
  report["lambdaMax"] = table.lambdaMax;
  return emit(cfg, opt, "ids", report);
}

int cmd_overlap(const ExperimentConfig& cfg, const CliOptions& opt) {
  PeriodicModel model = build_periodic_model(cfg);
  BandTable table = make_table(cfg, model);
  std::vector<double> lambdas = lambda_grid(cfg.spectra);
  ojson zetas = ojson::array();
  double minOverlap = std::numeric_limits<double>::infinity();
  for (double lam : lambdas) {
    const double z = overlap_zeta(table, lam);
    zetas.push_back(z);
    minOverlap = std::min(minOverlap, z);
  }
  ojson report;
  report["command"] = "overlap";
  report["config"] = config_to_json(cfg);
  report["lambdas"] = vec_json(lambdas);
  report["zetas"] = std::move(zetas);
  report["minOverlap"] = minOverlap;
  report["lambdaMax"] = table.lambdaMax;
  return emit(cfg, opt, "overlap", report);
}

int cmd_bs_scan(const ExperimentConfig& cfg, const CliOptions& opt) {
  PeriodicModel model = build_periodic_model(cfg);
  BandTable table = make_table(cfg, model);
  const int nPoints = cfg.spectra.lambdas.empty()
                          ? cfg.spectra.nLambda
                          : static_cast<int>(cfg.spectra.lambdas.size());
  OverlapScan scan = bs_scan(table, cfg.spectra.windowLo, cfg.spectra.windowHi, nPoints);
  ojson gaps = ojson::array();
  for (const auto& [a, b] : scan.gapIntervals)
    gaps.push_back(vec_json(std::vector<double>{a, b}));
  ojson report;
  report["command"] = "bs-scan";
  report["config"] = config_to_json(cfg);
  report["lambdas"] = vec_json(scan.lambdas);
  report["zetas"] = vec_json(scan.zetas);
  report["gapIntervals"] = std::move(gaps);
  report["minOverlap"] = scan.minOverlap;
  report["gapFree"] = scan.gapIntervals.empty();
  return emit(cfg, opt, "bs-scan", report);
}

int cmd_gauge(const ExperimentConfig& cfg, const CliOptions& opt) {
  if (!cfg.gauge.present) throw ConfigError("the gauge command needs a gauge block");
  const GaugeBlock& g = cfg.gauge;
  BuiltModel bm = build_model_symbol(cfg.model);
  const MatrixSymbol& a = bm.symbol;
  ResonanceSpec spec = make_scalar_spec(g.delta, g.s);

  ojson report;
  report["command"] = "gauge";
  report["config"] = config_to_json(cfg);
  report["variant"] = g.variant;
  if (g.variant == "weak" && g.delta <= g.beta) {
    const std::string warning =
        "delta <= beta: the rotation cannot push the coupled order below the "
        "perturbation order, expect no improvement in the ledger";
    report["warning"] = warning;
    std::fprintf(stderr, "warning: %s\n", warning.c_str());
  }

  DiagonalSplit before = split_diagonal(a);
  ojson ledger;
  ledger["a"] = norm_json(a, g.l, a.order());
  ledger["offDiagonal"] = norm_json(before.offDiagonal, g.l, g.beta);
  ledger["offDiagonalOrder"] = num_or_null(max_decay_order(before.offDiagonal));

  if (g.variant == "weak") {
    note(opt, "running one weak gauge step");
    OneStepResult r = one_step_weak(a, spec, g.l, g.beta, g.K);
    report["K"] = r.K;
    report["psiWeight"] = r.psiWeight;
    ledger["psi"] = norm_json(r.psi, g.l, r.psiWeight);
    ledger["psiBound"] = r.psiNormBound;
    ledger["resonant"] = norm_json(r.resonant, g.l, g.beta);
    const double remWeight = 2.0 * g.beta - g.delta;
    ledger["remainder"] = norm_json(r.remainder, g.l, remWeight);
    ledger["remainderBound"] = r.remainderBound;
    ledger["remainderOrder"] = num_or_null(max_decay_order(r.remainder));
    const double psiNorm = symbol_norm(r.psi, g.l, 0.0).value;
    ledger["seriesTailBound"] =
        series_tail_bound(psiNorm, symbol_norm(a, g.l, a.order()).value, r.K);
  } else {
    note(opt, "running the parallel transform");
    ParallelResult r = parallel_transform(a, spec, g.kTilde, g.l, g.beta, g.K);
    report["K"] = r.K;
    report["kTilde"] = g.kTilde;
    ojson psis = ojson::array();
    for (std::size_t i = 0; i < r.psis.size(); ++i) {
      const double w = double(i + 1) * (g.beta - g.delta);
      psis.push_back(norm_json(r.psis[i], g.l, w));
    }
    ledger["psis"] = std::move(psis);
    ledger["removedResonant"] = norm_json(r.removedResonant, g.l, g.beta);
    const double remWeight = g.beta + double(g.kTilde) * (g.beta - g.delta);
    ledger["remainder"] = norm_json(r.remainder, g.l, remWeight);
    ledger["remainderOrder"] = num_or_null(max_decay_order(r.remainder));
  }
  report["ledger"] = std::move(ledger);
  return emit(cfg, opt, "gauge", report);
}

int cmd_uncouple(const ExperimentConfig& cfg, const CliOptions& opt) {
  if (!cfg.gauge.present) throw ConfigError("the uncouple command needs a gauge block");
  const GaugeBlock& g = cfg.gauge;
  BuiltModel bm = build_model_symbol(cfg.model);
  const UncoupleMode mode =
      g.mode == "full" ? UncoupleMode::Full : UncoupleMode::OneStep;
  note(opt, "uncoupling the system");
  UncoupleResult r =
      uncouple_system(bm.symbol, bm.alpha, g.beta, mode, g.targetN, g.epsTrim);

  ojson report;
  report["command"] = "uncouple";
  report["config"] = config_to_json(cfg);
  report["mode"] = g.mode;
  report["kTilde"] = r.kTilde;
  report["sPrime"] = r.sPrime;
  report["coeffSeparation"] = r.coeffSeparation;
  report["trimBound"] = r.trimBound;
  ojson frozen = ojson::array();
  for (const auto& [j, k] : r.frozenPairs) frozen.push_back(ojson::array({j, k}));
  report["frozenPairs"] = std::move(frozen);
  report["psiCount"] = (long)r.psis.size();

  ojson ledger;
  UncoupledSplit before = split_uncoupled(bm.symbol);
  ledger["coupledBefore"] = norm_json(before.coupled, g.l, g.beta);
  ledger["coupledBeforeOrder"] = num_or_null(max_decay_order(before.coupled));
  ledger["coupledAfter"] = norm_json(r.remainder, g.l, g.beta);
  ledger["coupledAfterOrder"] = num_or_null(max_decay_order(r.remainder));
  ledger["uncoupledGain"] = norm_json(r.uncoupledY, g.l, g.beta);
  ledger["trimmed"] = norm_json(r.trimmed, g.l, g.beta);
  report["ledger"] = std::move(ledger);
  return emit(cfg, opt, "uncouple", report);
}

int cmd_geometry(const ExperimentConfig& cfg, const CliOptions& opt) {
  if (!cfg.geometry.present)
    throw ConfigError("the geometry command needs a geometry block");
  const GeometryBlock& g = cfg.geometry;

  std::vector<unsigned long long> seeds;
  for (std::size_t i = 0; i < g.rho.size(); ++i) {
    if (opt.hasSeed)
      seeds.push_back(opt.seed + i);
    else if (g.seeds.size() == g.rho.size())
      seeds.push_back(g.seeds[i]);
    else
      seeds.push_back(g.seeds[0] + i);
  }

  ojson results = ojson::array();
  std::vector<double> logRho, logRatio;
  for (std::size_t i = 0; i < g.rho.size(); ++i) {
    ResonanceGeometryConfig geo = build_geometry_config(cfg, static_cast<int>(i));
    note(opt, "sampling rho = " + format_double17(geo.rho));
    ojson entry;
    entry["rho"] = geo.rho;
    entry["delta"] = geo.delta;
    entry["seed"] = seeds[i];
    entry["freqCount"] = (long)geo.freqs.size();
    ojson sheets = ojson::array();
    double shellTotal = 0.0, resonantTotal = 0.0;
    for (int sheet = 0; sheet < geo.sheets(); ++sheet) {
      McEstimate shell = mc_volume(geo, sheet, GeoRegion::Shell, g.nSamples, seeds[i]);
      McEstimate resonant =
          mc_volume(geo, sheet, GeoRegion::Resonant, g.nSamples, seeds[i]);
      McEstimate good = mc_volume(geo, sheet, GeoRegion::Good, g.nSamples, seeds[i]);
      ojson sj;
      sj["sheet"] = sheet;
      sj["shell"] = estimate_json(shell);
      sj["resonant"] = estimate_json(resonant);
      sj["good"] = estimate_json(good);
      sheets.push_back(std::move(sj));
      shellTotal += shell.value;
      resonantTotal += resonant.value;
    }
    entry["sheets"] = std::move(sheets);
    const double ratio = shellTotal > 0.0 ? resonantTotal / shellTotal : 0.0;
    entry["resonantShare"] = ratio;
    results.push_back(std::move(entry));
    if (ratio > 0.0) {
      logRho.push_back(std::log(geo.rho));
      logRatio.push_back(std::log(ratio));
    }
  }

  ojson report;
  report["command"] = "geometry";
  report["config"] = config_to_json(cfg);
  report["results"] = std::move(results);

  if (logRho.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(logRho.size());
    for (std::size_t i = 0; i < logRho.size(); ++i) {
      sx += logRho[i];
      sy += logRatio[i];
      sxx += logRho[i] * logRho[i];
      sxy += logRho[i] * logRatio[i];
    }
    report["resonantShareLogSlope"] = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }

  if (g.certify) {
    note(opt, "certifying a good point at the largest rho");
    const int last = static_cast<int>(g.rho.size()) - 1;
    ResonanceGeometryConfig geo = build_geometry_config(cfg, last);
    GoodPointResult gp = find_good_point(geo, seeds[std::size_t(last)]);
    PeriodicModel model = build_periodic_model(cfg);
    SegmentReport seg = counting_certificate(geo, gp.xi, model, g.fiberR, g.tFactor);
    ojson cj;
    cj["xi"] = vec_json(gp.xi);
    cj["iterations"] = gp.iterations;
    cj["goodCount"] = gp.goodCount;
    cj["resonantWideCount"] = gp.resonantWideCount;
    cj["searchRadius"] = gp.searchRadius;
    ojson sj;
    sj["t"] = seg.t;
    sj["k1"] = vec_json(seg.k1);
    sj["k2"] = vec_json(seg.k2);
    sj["muCount"] = seg.muCount;
    sj["muCoveringCount"] = seg.muCoveringCount;
    sj["tauCount"] = seg.tauCount;
    sj["nuCount"] = seg.nuCount;
    sj["muIncreasing"] = seg.muIncreasing;
    sj["muEndpointsOk"] = seg.muEndpointsOk;
    sj["tauStaysOutside"] = seg.tauStaysOutside;
    sj["nuOutnumbered"] = seg.nuOutnumbered;
    sj["classificationConsistent"] = seg.classificationConsistent;
    sj["countBelowAtStart"] = seg.countBelowAtStart;
    sj["countBelowAtEnd"] = seg.countBelowAtEnd;
    sj["countingOk"] = seg.countingOk;
    cj["segment"] = std::move(sj);
    cj["verified"] = seg.classificationConsistent && seg.countingOk;
    report["certificate"] = std::move(cj);
  }
  return emit(cfg, opt, "geometry", report);
}

int cmd_verify(const ExperimentConfig& cfg, const CliOptions& opt) {
  bool passed = false;
  ojson report = run_verify(cfg, opt.verbose, passed);
  report["config"] = config_to_json(cfg);
  const int rc = emit(cfg, opt, "verify", report);
  return passed ? rc : kExitVerification;
}

}  // namespace

int run_command(const std::string& cmd, const CliOptions& opt) {
  if (opt.configPath.empty()) throw ConfigError("missing --config <path>");
  ExperimentConfig cfg = load_experiment_config(opt.configPath);
  if (cmd == "bands") return cmd_bands(cfg, opt);
  if (cmd == "ids") return cmd_ids(cfg, opt);
  if (cmd == "overlap") return cmd_overlap(cfg, opt);
  if (cmd == "bs-scan") return cmd_bs_scan(cfg, opt);
  if (cmd == "gauge") return cmd_gauge(cfg, opt);
  if (cmd == "uncouple") return cmd_uncouple(cfg, opt);
  if (cmd == "geometry") return cmd_geometry(cfg, opt);
  if (cmd == "verify") return cmd_verify(cfg, opt);
  throw ConfigError("unknown command: " + cmd);
}

}  // namespace gc::cli
