#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "commands.hpp"
#include "gc/clifford.hpp"
#include "gc/dsl.hpp"
#include "gc/errors.hpp"
#include "gc/gauge.hpp"
#include "gc/geometry.hpp"
#include "gc/norms.hpp"
#include "gc/spectra.hpp"

namespace gc::cli {

namespace {

using ojson = nlohmann::ordered_json;

// Deterministic probe points, the same on every platform: a plain LCG mapped
// into [-radius, radius] per coordinate.
std::vector<std::vector<double>> probe_points(int d, int n, double radius) {
  std::vector<std::vector<double>> pts;
  pts.reserve(std::size_t(n));
  unsigned long long state = 88172645463325252ull;
  for (int p = 0; p < n; ++p) {
    std::vector<double> xi(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
      state = state * 6364136223846793005ull + 1442695040888963407ull;
      const double u = double(state >> 11) * 0x1.0p-53;
      xi[std::size_t(j)] = (2.0 * u - 1.0) * radius;
    }
    pts.push_back(std::move(xi));
  }
  return pts;
}

struct Property {
  std::string name;
  double tol = 0.0;
  std::function<double()> residual;
};

}  // namespace

ojson run_verify(const ExperimentConfig& cfg, bool verbose, bool& passed) {
  BuiltModel bm = build_model_symbol(cfg.model);
  const MatrixSymbol& a = bm.symbol;
  const int d = cfg.model.d;
  const auto pts = probe_points(d, 48, 12.0);

  std::vector<Property> props;

  props.push_back({"config-roundtrip", 0.5, [&]() {
    const std::string canonical = canonical_config_json(cfg);
    ExperimentConfig again = parse_experiment_config(canonical);
    return canonical_config_json(again) == canonical ? 0.0 : 1.0;
  }});

  props.push_back({"dsl-roundtrip", 0.5, [&]() {
    DslContext ctx;
    ctx.d = d;
    ctx.m = cfg.model.m;
    ctx.rep = bm.rep.get();
    double bad = 0.0;
    for (const auto& p : cfg.model.perturbation) {
      ExprPtr e1 = parse_coeff_expr(p.expr, ctx);
      const std::string printed = print_coeff_expr(e1, ctx);
      ExprPtr e2 = parse_coeff_expr(printed, ctx);
      if (!equal_expr(e1, e2) || print_coeff_expr(e2, ctx) != printed) bad += 1.0;
    }
    return bad;
  }});

  props.push_back({"clifford-relations", 1e-14, [&]() {
    const int dd = (d >= 1 && d <= 8) ? d : 3;
    CliffordRep rep = build_generators(dd);
    const Mat id = Mat::Identity(rep.m, rep.m);
    double worst = 0.0;
    for (int i = 0; i < dd; ++i) {
      for (int j = 0; j < dd; ++j) {
        const Mat anti = rep.h[std::size_t(i)] * rep.h[std::size_t(j)] +
                         rep.h[std::size_t(j)] * rep.h[std::size_t(i)];
        worst = std::max(worst, op_norm(anti - (i == j ? 2.0 : 0.0) * id));
      }
      worst = std::max(worst, op_norm(rep.Gamma * rep.h[std::size_t(i)] +
                                      rep.h[std::size_t(i)] * rep.Gamma));
      worst = std::max(worst,
                       op_norm((rep.h[std::size_t(i)].adjoint() - rep.h[std::size_t(i)])));
    }
    worst = std::max(worst, op_norm(rep.Gamma * rep.Gamma - id));
    return worst;
  }});

  props.push_back({"adjoint-involution", 1e-12, [&]() {
    MatrixSymbol aa = adjoint(adjoint(a));
    EvalContext ctx;
    double worst = 0.0;
    for (const auto& [theta, e] : a.entries()) {
      (void)e;
      for (const auto& xi : pts)
        worst = std::max(worst, op_norm(aa.eval(theta, xi, &ctx) - a.eval(theta, xi, &ctx)));
    }
    for (const auto& [theta, e] : aa.entries()) {
      (void)e;
      if (!a.has(theta))
        for (const auto& xi : pts)
          worst = std::max(worst, op_norm(aa.eval(theta, xi, &ctx)));
    }
    return worst;
  }});

  props.push_back({"self-adjointness", 1e-10,
                   [&]() { return symmetry_defect(a, 64, 12.0); }});

  props.push_back({"compose-associativity", 1e-9, [&]() {
    MatrixSymbol aa2 = compose(a, a);
    MatrixSymbol left = compose(aa2, a);
    MatrixSymbol right = compose(a, aa2);
    EvalContext ctx;
    double worst = 0.0;
    for (const auto& [theta, e] : left.entries()) {
      (void)e;
      for (const auto& xi : pts)
        worst = std::max(worst,
                         op_norm(left.eval(theta, xi, &ctx) - right.eval(theta, xi, &ctx)));
    }
    for (const auto& [theta, e] : right.entries()) {
      (void)e;
      if (!left.has(theta))
        for (const auto& xi : pts)
          worst = std::max(worst, op_norm(right.eval(theta, xi, &ctx)));
    }
    return worst;
  }});

  props.push_back({"commutator-cancellation", 1e-10, [&]() {
    DiagonalSplit parts = split_diagonal(a);
    if (parts.offDiagonal.entries().empty()) return 0.0;
    const double delta = cfg.gauge.present ? cfg.gauge.delta : 0.5;
    const double s = cfg.gauge.present ? cfg.gauge.s : 1.0;
    const double beta = cfg.gauge.present ? cfg.gauge.beta : 0.0;
    ResonanceSpec spec = make_scalar_spec(delta, s);
    OneStepResult r = one_step_weak(a, spec, 0.0, beta);
    MatrixSymbol ad = commutator_ad(r.diag, r.psi);
    // ad(aD; psi) + (aOD - resonant) must vanish identically.
    MatrixSymbol resid = add(ad, subtract(parts.offDiagonal, r.resonant));
    EvalContext ctx;
    double worst = 0.0;
    for (const auto& [theta, e] : resid.entries()) {
      (void)e;
      for (const auto& xi : pts)
        worst = std::max(worst, op_norm(resid.eval(theta, xi, &ctx)));
    }
    return worst;
  }});

  props.push_back({"norm-product", 1e-12, [&]() {
    const double gamma = a.order();
    const double lhs = symbol_norm(compose(a, a), 0.0, 2.0 * gamma).value;
    const double rhs = symbol_norm(a, 0.0, gamma).value;
    return std::max(0.0, lhs - rhs * rhs) / std::max(1.0, rhs * rhs);
  }});

  const bool periodic = !cfg.model.aperiodic;
  if (periodic && cfg.spectra.present) {
    // One table shared by the spectral properties.
    auto model = std::make_shared<PeriodicModel>(build_periodic_model(cfg));
    KGrid grid;
    grid.counts = cfg.spectra.kGrid;
    grid.offset = cfg.spectra.kOffset;
    auto table = std::make_shared<BandTable>(band_table(*model, grid, cfg.spectra.R));

    props.push_back({"fiber-hermitian", 1e-12, [model, grid, cfg]() {
      const auto ks = k_points(*model, grid);
      FiberMatrix f = assemble_fiber(*model, ks.front(), cfg.spectra.R);
      return op_norm(f.matrix - Mat(f.matrix.adjoint()));
    }});

    props.push_back({"bands-parallel-serial", 0.0, [model, grid, cfg, table]() {
      BandTable serial = band_table_serial(*model, grid, cfg.spectra.R);
      if (serial.bands.rows() != table->bands.rows() ||
          serial.bands.cols() != table->bands.cols())
        return 1.0;
      return (serial.bands - table->bands).cwiseAbs().maxCoeff();
    }});

    props.push_back({"ids-monotone", 0.0, [table, cfg]() {
      const double lo = cfg.spectra.windowLo;
      const double hi = cfg.spectra.windowHi;
      double prev = 0.0, worst = 0.0;
      const int n = 12;
      for (int i = 1; i <= n; ++i) {
        const double cur = ids(*table, lo, lo + (hi - lo) * double(i) / double(n));
        worst = std::max(worst, prev - cur);
        prev = cur;
      }
      return worst;
    }});

    props.push_back({"overlap-cross-check", 1e-8, [table, cfg]() {
      const double lam = 0.5 * (cfg.spectra.windowLo + cfg.spectra.windowHi);
      return std::abs(overlap_zeta(*table, lam) - overlap_zeta_counting(*table, lam));
    }});
  }

  if (cfg.geometry.present) {
    auto geo = std::make_shared<ResonanceGeometryConfig>(build_geometry_config(cfg, 0));
    const long n = std::min(cfg.geometry.nSamples, 20000L);
    const unsigned long long seed = cfg.geometry.seeds[0];

    props.push_back({"mc-parallel-serial", 0.0, [geo, n, seed]() {
      McEstimate p = mc_volume(*geo, 0, GeoRegion::Shell, n, seed);
      McEstimate s = mc_volume_serial(*geo, 0, GeoRegion::Shell, n, seed);
      return std::abs(p.value - s.value) + std::abs(p.stderrValue - s.stderrValue) +
             std::abs(double(p.hits - s.hits));
    }});

    props.push_back({"geometry-partition", 0.0, [geo, n, seed]() {
      McEstimate shell = mc_volume(*geo, 0, GeoRegion::Shell, n, seed);
      McEstimate res = mc_volume(*geo, 0, GeoRegion::Resonant, n, seed);
      McEstimate good = mc_volume(*geo, 0, GeoRegion::Good, n, seed);
      return std::abs(double(shell.hits - res.hits - good.hits));
    }});
  }

  ojson list = ojson::array();
  passed = true;
  for (auto& p : props) {
    const double r = p.residual();
    const bool ok = r <= p.tol;
    passed = passed && ok;
    if (verbose)
      std::fprintf(stderr, "[verify] %-24s residual %.3e tol %.3e %s\n", p.name.c_str(),
                   r, p.tol, ok ? "ok" : "FAIL");
    ojson pj;
    pj["name"] = p.name;
    pj["residual"] = r;
    pj["tol"] = p.tol;
    pj["pass"] = ok;
    list.push_back(std::move(pj));
  }

  ojson report;
  report["command"] = "verify";
  report["properties"] = std::move(list);
  report["passed"] = passed;
  return report;
}

}  // namespace gc::cli
