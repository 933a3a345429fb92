#include "gc/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "gc/errors.hpp"
#include "gc/grids.hpp"

namespace gc {

namespace {

const Cplx kI(0.0, 1.0);

double factorial(int n) {
  double f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Ordered tuples of positive integers with the given length and sum.
void compositions(int total, int parts, std::vector<int>& cur,
                  std::vector<std::vector<int>>& out) {
  if (parts == 0) {
    if (total == 0) out.push_back(cur);
    return;
  }
  for (int first = 1; first + (parts - 1) <= total; ++first) {
    cur.push_back(first);
    compositions(total - first, parts - 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

ResonantSplit split_resonant(const MatrixSymbol& b,
                             std::shared_ptr<const MatrixSymbol> aD,
                             const ResonanceSpec& spec) {
  MatrixSymbol::Builder res(b.d(), b.m(), b.order());
  MatrixSymbol::Builder non(b.d(), b.m(), b.order());
  for (const auto& [t, e] : b.entries()) {
    if (is_zero_const(e)) continue;
    non.add(t, resonance_mask(e, aD, t, spec, false));
    res.add(t, resonance_mask(e, aD, t, spec, true));
  }
  return {res.build(), non.build()};
}

MatrixSymbol build_psi(std::shared_ptr<const MatrixSymbol> aD, const MatrixSymbol& bNR,
                       const ResonanceSpec& spec) {
  MatrixSymbol::Builder psi(bNR.d(), bNR.m(), 0.0);
  for (const auto& [t, e] : bNR.entries()) {
    if (is_zero_const(e)) continue;
    psi.add(t, masked_quotient(scale(kI, e), aD, t, spec));
  }
  return psi.build();
}

MatrixSymbol gauge_conjugate(const MatrixSymbol& a, const MatrixSymbol& psi, int K) {
  std::vector<MatrixSymbol> powers;
  powers.push_back(a);
  for (int k = 1; k <= K; ++k) powers.push_back(commutator_ad(powers.back(), psi));
  std::vector<std::pair<Cplx, const MatrixSymbol*>> terms;
  for (int k = 0; k <= K; ++k) terms.push_back({Cplx(1.0 / factorial(k), 0.0), &powers[k]});
  return linear_combine(terms, a.order());
}

int choose_K(double psiNorm, double relTol, int cap) {
  double x = 2.0 * psiNorm;
  if (!(x > 0)) return 0;
  double grow = std::exp(x);
  double term = 1.0;
  for (int K = 0; K < cap; ++K) {
    term *= x / (K + 1);  // (2x)^{K+1} / (K+1)!
    if (term * grow <= relTol) return K;
  }
  return cap;
}

OneStepResult one_step_weak(const MatrixSymbol& a, const ResonanceSpec& spec, double l,
                            double beta, int K, double relTol) {
  DiagonalSplit sp = split_diagonal(a);
  auto aD = std::make_shared<const MatrixSymbol>(sp.diagonal);
  ResonantSplit rs = split_resonant(sp.offDiagonal, aD, spec);
  MatrixSymbol psi = build_psi(aD, rs.nonResonant, spec);
  if (K < 0) K = choose_K(symbol_norm(psi, l, 0.0).value, relTol);

  OneStepResult out{gauge_conjugate(a, psi, K).with_order(a.order()),
                    std::move(psi),
                    sp.diagonal,
                    rs.resonant,
                    sp.diagonal /* placeholder */,
                    K,
                    0.0,
                    0.0,
                    0.0};
  out.remainder = subtract(subtract(out.transformed, out.diag), out.resonant);

  const bool scalar = spec.variant == ResonanceSpec::Variant::Scalar;
  double s = scalar ? spec.s : spec.sPrime;
  double delta = scalar ? spec.delta : 0.0;
  out.psiWeight = beta - delta;
  out.psiNormBound = predicted_psi_bound(symbol_norm(sp.offDiagonal, l, beta).value, s);
  double x = symbol_norm(sp.offDiagonal, l + std::abs(beta) + std::abs(beta - delta), beta).value;
  out.remainderBound = predicted_remainder_bound(x, s);
  return out;
}

ParallelResult parallel_transform(const MatrixSymbol& a, const ResonanceSpec& spec,
                                  int kTilde, double l, double beta, int K,
                                  double relTol) {
  if (kTilde < 1) throw ConfigError("the transform needs at least one order");
  DiagonalSplit sp = split_diagonal(a);
  auto aD = std::make_shared<const MatrixSymbol>(sp.diagonal);
  MatrixSymbol aOD = sp.offDiagonal;

  std::vector<MatrixSymbol> psis;
  std::vector<MatrixSymbol> resonants;
  for (int order = 1; order <= kTilde; ++order) {
    // Order-homogeneous content reaching this level: chains over the
    // off-diagonal part carry total generator weight order-1, chains over
    // the diagonal carry weight order (the j = 1 diagonal chain is the one
    // cancelled by psi_order and is excluded).
    std::vector<MatrixSymbol> terms;
    std::vector<Cplx> coefs;
    if (order == 1) {
      terms.push_back(aOD);
      coefs.push_back(1.0);
    }
    for (int j = 1; j < order; ++j) {
      std::vector<std::vector<int>> tuples;
      std::vector<int> cur;
      compositions(order - 1, j, cur, tuples);
      for (const auto& tup : tuples) {
        std::vector<const MatrixSymbol*> chain;
        for (int k : tup) chain.push_back(&psis[k - 1]);
        terms.push_back(ad_chain(aOD, chain));
        coefs.push_back(1.0 / factorial(j));
      }
    }
    for (int j = 2; j <= order; ++j) {
      std::vector<std::vector<int>> tuples;
      std::vector<int> cur;
      compositions(order, j, cur, tuples);
      for (const auto& tup : tuples) {
        std::vector<const MatrixSymbol*> chain;
        for (int k : tup) chain.push_back(&psis[k - 1]);
        terms.push_back(ad_chain(sp.diagonal, chain));
        coefs.push_back(1.0 / factorial(j));
      }
    }
    std::vector<std::pair<Cplx, const MatrixSymbol*>> lin;
    for (std::size_t i = 0; i < terms.size(); ++i) lin.push_back({coefs[i], &terms[i]});
    MatrixSymbol level = linear_combine(lin, beta);
    ResonantSplit rs = split_resonant(level, aD, spec);
    psis.push_back(build_psi(aD, rs.nonResonant, spec));
    resonants.push_back(rs.resonant);
  }

  std::vector<std::pair<Cplx, const MatrixSymbol*>> psiTerms;
  for (const auto& p : psis) psiTerms.push_back({Cplx(1.0, 0.0), &p});
  MatrixSymbol psiTotal = linear_combine(psiTerms, 0.0);
  if (K < 0) K = choose_K(symbol_norm(psiTotal, l, 0.0).value, relTol);

  ParallelResult out{gauge_conjugate(a, psiTotal, K).with_order(a.order()),
                     std::move(psis),
                     sp.diagonal,
                     sp.diagonal /* placeholder */,
                     sp.diagonal /* placeholder */,
                     K};
  std::vector<std::pair<Cplx, const MatrixSymbol*>> yTerms;
  for (const auto& r : resonants) yTerms.push_back({Cplx(1.0, 0.0), &r});
  out.removedResonant = linear_combine(yTerms, beta);
  out.remainder = subtract(subtract(out.transformed, out.diag), out.removedResonant);
  return out;
}

namespace {

// Sampled check that every open-gate probe point keeps the diagonal gap above
// half the coefficient separation at weight alpha. Aligned probes per
// frequency cover the region where theta + xi falls near the origin.
bool gate_radius_valid(const MatrixSymbol& diag, const std::vector<Freq>& thetas,
                       const std::vector<std::pair<int, int>>& pairs, double c,
                       double alpha, double s) {
  const int d = diag.d();
  auto dirs = unit_directions(d, d == 1 ? 2 : 12);
  EvalContext ctx;
  for (const auto& t : thetas) {
    std::vector<double> radii = log_radii(std::max(0.05, s - 1.0), 200.0 * (s + 1.0), 20);
    double tn = t.norm();
    if (tn > 1.0) {
      for (int i = 0; i <= 8; ++i)
        radii.push_back(tn - 1.0 + 2.0 * i / 8.0);
    }
    std::vector<std::vector<double>> probes;
    for (const auto& u : dirs)
      for (double r : radii) {
        std::vector<double> xi(d);
        for (int i = 0; i < d; ++i) xi[i] = r * u[i];
        probes.push_back(std::move(xi));
      }
    if (tn > 0) {
      // Ray through -theta, hitting the shifted ball exactly.
      for (double r : radii) {
        std::vector<double> xi(d);
        for (int i = 0; i < d; ++i) xi[i] = -r * t[i] / tn;
        probes.push_back(std::move(xi));
      }
    }
    for (const auto& xi : probes) {
      auto xs = shift_point(xi, t);
      if (std::min(weight(xi), weight(xs)) <= s) continue;
      Mat aXi = diag.eval(Freq::zero(d), xi, &ctx);
      Mat aSh = diag.eval(Freq::zero(d), xs, &ctx);
      for (const auto& [j, k] : pairs) {
        double gap = std::abs(aSh(j, j) - aXi(k, k));
        if (gap <= 0.5 * c * std::pow(weight(xi), alpha)) return false;
      }
    }
  }
  return true;
}

}  // namespace

UncoupleResult uncouple_system(const MatrixSymbol& a, double alpha, double beta,
                               UncoupleMode mode, int targetN, double epsTrim) {
  const int d = a.d(), m = a.m();
  DiagonalSplit sp = split_diagonal(a);

  // Drop negligible couplings first, one +-theta group at a time starting
  // from the largest reach, as long as the cumulative weighted sups stay
  // below the budget.
  struct Group {
    Freq rep;
    std::vector<std::pair<Freq, ExprPtr>> members;
    double sup = 0.0;
  };
  std::map<Freq, Group> groups;
  NormGrid grid = default_norm_grid();
  for (const auto& [t, e] : sp.offDiagonal.entries()) {
    if (is_zero_const(e)) continue;
    Freq rep = (-t) < t ? t : -t;
    auto& g = groups[rep];
    g.rep = rep;
    g.members.push_back({t, e});
    g.sup += weighted_sup(e, beta, d, m, grid).value;
  }
  std::vector<const Group*> order;
  for (const auto& [rep, g] : groups) order.push_back(&g);
  std::sort(order.begin(), order.end(), [](const Group* x, const Group* y) {
    double nx = x->rep.norm(), ny = y->rep.norm();
    if (nx != ny) return nx > ny;
    return y->rep < x->rep;
  });
  MatrixSymbol::Builder keptB(d, m, sp.offDiagonal.order());
  MatrixSymbol::Builder trimmedB(d, m, sp.offDiagonal.order());
  double trimBound = 0.0;
  std::size_t idx = 0;
  for (; idx < order.size(); ++idx) {
    if (trimBound + order[idx]->sup >= epsTrim) break;
    trimBound += order[idx]->sup;
    for (const auto& [t, e] : order[idx]->members) trimmedB.add(t, e);
  }
  for (; idx < order.size(); ++idx)
    for (const auto& [t, e] : order[idx]->members) keptB.add(t, e);
  MatrixSymbol kept = keptB.build();
  MatrixSymbol trimmed = trimmedB.build();

  // Principal coefficients read off the diagonal at a large radius.
  double coeffSep = 0.0;
  std::vector<std::pair<int, int>> frozen;
  std::vector<std::pair<int, int>> active;
  if (m > 1) {
    const double R = 1e3;
    auto dirs = unit_directions(d, d == 1 ? 2 : 6);
    std::vector<double> c(m, 0.0);
    for (int j = 0; j < m; ++j) {
      double acc = 0.0;
      for (const auto& u : dirs) {
        std::vector<double> xi(d);
        for (int i = 0; i < d; ++i) xi[i] = R * u[i];
        acc += sp.diagonal.eval(Freq::zero(d), xi)(j, j).real();
      }
      c[j] = acc / dirs.size() / std::pow(R, alpha);
    }
    double cMax = 0.0;
    for (double v : c) cMax = std::max(cMax, std::abs(v));
    double tol = 1e-6 * std::max(1.0, cMax);
    coeffSep = std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j)
      for (int k = j + 1; k < m; ++k) {
        double gap = std::abs(c[j] - c[k]);
        if (gap < tol) {
          if (mode == UncoupleMode::Full)
            throw DegenerateSeparation(
                "principal coefficients coincide for entries " + std::to_string(j) + " and " +
                std::to_string(k) + "; full uncoupling needs pairwise distinct coefficients");
          frozen.push_back({j, k});
        } else {
          coeffSep = std::min(coeffSep, gap);
          active.push_back({j, k});
          active.push_back({k, j});
        }
      }
    if (!std::isfinite(coeffSep)) coeffSep = 0.0;
  }

  // Gate radius: smallest s' >= 1 whose open-gate probes all clear the gap
  // threshold, located by doubling then bisection on the sampled predicate.
  double sPrime = 1.0;
  if (!active.empty()) {
    std::vector<Freq> thetas;
    for (const auto& [t, e] : kept.entries())
      if (!t.is_zero() && !is_zero_const(e)) thetas.push_back(t);
    if (!thetas.empty()) {
      auto valid = [&](double s) {
        return gate_radius_valid(sp.diagonal, thetas, active, coeffSep, alpha, s);
      };
      if (!valid(1.0)) {
        double lo = 1.0, hi = 2.0;
        while (!valid(hi)) {
          lo = hi;
          hi *= 2.0;
          if (hi > 1024.0)
            throw DegenerateSeparation(
                "no gate radius below 1024 separates the diagonal values");
        }
        for (int it = 0; it < 40; ++it) {
          double mid = 0.5 * (lo + hi);
          (valid(mid) ? hi : lo) = mid;
        }
        sPrime = hi;
      }
    }
  }

  ResonanceSpec spec;
  spec.variant = mode == UncoupleMode::Full ? ResonanceSpec::Variant::SystemFull
                                            : ResonanceSpec::Variant::SystemOneStep;
  spec.sPrime = sPrime;
  spec.frozenPairs = frozen;

  int kTilde = 1;
  if (mode == UncoupleMode::Full) {
    if (alpha <= beta)
      throw ConfigError("full uncoupling needs the system order above the coupling order");
    kTilde = static_cast<int>(std::ceil((targetN + beta) / (alpha - beta)));
    kTilde = std::max(kTilde, 1);
  }

  MatrixSymbol working = add(sp.diagonal, kept).with_order(a.order());
  ParallelResult pr = parallel_transform(working, spec, kTilde, 0.0, beta);

  UncoupleResult out{pr.transformed,
                     sp.diagonal,
                     sp.diagonal /* placeholder */,
                     sp.diagonal /* placeholder */,
                     std::move(trimmed),
                     std::move(pr.psis),
                     sPrime,
                     std::move(frozen),
                     trimBound,
                     kTilde,
                     coeffSep};
  UncoupledSplit us = split_uncoupled(out.transformed);
  out.uncoupledY = subtract(us.uncoupled, sp.diagonal);
  out.remainder = us.coupled;
  return out;
}

namespace {

struct SlopeFit {
  double slope = 0.0;
  double residual = 0.0;
  bool valid = false;
};

SlopeFit fit_entry_slope(const MatrixSymbol& s, const Freq& theta, double rLo,
                         double rHi, int nRadii, int nDirs) {
  auto dirs = unit_directions(s.d(), nDirs);
  auto radii = log_radii(rLo, rHi, nRadii);
  std::vector<double> xs, ys;
  for (double r : radii) {
    double best = 0.0;
    for (const auto& u : dirs) {
      std::vector<double> xi(s.d());
      for (int i = 0; i < s.d(); ++i) xi[i] = r * u[i];
      // Fresh context per point: sharing happens inside one evaluation of a
      // deep commutator DAG, not across points, and the memo would otherwise
      // retain every probe.
      EvalContext ctx;
      best = std::max(best, op_norm(s.eval(theta, xi, &ctx)));
    }
    if (best > 1e-300) {
      xs.push_back(std::log(1.0 + r));
      ys.push_back(std::log(best));
    }
  }
  SlopeFit fit;
  if (xs.size() < 3) return fit;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= xs.size();
  my /= ys.size();
  double num = 0, den = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    num += (xs[i] - mx) * (ys[i] - my);
    den += (xs[i] - mx) * (xs[i] - mx);
  }
  fit.slope = num / den;
  double intercept = my - fit.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double e = ys[i] - (intercept + fit.slope * xs[i]);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / xs.size());
  fit.valid = true;
  return fit;
}

void require_radii(double rLo, double rHi) {
  if (!(rLo > 0) || !(rHi > rLo) || std::log10(rHi / rLo) < 1.5)
    throw InsufficientRadii("slope estimation needs at least 1.5 decades of radii");
}

}  // namespace

double estimate_decay_order(const MatrixSymbol& s, const Freq& theta, double rLo,
                            double rHi, int nRadii, int nDirs) {
  require_radii(rLo, rHi);
  SlopeFit fit = fit_entry_slope(s, theta, rLo, rHi, nRadii, nDirs);
  if (!fit.valid) return -std::numeric_limits<double>::infinity();
  return fit.slope;
}

double predicted_psi_bound(double offDiagNorm, double s) { return offDiagNorm / s; }

double predicted_remainder_bound(double offDiagNorm, double s) {
  double x = offDiagNorm;
  return 3.0 / s * x * x * std::exp(2.0 * x / s);
}

double series_tail_bound(double psiNorm, double aNorm, int K) {
  double x = 2.0 * psiNorm;
  double term = 1.0;
  for (int k = 1; k <= K + 1; ++k) term *= x / k;
  return term * std::exp(x) * aNorm;
}

OrderFit commutator_order_estimate(const MatrixSymbol& a, const MatrixSymbol& psi,
                                   double rLo, double rHi, int nRadii, int nDirs) {
  require_radii(rLo, rHi);
  MatrixSymbol c = commutator_ad(a, psi);
  OrderFit out;
  out.order = -std::numeric_limits<double>::infinity();
  for (const auto& kv : c.entries()) {
    SlopeFit fit = fit_entry_slope(c, kv.first, rLo, rHi, nRadii, nDirs);
    if (fit.valid && fit.slope > out.order) {
      out.order = fit.slope;
      out.residual = fit.residual;
    }
  }
  return out;
}

}  // namespace gc
