#include <cmath>
#include <map>
#include <memory>
#include <random>

#include "doctest.h"
#include "gc/errors.hpp"
#include "gc/gauge.hpp"
#include "gc/norms.hpp"

using namespace gc;

namespace {

const Cplx kI(0.0, 1.0);

std::vector<std::vector<double>> probe_points(int d, int n, double radius, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-radius, radius);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < n; ++i) {
    std::vector<double> xi(d);
    for (double& v : xi) v = u(rng);
    pts.push_back(std::move(xi));
  }
  return pts;
}

double pointwise_distance(const MatrixSymbol& a, const MatrixSymbol& b,
                          const std::vector<std::vector<double>>& pts) {
  double worst = 0;
  EvalContext ctx;
  std::map<Freq, int> freqs;
  for (const auto& [t, e] : a.entries()) freqs[t] = 1;
  for (const auto& [t, e] : b.entries()) freqs[t] = 1;
  for (const auto& [t, one] : freqs)
    for (const auto& xi : pts)
      worst = std::max(worst, (a.eval(t, xi, &ctx) - b.eval(t, xi, &ctx)).cwiseAbs().maxCoeff());
  return worst;
}

double sup_over_probes(const MatrixSymbol& a, const std::vector<std::vector<double>>& pts) {
  double worst = 0;
  EvalContext ctx;
  for (const auto& [t, e] : a.entries())
    for (const auto& xi : pts) worst = std::max(worst, op_norm(a.eval(t, xi, &ctx)));
  return worst;
}

// Quadratic scalar reference a(xi) = |xi|^2 with two real cosine-type
// couplings of the given size at frequencies +-1 (and +-2 when wide). The
// entry at -theta is the adjoint partner of the entry at theta, which for a
// decaying profile means the same profile shifted by -theta.
MatrixSymbol quadratic_with_couplings(double size, bool wide) {
  MatrixSymbol::Builder b(1, 1, 2.0);
  b.add(std::vector<double>{0.0}, hom(2.0));
  b.add(std::vector<double>{1.0}, scalar_const(size));
  b.add(std::vector<double>{-1.0}, scalar_const(size));
  if (wide) {
    ExprPtr e = scale(0.5 * size, jap(-1.0));
    b.add(std::vector<double>{2.0}, e);
    b.add(std::vector<double>{-2.0},
          conj_transpose(shift_expr(Freq::from_doubles({-2.0}), e)));
  }
  return b.build();
}

// Two-sheet conic reference +-|xi| outside the unit ball, zero inside, with
// Hermitian couplings size*[[1,1],[1,-1]] on the 2*pi square lattice
// directions.
MatrixSymbol masked_cone_system(double size, bool withFarCoupling) {
  const double twoPi = 2.0 * M_PI;
  Mat sheets(2, 2);
  sheets << 1, 0, 0, -1;
  Mat mixed(2, 2);
  mixed << 1, 1, 1, -1;
  MatrixSymbol::Builder b(2, 2, 1.0);
  b.add(std::vector<double>{0.0, 0.0},
        product({ind_ge(1.0), hom(1.0), const_matrix(sheets)}));
  ExprPtr c = scale(size, const_matrix(mixed));
  b.add(std::vector<double>{twoPi, 0.0}, c);
  b.add(std::vector<double>{-twoPi, 0.0}, c);
  b.add(std::vector<double>{0.0, twoPi}, c);
  b.add(std::vector<double>{0.0, -twoPi}, c);
  if (withFarCoupling) {
    ExprPtr tiny = scale(1e-12, const_matrix(mixed));
    b.add(std::vector<double>{10.0 * twoPi, 0.0}, tiny);
    b.add(std::vector<double>{-10.0 * twoPi, 0.0}, tiny);
  }
  return b.build();
}

}  // namespace

TEST_SUITE("unit.gauge") {

TEST_CASE("psi divides the coupling by the diagonal gap") {
  MatrixSymbol a = quadratic_with_couplings(1.0, false);
  DiagonalSplit sp = split_diagonal(a);
  auto aD = std::make_shared<const MatrixSymbol>(sp.diagonal);
  ResonanceSpec spec = make_scalar_spec(0.0, 1.0);
  ResonantSplit rs = split_resonant(sp.offDiagonal, aD, spec);
  MatrixSymbol psi = build_psi(aD, rs.nonResonant, spec);

  // At theta = 1, xi = 2 the gap is 3^2 - 2^2 = 5 and the coupling is 1.
  Mat v = psi.eval(Freq::from_doubles({1.0}), {2.0});
  CHECK(std::abs(v(0, 0) - kI / 5.0) < 1e-14);

  MatrixSymbol scaled = build_psi(aD, scale_symbol(0.25, rs.nonResonant), spec);
  Mat w = scaled.eval(Freq::from_doubles({1.0}), {2.0});
  CHECK(std::abs(w(0, 0) - 0.25 * kI / 5.0) < 1e-14);
}

TEST_CASE("resonant and non-resonant parts partition the coupling") {
  MatrixSymbol a = quadratic_with_couplings(0.7, true);
  DiagonalSplit sp = split_diagonal(a);
  auto aD = std::make_shared<const MatrixSymbol>(sp.diagonal);
  ResonanceSpec spec = make_scalar_spec(0.0, 1.0);
  ResonantSplit rs = split_resonant(sp.offDiagonal, aD, spec);
  auto pts = probe_points(1, 60, 8.0, 11);
  CHECK(pointwise_distance(add(rs.resonant, rs.nonResonant), sp.offDiagonal, pts) < 1e-13);
}

TEST_CASE("the commutator with the reference reproduces minus the removable part") {
  ResonanceSpec spec = make_scalar_spec(0.0, 1.0);
  auto pts1 = probe_points(1, 60, 8.0, 23);

  MatrixSymbol a = quadratic_with_couplings(0.7, true);
  DiagonalSplit sp = split_diagonal(a);
  auto aD = std::make_shared<const MatrixSymbol>(sp.diagonal);
  ResonantSplit rs = split_resonant(sp.offDiagonal, aD, spec);
  MatrixSymbol psi = build_psi(aD, rs.nonResonant, spec);
  CHECK(pointwise_distance(commutator_ad(sp.diagonal, psi),
                           scale_symbol(-1.0, rs.nonResonant), pts1) < 1e-12);

  // Matrix-valued couplings against a two-sheet quadratic reference.
  Mat sheets(2, 2);
  sheets << 1, 0, 0, 2;
  Mat cpl(2, 2);
  cpl << 0.3, 1.0, 0.5, 0.2;
  MatrixSymbol::Builder b(2, 2, 2.0);
  b.add(std::vector<double>{0.0, 0.0}, product({const_matrix(sheets), hom(2.0)}));
  b.add(std::vector<double>{1.0, 0.0}, const_matrix(cpl));
  b.add(std::vector<double>{-1.0, 0.0}, const_matrix(cpl.adjoint()));
  MatrixSymbol sys = b.build();
  ResonanceSpec spec2 = make_scalar_spec(0.0, 0.5);
  DiagonalSplit sp2 = split_diagonal(sys);
  auto aD2 = std::make_shared<const MatrixSymbol>(sp2.diagonal);
  ResonantSplit rs2 = split_resonant(sp2.offDiagonal, aD2, spec2);
  MatrixSymbol psi2 = build_psi(aD2, rs2.nonResonant, spec2);
  auto pts2 = probe_points(2, 60, 6.0, 29);
  CHECK(pointwise_distance(commutator_ad(sp2.diagonal, psi2),
                           scale_symbol(-1.0, rs2.nonResonant), pts2) < 1e-12);
}

TEST_CASE("psi inherits the symmetry of a symmetric coupling") {
  MatrixSymbol a = quadratic_with_couplings(0.3, true);
  DiagonalSplit sp = split_diagonal(a);
  auto aD = std::make_shared<const MatrixSymbol>(sp.diagonal);
  ResonanceSpec spec = make_scalar_spec(0.0, 1.0);
  ResonantSplit rs = split_resonant(sp.offDiagonal, aD, spec);
  MatrixSymbol psi = build_psi(aD, rs.nonResonant, spec);
  CHECK(symmetry_defect(a, 120, 8.0) < 1e-12);
  CHECK(symmetry_defect(psi, 120, 8.0) < 1e-12);
}

TEST_CASE("conjugation with no series terms returns the symbol unchanged") {
  MatrixSymbol a = quadratic_with_couplings(0.3, false);
  DiagonalSplit sp = split_diagonal(a);
  auto aD = std::make_shared<const MatrixSymbol>(sp.diagonal);
  ResonanceSpec spec = make_scalar_spec(0.0, 1.0);
  MatrixSymbol psi = build_psi(aD, split_resonant(sp.offDiagonal, aD, spec).nonResonant, spec);
  auto pts = probe_points(1, 40, 6.0, 31);
  CHECK(pointwise_distance(gauge_conjugate(a, psi, 0), a, pts) < 1e-14);
}

TEST_CASE("series length selection tracks the tail bound") {
  CHECK(choose_K(0.0, 1e-9) == 0);
  CHECK(choose_K(0.1, 1e-9) == 7);
  CHECK(choose_K(0.1, 1e-3) == 3);
  CHECK(choose_K(0.05, 1e-9) <= choose_K(0.4, 1e-9));
  CHECK(choose_K(5.0, 1e-12) == 24);
  CHECK(choose_K(5.0, 1e-12, 40) <= 40);
}

TEST_CASE("one rotation leaves exactly the higher commutator terms") {
  MatrixSymbol a = quadratic_with_couplings(0.1, false);
  ResonanceSpec spec = make_scalar_spec(0.0, 1.0);
  OneStepResult res = one_step_weak(a, spec, 0.0, 0.0, 3);
  REQUIRE(res.K == 3);

  DiagonalSplit sp = split_diagonal(a);
  MatrixSymbol od1 = commutator_ad(sp.offDiagonal, res.psi);
  MatrixSymbol od2 = commutator_ad(od1, res.psi);
  MatrixSymbol od3 = commutator_ad(od2, res.psi);
  MatrixSymbol dg1 = commutator_ad(sp.diagonal, res.psi);
  MatrixSymbol dg2 = commutator_ad(dg1, res.psi);
  MatrixSymbol dg3 = commutator_ad(dg2, res.psi);
  MatrixSymbol expected = linear_combine({{1.0, &od1},
                                          {0.5, &od2},
                                          {1.0 / 6.0, &od3},
                                          {0.5, &dg2},
                                          {1.0 / 6.0, &dg3}},
                                         0.0);
  auto pts = probe_points(1, 50, 7.0, 41);
  CHECK(pointwise_distance(res.remainder, expected, pts) < 1e-12);
}

TEST_CASE("one rotation reports bounds that dominate the measured norms") {
  MatrixSymbol a = quadratic_with_couplings(0.1, false);
  ResonanceSpec spec = make_scalar_spec(0.0, 1.0);
  OneStepResult res = one_step_weak(a, spec, 0.0, 0.0);
  CHECK(res.K >= 2);
  CHECK(res.K <= 24);

  // Coupling sups are 0.1 at each of the two frequencies, so the off-diagonal
  // zero-order norm is exactly 0.2 and the predicted bounds are closed form.
  CHECK(res.psiWeight == doctest::Approx(0.0));
  CHECK(res.psiNormBound == doctest::Approx(0.2));
  CHECK(res.remainderBound == doctest::Approx(3.0 * 0.04 * std::exp(0.4)));

  double psiNorm = symbol_norm(res.psi, 0.0, 0.0).value;
  CHECK(psiNorm <= res.psiNormBound + 1e-12);
  CHECK(psiNorm >= 0.15);
  double remNorm = symbol_norm(res.remainder, 0.0, 0.0).value;
  CHECK(remNorm <= res.remainderBound * 1.0001 + 1e-9);

  OneStepResult shifted = one_step_weak(a, make_scalar_spec(0.25, 1.0), 0.0, 0.0);
  CHECK(shifted.psiWeight == doctest::Approx(-0.25));
}

TEST_CASE("one rotation preserves symmetry of the symbol") {
  MatrixSymbol a = quadratic_with_couplings(0.15, true);
  ResonanceSpec spec = make_scalar_spec(0.0, 1.0);
  OneStepResult res = one_step_weak(a, spec, 0.0, 0.0);
  CHECK(symmetry_defect(res.transformed, 120, 8.0) < 1e-10);
}

TEST_CASE("the single-order scheme coincides with one rotation") {
  MatrixSymbol a = quadratic_with_couplings(0.12, true);
  ResonanceSpec spec = make_scalar_spec(0.0, 1.0);
  OneStepResult one = one_step_weak(a, spec, 0.0, 0.0, 4);
  ParallelResult par = parallel_transform(a, spec, 1, 0.0, 0.0, 4);
  auto pts = probe_points(1, 50, 7.0, 43);
  REQUIRE(par.psis.size() == 1);
  CHECK(pointwise_distance(par.psis[0], one.psi, pts) < 1e-13);
  CHECK(pointwise_distance(par.transformed, one.transformed, pts) < 1e-12);
  CHECK(pointwise_distance(par.remainder, one.remainder, pts) < 1e-12);
}

TEST_CASE("the second-order generator cancels the second-order couplings") {
  MatrixSymbol a = quadratic_with_couplings(0.2, true);
  ResonanceSpec spec = make_scalar_spec(0.0, 1.0);
  ParallelResult res = parallel_transform(a, spec, 2, 0.0, 0.0);
  REQUIRE(res.psis.size() == 2);

  DiagonalSplit sp = split_diagonal(a);
  auto aD = std::make_shared<const MatrixSymbol>(sp.diagonal);
  MatrixSymbol b2 = commutator_ad(sp.offDiagonal, res.psis[0]);
  MatrixSymbol t2 = ad_chain(sp.diagonal, {&res.psis[0], &res.psis[0]});
  MatrixSymbol level2 = linear_combine({{1.0, &b2}, {0.5, &t2}}, 0.0);
  ResonantSplit rs = split_resonant(level2, aD, spec);
  auto pts = probe_points(1, 50, 7.0, 47);
  CHECK(pointwise_distance(commutator_ad(sp.diagonal, res.psis[1]),
                           scale_symbol(-1.0, rs.nonResonant), pts) < 1e-11);
}

TEST_CASE("the remainder shrinks one coupling order per scheme order") {
  ResonanceSpec spec = make_scalar_spec(0.0, 1.0);
  MatrixSymbol base = quadratic_with_couplings(1.0, true);
  DiagonalSplit sp = split_diagonal(base);
  auto pts = probe_points(1, 10, 3.5, 53);

  auto residual = [&](double eps, int kTilde) {
    MatrixSymbol scaledOD = scale_symbol(eps, sp.offDiagonal);
    MatrixSymbol a = add(sp.diagonal, scaledOD).with_order(2.0);
    ParallelResult res = parallel_transform(a, spec, kTilde, 0.0, 0.0);
    return sup_over_probes(res.remainder, pts) / (eps * eps);
  };

  double r1 = residual(0.05, 1) / residual(0.2, 1);
  CHECK(r1 > 0.6);
  CHECK(r1 < 1.4);
  double r2 = residual(0.05, 2) / residual(0.2, 2);
  CHECK(r2 > 0.1);
  CHECK(r2 < 0.45);
}

TEST_CASE("uncoupling a two-sheet cone finds the gate radius and separation") {
  MatrixSymbol a = masked_cone_system(0.05, true);
  UncoupleResult res = uncouple_system(a, 1.0, 0.0, UncoupleMode::OneStep);

  CHECK(res.coeffSeparation == doctest::Approx(2.0));
  CHECK(res.sPrime > 1.9);
  CHECK(res.sPrime < 2.2);
  CHECK(res.kTilde == 1);
  CHECK(res.frozenPairs.empty());

  // The 1e-12 coupling at radius 20*pi is below the trim budget.
  CHECK(res.trimBound > 0.0);
  CHECK(res.trimBound < 1e-9);
  CHECK(res.trimmed.has(Freq::from_doubles({20.0 * M_PI, 0.0})));

  // Rotation output stays symmetric and produces genuine diagonal content.
  CHECK(symmetry_defect(res.transformed, 12, 20.0) < 1e-10);
  EvalContext ctx;
  CHECK(op_norm(res.uncoupledY.eval(Freq::zero(2), {10.0, 3.0}, &ctx)) > 1e-6);

  // One rotation must gain at least one order of decay in the coupled
  // remainder. With two sheets it gains two: commutators of off-diagonal
  // 2x2 couplings with the antisymmetric generator are diagonal to leading
  // order, so only the evaluation-point shift survives off the diagonal.
  double slope = estimate_decay_order(res.remainder, Freq::from_doubles({2.0 * M_PI, 0.0}),
                                      20.0, 2000.0, 12, 6);
  CHECK(slope > -3.0);
  CHECK(slope < -0.9);
}

TEST_CASE("full uncoupling pushes the coupled remainder two orders down") {
  MatrixSymbol a = masked_cone_system(0.05, false);
  UncoupleResult res = uncouple_system(a, 1.0, 0.0, UncoupleMode::Full, 2);
  CHECK(res.kTilde == 2);
  CHECK(res.sPrime == doctest::Approx(2.0).epsilon(0.1));
  double slope = estimate_decay_order(res.remainder, Freq::from_doubles({2.0 * M_PI, 0.0}),
                                      20.0, 2000.0, 12, 6);
  CHECK(slope > -3.4);
  CHECK(slope < -1.5);
}

TEST_CASE("coinciding sheets freeze in one-step mode and reject full mode") {
  const double twoPi = 2.0 * M_PI;
  Mat ones(2, 2);
  ones << 1, 1, 1, 1;
  MatrixSymbol::Builder b(2, 2, 1.0);
  b.add(std::vector<double>{0.0, 0.0},
        product({ind_ge(1.0), hom(1.0), const_matrix(Mat::Identity(2, 2))}));
  ExprPtr c = scale(0.05, const_matrix(ones));
  b.add(std::vector<double>{twoPi, 0.0}, c);
  b.add(std::vector<double>{-twoPi, 0.0}, c);
  MatrixSymbol a = b.build();

  CHECK_THROWS_AS(uncouple_system(a, 1.0, 0.0, UncoupleMode::Full), DegenerateSeparation);

  UncoupleResult res = uncouple_system(a, 1.0, 0.0, UncoupleMode::OneStep);
  REQUIRE(res.frozenPairs.size() == 1);
  CHECK(res.frozenPairs[0] == std::pair<int, int>(0, 1));
  auto pts = probe_points(2, 40, 10.0, 59);
  CHECK(pointwise_distance(res.transformed, a, pts) < 1e-13);
  Mat rem = res.remainder.eval(Freq::from_doubles({twoPi, 0.0}), {5.0, 1.0});
  CHECK(std::abs(rem(0, 1) - 0.05) < 1e-14);
  CHECK(std::abs(rem(0, 0)) < 1e-14);
}

TEST_CASE("full uncoupling rejects a coupling order at or above the system order") {
  MatrixSymbol a = masked_cone_system(0.05, false);
  CHECK_THROWS_AS(uncouple_system(a, 1.0, 1.0, UncoupleMode::Full), ConfigError);
}

TEST_CASE("bound calculators evaluate their closed forms") {
  CHECK(predicted_psi_bound(6.0, 2.0) == doctest::Approx(3.0));
  CHECK(predicted_psi_bound(0.0, 2.0) == 0.0);
  CHECK(predicted_remainder_bound(1.0, 1.0) ==
        doctest::Approx(3.0 * std::exp(2.0)));
  CHECK(predicted_remainder_bound(0.0, 1.0) == 0.0);
  // (2x)^{K+1}/(K+1)! e^{2x} * aNorm at x = 0.5, K = 3, aNorm = 2.
  CHECK(series_tail_bound(0.5, 2.0, 3) ==
        doctest::Approx(1.0 / 24.0 * std::exp(1.0) * 2.0));
  CHECK(series_tail_bound(0.5, 2.0, 40) < 1e-40);
}

TEST_CASE("commutator growth order matches the difference of squares") {
  // a = <xi>^2 at frequency zero, psi constant at +-1: the commutator entry is
  // i c (<xi+theta>^2 - <xi>^2), which grows one order below a.
  MatrixSymbol::Builder ab(1, 1, 2.0);
  ab.add(std::vector<double>{0.0}, jap(2.0));
  MatrixSymbol a = ab.build();
  MatrixSymbol::Builder pb(1, 1, 0.0);
  pb.add(std::vector<double>{1.0}, scalar_const(Cplx(0.0, 0.25)));
  pb.add(std::vector<double>{-1.0}, scalar_const(Cplx(0.0, 0.25)));
  MatrixSymbol psi = pb.build();
  OrderFit fit = commutator_order_estimate(a, psi, 1.0, 1000.0);
  CHECK(fit.order == doctest::Approx(1.0).epsilon(0.1));
  CHECK(fit.residual < 0.2);

  MatrixSymbol zero = MatrixSymbol::Builder(1, 1, 0.0).build();
  OrderFit silent = commutator_order_estimate(a, zero, 1.0, 1000.0);
  CHECK(std::isinf(silent.order));
  CHECK(silent.order < 0);

  // Scalar constants commute, so the estimate reports the vanish sentinel.
  MatrixSymbol::Builder cb(1, 1, 0.0);
  cb.add(std::vector<double>{0.0}, scalar_const(2.0));
  OrderFit flat = commutator_order_estimate(cb.build(), psi, 1.0, 1000.0);
  CHECK(std::isinf(flat.order));
}

TEST_CASE("decay order estimation recovers an exact power and guards its domain") {
  MatrixSymbol::Builder b(1, 1, 0.0);
  b.add(std::vector<double>{1.0}, jap(-2.0));
  b.add(std::vector<double>{-1.0}, jap(-2.0));
  MatrixSymbol s = b.build();
  double slope = estimate_decay_order(s, Freq::from_doubles({1.0}), 1.0, 1000.0);
  CHECK(slope == doctest::Approx(-2.0).epsilon(0.01));
  CHECK_THROWS_AS(estimate_decay_order(s, Freq::from_doubles({1.0}), 1.0, 10.0),
                  InsufficientRadii);
  double vanished = estimate_decay_order(s, Freq::from_doubles({5.0}), 1.0, 1000.0);
  CHECK(std::isinf(vanished));
  CHECK(vanished < 0);
}

}  // TEST_SUITE
