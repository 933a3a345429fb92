#include <cmath>
#include <memory>
#include <random>

#include "doctest.h"
#include "gc/errors.hpp"
#include "gc/expr.hpp"
#include "gc/resonance.hpp"
#include "gc/symbol.hpp"

using namespace gc;

namespace {

const Cplx kI(0.0, 1.0);

Mat id2() { return Mat::Identity(2, 2); }

std::shared_ptr<const MatrixSymbol> scalar_diag_ref(ExprPtr profile, int d) {
  MatrixSymbol::Builder b(d, 1, 1.0);
  b.add(Freq::zero(d), std::move(profile));
  return std::make_shared<const MatrixSymbol>(b.build());
}

}  // namespace

TEST_SUITE("unit.expr") {

TEST_CASE("scalar atoms evaluate as multiples of the identity") {
  auto e = product({hom(1.0), jap(-1.0)});
  Mat v = eval_expr(e, {2.0, 0.0}, 2);
  CHECK((v - (2.0 / 3.0) * id2()).norm() == doctest::Approx(0.0).epsilon(1e-15));

  Mat w = eval_expr(jap(2.0), {0.0, 0.0}, 1);
  CHECK(std::abs(w(0, 0) - 1.0) < 1e-15);
}

TEST_CASE("coordinate atoms are 1-based and range checked") {
  Mat v = eval_expr(coord(2), {5.0, -7.0}, 1);
  CHECK(v(0, 0) == Cplx(-7.0, 0.0));
  CHECK_THROWS_AS(eval_expr(coord(3), {5.0, -7.0}, 1), DimensionMismatch);
}

TEST_CASE("indicators are closed at ge and open at lt") {
  std::vector<double> on = {1.0, 0.0};
  CHECK(eval_expr(ind_ge(1.0), on, 1)(0, 0) == Cplx(1.0, 0.0));
  CHECK(eval_expr(ind_lt(1.0), on, 1)(0, 0) == Cplx(0.0, 0.0));
  std::vector<double> inside = {0.5, 0.0};
  CHECK(eval_expr(ind_ge(1.0), inside, 1)(0, 0) == Cplx(0.0, 0.0));
  CHECK(eval_expr(ind_lt(1.0), inside, 1)(0, 0) == Cplx(1.0, 0.0));
}

TEST_CASE("indicator gates shield singular factors in a product") {
  auto masked = product({ind_ge(1.0), hom(-1.0)});
  Mat zero = eval_expr(masked, {0.0, 0.0}, 1);
  CHECK(zero(0, 0) == Cplx(0.0, 0.0));
  Mat two = eval_expr(masked, {0.5, 0.0}, 1);  // gate closed below 1
  CHECK(two(0, 0) == Cplx(0.0, 0.0));
  Mat half = eval_expr(masked, {2.0, 0.0}, 1);
  CHECK(half(0, 0) == Cplx(0.5, 0.0));

  CHECK_THROWS_AS(eval_expr(hom(-1.0), {0.0, 0.0}, 1), MaskedDivisionOutsideSupport);
  CHECK(eval_expr(hom(2.0), {0.0, 0.0}, 1)(0, 0) == Cplx(0.0, 0.0));
}

TEST_CASE("factory normalization") {
  CHECK(is_zero_const(sum({})));
  CHECK(is_zero_const(sum({scalar_const(0.0), scalar_const(0.0)})));
  auto p = product({});
  CHECK(p->kind == NodeKind::ScalarConst);
  CHECK(p->c == Cplx(1.0, 0.0));
  CHECK(is_zero_const(product({jap(1.0), scalar_const(0.0)})));

  auto folded = scale(2.0, scale(3.0, jap(1.0)));
  CHECK(folded->kind == NodeKind::Scale);
  CHECK(folded->c == Cplx(6.0, 0.0));

  auto t1 = Freq::from_doubles({1.0, 0.0});
  auto t2 = Freq::from_doubles({0.0, 1.0});
  auto stacked = shift_expr(t1, shift_expr(t2, coord(1)));
  CHECK(stacked->kind == NodeKind::Shift);
  CHECK(stacked->shift == t1 + t2);
  CHECK(shift_expr(t1, scalar_const(5.0))->kind == NodeKind::ScalarConst);
}

TEST_CASE("shift evaluates the child at xi + theta") {
  auto e = shift_expr(Freq::from_doubles({1.0, 0.0}), coord(1));
  Mat v = eval_expr(e, {2.0, 0.0}, 1);
  CHECK(v(0, 0) == Cplx(3.0, 0.0));
}

TEST_CASE("matrix structure nodes") {
  Mat M(2, 2);
  M << Cplx(1, 1), Cplx(2, 0), Cplx(0, 3), Cplx(4, 0);
  auto e = const_matrix(M);
  Mat h = eval_expr(conj_transpose(e), {0.0}, 2);
  CHECK((h - Mat(M.adjoint())).norm() == doctest::Approx(0.0));
  Mat dg = eval_expr(mat_diag(e), {0.0}, 2);
  CHECK(dg(0, 1) == Cplx(0.0, 0.0));
  CHECK(dg(0, 0) == M(0, 0));
  Mat od = eval_expr(mat_offdiag(e), {0.0}, 2);
  CHECK(od(0, 0) == Cplx(0.0, 0.0));
  CHECK(od(1, 0) == M(1, 0));
  Mat sum2 = dg + od;
  CHECK((sum2 - M).norm() == doctest::Approx(0.0));

  CHECK_THROWS_AS(eval_expr(e, {0.0}, 3), DimensionMismatch);
}

TEST_CASE("promote_scalar rewrites 1x1 constant matrices") {
  Mat one(1, 1);
  one(0, 0) = Cplx(0, 2);
  auto e = product({const_matrix(one), jap(1.0)});
  auto promoted = promote_scalar(e);
  Mat v = eval_expr(promoted, {1.0, 0.0}, 2);
  CHECK((v - Cplx(0, 4) * id2()).norm() == doctest::Approx(0.0));
}

TEST_CASE("memoized evaluation matches direct evaluation") {
  auto e = sum({product({jap(1.5), coord(1)}), scale(kI, hom(2.0)),
                shift_expr(Freq::from_doubles({0.5, 0.5}), jap(-2.0))});
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  EvalContext ctx;
  for (int it = 0; it < 50; ++it) {
    std::vector<double> xi = {u(rng), u(rng)};
    Mat a = eval_expr(e, xi, 1, &ctx);
    Mat b = eval_expr(e, xi, 1, nullptr);
    CHECK((a - b).norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("scalar resonance cutoff thresholds the symbol gap") {
  // Reference a(xi) = |xi|^2; gap across theta = (1) at xi = (2) is 9 - 4 = 5.
  auto aD = scalar_diag_ref(hom(2.0), 1);
  ResonanceSpec spec = make_scalar_spec(0.0, 1.0);
  auto theta = Freq::from_doubles({1.0});
  CHECK(resonance_cutoff(*aD, theta, 0, 0, {2.0}, spec) == 1);
  // Tighten the radius until the same pair counts as resonant.
  ResonanceSpec tight = make_scalar_spec(0.0, 6.0);
  CHECK(resonance_cutoff(*aD, theta, 0, 0, {2.0}, tight) == 0);
  // theta = 0 diagonal pairs are always resonant.
  CHECK(resonance_cutoff(*aD, Freq::zero(1), 0, 0, {2.0}, spec) == 0);
}

TEST_CASE("positive delta uses the larger weight, negative the smaller") {
  auto aD = scalar_diag_ref(hom(2.0), 1);
  auto theta = Freq::from_doubles({1.0});
  std::vector<double> xi = {2.0};  // weights: <xi> = 3, <xi+theta> = 4, gap 5
  ResonanceSpec up = make_scalar_spec(1.0, 1.3);
  CHECK(up.symmetrization == ResonanceSpec::Symmetrization::MaxWeight);
  CHECK(resonance_cutoff(*aD, theta, 0, 0, xi, up) == 0);  // 5 < 1.3 * 4
  ResonanceSpec down = make_scalar_spec(-1.0, 14.0);
  CHECK(down.symmetrization == ResonanceSpec::Symmetrization::MinWeight);
  CHECK(resonance_cutoff(*aD, theta, 0, 0, xi, down) == 1);  // 5 > 14 / 3
}

TEST_CASE("system cutoff freezes listed pairs and all diagonal pairs") {
  MatrixSymbol::Builder b(1, 2, 1.0);
  Mat D = Mat::Zero(2, 2);
  D(0, 0) = 1.0;
  D(1, 1) = -1.0;
  b.add(Freq::zero(1), product({const_matrix(D), jap(1.0)}));
  auto aD = std::make_shared<const MatrixSymbol>(b.build());

  ResonanceSpec spec;
  spec.variant = ResonanceSpec::Variant::SystemFull;
  spec.sPrime = 2.0;
  auto theta = Freq::from_doubles({1.0});
  std::vector<double> far = {8.0};  // min weight 9 > 2
  CHECK(resonance_cutoff(*aD, theta, 0, 1, far, spec) == 1);
  CHECK(resonance_cutoff(*aD, theta, 0, 0, far, spec) == 0);
  std::vector<double> near = {0.4};  // min weight 1.4 < 2
  CHECK(resonance_cutoff(*aD, theta, 0, 1, near, spec) == 0);

  spec.frozenPairs = {{0, 1}};
  CHECK(resonance_cutoff(*aD, theta, 0, 1, far, spec) == 0);
  CHECK(resonance_cutoff(*aD, theta, 1, 0, far, spec) == 0);
}

TEST_CASE("cutoff symmetry under theta negation and index swap") {
  MatrixSymbol::Builder b(2, 2, 1.0);
  Mat D = Mat::Zero(2, 2);
  D(0, 0) = 1.0;
  D(1, 1) = -1.0;
  b.add(Freq::zero(2), product({const_matrix(D), hom(1.0)}));
  auto aD = std::make_shared<const MatrixSymbol>(b.build());

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  std::vector<ResonanceSpec> specs;
  specs.push_back(make_scalar_spec(0.5, 0.7));
  specs.push_back(make_scalar_spec(-0.5, 0.7));
  ResonanceSpec sys;
  sys.variant = ResonanceSpec::Variant::SystemFull;
  sys.sPrime = 3.0;
  specs.push_back(sys);

  for (int it = 0; it < 10000; ++it) {
    auto theta = Freq::from_doubles({std::round(u(rng)), std::round(u(rng))});
    std::vector<double> xi = {u(rng), u(rng)};
    auto xs = shift_point(xi, theta);
    const auto& spec = specs[it % specs.size()];
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        int lhs = resonance_cutoff(*aD, -theta, k, j, xs, spec);
        int rhs = resonance_cutoff(*aD, theta, j, k, xi, spec);
        CHECK(lhs == rhs);
      }
  }
}

TEST_CASE("masked quotient divides by the diagonal gap where non-resonant") {
  auto aD = scalar_diag_ref(hom(2.0), 1);
  ResonanceSpec spec = make_scalar_spec(0.0, 1.0);
  auto theta = Freq::from_doubles({1.0});
  auto q = masked_quotient(scalar_const(kI), aD, theta, spec);
  Mat v = eval_expr(q, {2.0}, 1);  // gap = 9 - 4 = 5
  CHECK(std::abs(v(0, 0) - kI / 5.0) < 1e-15);

  // Resonant points give zero, not a division.
  ResonanceSpec tight = make_scalar_spec(0.0, 6.0);
  auto q2 = masked_quotient(scalar_const(kI), aD, theta, tight);
  Mat z = eval_expr(q2, {2.0}, 1);
  CHECK(z(0, 0) == Cplx(0.0, 0.0));
}

TEST_CASE("resonance mask and its complement partition the entry") {
  auto aD = scalar_diag_ref(hom(2.0), 1);
  ResonanceSpec spec = make_scalar_spec(0.0, 3.0);
  auto theta = Freq::from_doubles({1.0});
  auto inner = product({jap(1.0), coord(1)});
  auto res = resonance_mask(inner, aD, theta, spec, false);
  auto nonres = resonance_mask(inner, aD, theta, spec, true);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-9.0, 9.0);
  for (int it = 0; it < 200; ++it) {
    std::vector<double> xi = {u(rng)};
    Mat whole = eval_expr(inner, xi, 1);
    Mat a = eval_expr(res, xi, 1);
    Mat b = eval_expr(nonres, xi, 1);
    CHECK((a + b - whole).norm() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK((a(0, 0) == whole(0, 0) || a(0, 0) == Cplx(0.0, 0.0)));
  }
}

TEST_CASE("mask construction rejects a multi-frequency reference") {
  MatrixSymbol::Builder b(1, 1, 1.0);
  b.add(Freq::zero(1), jap(1.0));
  b.add(Freq::from_doubles({1.0}), jap(0.5));
  auto bad = std::make_shared<const MatrixSymbol>(b.build());
  ResonanceSpec spec = make_scalar_spec(0.0, 1.0);
  CHECK_THROWS_AS(
      resonance_mask(jap(1.0), bad, Freq::from_doubles({1.0}), spec, false),
      NotDiagonal);
}

}
