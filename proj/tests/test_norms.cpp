#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "gc/norms.hpp"
#include "gc/symbol.hpp"

using namespace gc;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

MatrixSymbol single_entry(int d, double order, const std::vector<double>& theta, ExprPtr e) {
  MatrixSymbol::Builder b(d, 1, order);
  b.add(theta, std::move(e));
  return b.build();
}

}  // namespace

TEST_SUITE("unit.norms") {

TEST_CASE("closed-form sups of power profiles") {
  NormGrid g = default_norm_grid();
  // Constant against decaying weight: sup at the origin.
  auto s = weighted_sup(scalar_const(2.0), 1.0, 2, 1, g);
  CHECK(s.exact);
  CHECK(s.value == doctest::Approx(2.0));
  // Growth faster than the weight: infinite.
  auto inf1 = weighted_sup(jap(2.0), 1.0, 2, 1, g);
  CHECK(inf1.exact);
  CHECK(inf1.value == kInf);
  // Matched growth: sup is the limit 1 at infinity.
  auto one = weighted_sup(jap(1.0), 1.0, 2, 1, g);
  CHECK(one.exact);
  CHECK(one.value == doctest::Approx(1.0));
  // Truncated growth: sup at the outer edge of the annulus, <2+1> = 3.
  auto edge = weighted_sup(product({ind_lt(2.0), jap(2.0)}), 1.0, 2, 1, g);
  CHECK(edge.exact);
  CHECK(edge.value == doctest::Approx(3.0));
  // Masked inverse power against a growing weight: sup at the mask edge.
  auto inv = weighted_sup(product({ind_ge(1.0), hom(-1.0)}), -1.0, 2, 1, g);
  CHECK(inv.exact);
  CHECK(inv.value == doctest::Approx(2.0));
  // Unmasked inverse power: genuinely unbounded near the origin.
  auto inf2 = weighted_sup(hom(-1.0), 0.0, 2, 1, g);
  CHECK(inf2.exact);
  CHECK(inf2.value == kInf);
  // Interior critical point: r (1+r)^{-2} peaks at r = 1 with value 1/4.
  auto crit = weighted_sup(hom(1.0), 2.0, 2, 1, g);
  CHECK(crit.exact);
  CHECK(crit.value == doctest::Approx(0.25));
}

TEST_CASE("matrix factors contribute their operator norm") {
  NormGrid g = default_norm_grid();
  Mat M = Mat::Zero(2, 2);
  M(0, 1) = Cplx(3.0, 0.0);
  auto s = weighted_sup(product({const_matrix(M), jap(1.0)}), 1.0, 1, 2, g);
  CHECK(s.exact);
  CHECK(s.value == doctest::Approx(3.0));
  // Constant matrix products fold before the norm is taken, so cancellation
  // is seen exactly.
  Mat A(2, 2), B(2, 2);
  A << 0, 1, 0, 0;
  B << 0, 1, 0, 0;
  auto z = weighted_sup(product({const_matrix(A), const_matrix(B)}), 0.0, 1, 2, g);
  CHECK(z.exact);
  CHECK(z.value == doctest::Approx(0.0));
}

TEST_CASE("structure nodes stay in closed form") {
  NormGrid g = default_norm_grid();
  Mat M(2, 2);
  M << 5.0, 7.0, 7.0, -5.0;
  auto dg = weighted_sup(mat_diag(const_matrix(M)), 0.0, 1, 2, g);
  CHECK(dg.exact);
  CHECK(dg.value == doctest::Approx(5.0));
  auto od = weighted_sup(mat_offdiag(const_matrix(M)), 0.0, 1, 2, g);
  CHECK(od.exact);
  CHECK(od.value == doctest::Approx(7.0));
  // Off-diagonal part of a scalar profile vanishes identically.
  auto z = weighted_sup(mat_offdiag(jap(3.0)), 0.0, 1, 2, g);
  CHECK(z.exact);
  CHECK(z.value == doctest::Approx(0.0));
}

TEST_CASE("sampled fallback reports its grid and approaches the true sup") {
  NormGrid g = default_norm_grid();
  // |xi_1| / <xi> is not a radial power profile; its sup over R^2 is 1.
  auto s = weighted_sup(product({coord(1), jap(-1.0)}), 0.0, 2, 1, g);
  CHECK_FALSE(s.exact);
  CHECK(s.value <= 1.0 + 1e-12);
  CHECK(s.value > 0.95);
}

TEST_CASE("symbol norm sums frequency weights against entry sups") {
  // Entries: 2 at frequency 0, <xi> at (1,0) and (-1,0).
  MatrixSymbol::Builder b(2, 1, 1.0);
  b.add({0.0, 0.0}, scalar_const(2.0));
  b.add({1.0, 0.0}, jap(1.0));
  b.add({-1.0, 0.0}, jap(1.0));
  MatrixSymbol s = b.build();
  auto n0 = symbol_norm(s, 0.0, 1.0);
  CHECK(n0.exact);
  CHECK(n0.grid.empty());
  CHECK(n0.value == doctest::Approx(4.0));  // 2 + 1 + 1

  MatrixSymbol::Builder b2(2, 1, 0.0);
  b2.add({0.0, 0.0}, scalar_const(2.0));
  b2.add({1.0, 0.0}, scalar_const(1.5));
  b2.add({-1.0, 0.0}, scalar_const(1.5));
  auto n1 = symbol_norm(b2.build(), 1.0, 0.0);
  CHECK(n1.exact);
  CHECK(n1.value == doctest::Approx(8.0));  // 2 + 2*1.5 + 2*1.5
}

TEST_CASE("norm monotonicity in the weight exponent") {
  MatrixSymbol s = single_entry(2, 1.0, {1.0, 1.0}, jap(1.0));
  // Larger gamma shrinks the weighted sup.
  double hi = symbol_norm(s, 0.0, 1.0).value;
  double lo = symbol_norm(s, 0.0, 2.0).value;
  CHECK(lo <= hi);
}

TEST_CASE("product norm bound") {
  // [[a o b]]_l^{(alpha+beta)} <= [[a]]_l^{(alpha)} [[b]]_{l+|alpha|}^{(beta)}.
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> coef(0.25, 2.0);
  for (int rep = 0; rep < 6; ++rep) {
    double alpha = 1.0, beta = rep % 2 == 0 ? 1.0 : 0.0;
    MatrixSymbol::Builder ba(2, 1, alpha);
    ba.add({0.0, 0.0}, scale(coef(rng), jap(alpha)));
    ba.add({1.0, 0.0}, scale(coef(rng), jap(alpha)));
    ba.add({-1.0, 0.0}, scale(coef(rng), jap(alpha)));
    MatrixSymbol a = ba.build();
    MatrixSymbol::Builder bb(2, 1, beta);
    bb.add({0.0, 1.0}, scale(coef(rng), jap(beta)));
    bb.add({0.0, -1.0}, scale(coef(rng), jap(beta)));
    MatrixSymbol b = bb.build();
    for (double l : {0.0, 1.0, 2.0}) {
      double lhs = symbol_norm(compose(a, b), l, alpha + beta).value;
      double rhs = symbol_norm(a, l, alpha).value *
                   symbol_norm(b, l + std::abs(alpha), beta).value;
      CHECK(lhs <= rhs * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("annulus restriction clamps the evaluation domain") {
  auto e = restrict_annulus(jap(1.0), 1.0, 4.0);
  CHECK(eval_expr(e, {0.5, 0.0}, 1)(0, 0) == Cplx(0.0, 0.0));
  CHECK(eval_expr(e, {4.0, 0.0}, 1)(0, 0) == Cplx(0.0, 0.0));
  CHECK(std::abs(eval_expr(e, {2.0, 0.0}, 1)(0, 0) - Cplx(3.0, 0.0)) < 1e-15);
  NormGrid g = default_norm_grid();
  auto s = weighted_sup(e, 0.0, 2, 1, g);
  CHECK(s.exact);
  CHECK(s.value == doctest::Approx(5.0));  // sup of <xi> on [1,4)
}

}
