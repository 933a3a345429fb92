#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "gc/clifford.hpp"
#include "gc/errors.hpp"
#include "gc/norms.hpp"

using namespace gc;

namespace {

const Cplx kI(0.0, 1.0);

double rel_err(const Mat& got, const Mat& want) {
  double scale = std::max(1.0, want.norm());
  return (got - want).norm() / scale;
}

std::vector<double> sorted_real_eigs(const Mat& M) {
  Eigen::SelfAdjointEigenSolver<Mat> es(M);
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + M.rows());
  return ev;
}

Mat dense_eval(const MatrixSymbol& s, const Freq& t, const std::vector<double>& xi) {
  return s.eval(t, xi);
}

}  // namespace

TEST_SUITE("unit.clifford") {

TEST_CASE("generator relations hold exactly up to roundoff for d = 1..8") {
  for (int d = 1; d <= 8; ++d) {
    CAPTURE(d);
    CliffordRep rep = build_generators(d);
    int expectM = 1 << ((d + 1) / 2);
    CHECK(rep.m == expectM);
    REQUIRE(static_cast<int>(rep.h.size()) == d);
    Mat id = Mat::Identity(rep.m, rep.m);
    for (int j = 0; j < d; ++j) {
      CHECK(rel_err(Mat(rep.h[j].adjoint()), rep.h[j]) < 1e-13);
      for (int k = 0; k < d; ++k) {
        Mat anti = rep.h[j] * rep.h[k] + rep.h[k] * rep.h[j];
        CHECK(rel_err(anti, j == k ? Mat(2.0 * id) : Mat(Mat::Zero(rep.m, rep.m))) < 1e-13);
      }
      Mat swap = rep.Gamma * rep.h[j] + rep.h[j] * rep.Gamma;
      CHECK(swap.norm() < 1e-13);
    }
    CHECK(rel_err(Mat(rep.Gamma.adjoint()), rep.Gamma) < 1e-13);
    CHECK(rel_err(Mat(rep.Gamma * rep.Gamma), id) < 1e-13);
    // Sorted grading: +Id block then -Id block.
    for (int i = 0; i < rep.m; ++i)
      for (int j = 0; j < rep.m; ++j) {
        double want = i == j ? (i < rep.m / 2 ? 1.0 : -1.0) : 0.0;
        CHECK(std::abs(rep.Gamma(i, j) - want) < 1e-13);
      }
  }
  CHECK_THROWS_AS(build_generators(0), UnsupportedDimension);
  CHECK_THROWS_AS(build_generators(9), UnsupportedDimension);
}

TEST_CASE("free symbol has the two symmetric eigenvalue sheets") {
  CliffordRep rep3 = build_generators(3);
  MatrixSymbol a = free_dirac_symbol(rep3, 0.0);
  Mat v = dense_eval(a, Freq::zero(3), {1.0, 2.0, 2.0});
  auto ev = sorted_real_eigs(v);  // |xi| = 3
  CHECK(ev[0] == doctest::Approx(-3.0));
  CHECK(ev[1] == doctest::Approx(-3.0));
  CHECK(ev[2] == doctest::Approx(3.0));
  CHECK(ev[3] == doctest::Approx(3.0));

  CliffordRep rep2 = build_generators(2);
  MatrixSymbol am = free_dirac_symbol(rep2, 5.0);
  auto evm = sorted_real_eigs(dense_eval(am, Freq::zero(2), {0.0, 0.0}));
  CHECK(evm[0] == doctest::Approx(-5.0));
  CHECK(evm[1] == doctest::Approx(5.0));
  auto evm2 = sorted_real_eigs(dense_eval(am, Freq::zero(2), {3.0, 4.0}));
  CHECK(evm2[1] == doctest::Approx(std::sqrt(50.0)));
}

TEST_CASE("diagonalizing unitary is pointwise unitary and explicit at (1,0)") {
  CliffordRep rep = build_generators(2);
  MatrixSymbol u = diagonalizing_unitary(rep);
  Mat at10 = dense_eval(u, Freq::zero(2), {1.0, 0.0});
  Mat want(2, 2);
  want << 1, 1, -1, 1;
  want /= std::sqrt(2.0);
  CHECK(rel_err(at10, want) < 1e-14);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> s(-4.0, 4.0);
  Mat id = Mat::Identity(2, 2);
  for (int it = 0; it < 300; ++it) {
    std::vector<double> xi = {s(rng), s(rng)};
    Mat v = dense_eval(u, Freq::zero(2), xi);
    CHECK(rel_err(Mat(v * v.adjoint()), id) < 1e-13);
  }
  // Identity branch inside the unit ball.
  CHECK(rel_err(dense_eval(u, Freq::zero(2), {0.3, 0.1}), id) < 1e-15);
}

TEST_CASE("conjugation sends the free symbol to the sorted radial form") {
  for (int d : {2, 3}) {
    CAPTURE(d);
    CliffordRep rep = build_generators(d);
    for (double mass : {0.0, 2.0}) {
      CAPTURE(mass);
      DiracConjugation c = conjugate_dirac(rep, mass);
      std::mt19937_64 rng(19 + d);
      std::uniform_real_distribution<double> s(-5.0, 5.0);
      for (int it = 0; it < 120; ++it) {
        std::vector<double> xi(d);
        for (double& x : xi) x = s(rng);
        double r = 0;
        for (double x : xi) r += x * x;
        r = std::sqrt(r);
        Mat got = dense_eval(c.transformed, Freq::zero(d), xi);
        Mat res = dense_eval(c.residual, Freq::zero(d), xi);
        if (r >= 1.0) {
          // |xi| Gamma - mass P, built directly from the generators.
          Mat want = r * rep.Gamma;
          for (int j = 0; j < d; ++j) want -= mass * (xi[j] / r) * rep.h[j];
          CHECK(rel_err(got, want) < 1e-12);
          CHECK(res.norm() < 1e-12);
        } else {
          // Inside the ball nothing moved: residual carries the whole symbol.
          Mat want = mass * rep.Gamma;
          for (int j = 0; j < d; ++j) want += xi[j] * rep.h[j];
          CHECK(rel_err(got, want) < 1e-12);
          CHECK(rel_err(res, want) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("conjugated principal part at frozen points") {
  CliffordRep rep3 = build_generators(3);
  DiracConjugation c3 = conjugate_dirac(rep3, 0.0);
  Mat p = dense_eval(c3.principal, Freq::zero(3), {1.0, 1.0, 1.0});
  CHECK(rel_err(p, Mat(std::sqrt(3.0) * rep3.Gamma)) < 1e-13);

  CliffordRep rep2 = build_generators(2);
  DiracConjugation c2 = conjugate_dirac(rep2, 0.0);
  Mat q = dense_eval(c2.principal, Freq::zero(2), {3.0, 4.0});
  Mat want = Mat::Zero(2, 2);
  want(0, 0) = 5.0;
  want(1, 1) = -5.0;
  CHECK(rel_err(q, want) < 1e-13);
}

TEST_CASE("perturbation conjugation reconstructs and sorts by block structure") {
  CliffordRep rep = build_generators(2);
  int d = 2;
  double w = 2.0 * M_PI;

  // Quasi-periodic scalar components on the 2 pi lattice.
  MatrixSymbol::Builder bi(d, 1, 0.0);
  bi.add({w, 0.0}, scalar_const(0.5));
  bi.add({-w, 0.0}, scalar_const(0.5));
  MatrixSymbol bId = bi.build();
  MatrixSymbol::Builder bg(d, 1, 0.0);
  bg.add({0.0, w}, scalar_const(Cplx(0.0, 0.25)));
  bg.add({0.0, -w}, scalar_const(Cplx(0.0, -0.25)));
  MatrixSymbol bGamma = bg.build();
  MatrixSymbol::Builder b1(d, 1, 0.0);
  b1.add({w, w}, scalar_const(0.3));
  b1.add({-w, -w}, scalar_const(0.3));
  MatrixSymbol::Builder b2(d, 1, 0.0);
  b2.add({0.0, 0.0}, scalar_const(0.2));
  std::vector<MatrixSymbol> bVec = {b1.build(), b2.build()};

  PerturbationParts parts = decompose_perturbation(rep, bId, bGamma, bVec);

  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> s(-30.0, 30.0);
  EvalContext ctx;
  for (int it = 0; it < 80; ++it) {
    std::vector<double> xi = {s(rng), s(rng)};
    for (const auto& [t, e] : parts.conjugated.entries()) {
      Mat whole = parts.conjugated.eval(t, xi, &ctx);
      Mat back = parts.uncoupled.eval(t, xi, &ctx) + parts.odd.eval(t, xi, &ctx) +
                 parts.lowerOrder.eval(t, xi, &ctx) + parts.cutoffRemainder.eval(t, xi, &ctx);
      CHECK((whole - back).cwiseAbs().maxCoeff() < 1e-10);

      // Id/Gamma words are matrix-diagonal; h-words swap the Gamma blocks.
      Mat un = parts.uncoupled.eval(t, xi, &ctx);
      CHECK(std::abs(un(0, 1)) + std::abs(un(1, 0)) < 1e-12);
      Mat od = parts.odd.eval(t, xi, &ctx);
      CHECK((rep.Gamma * od * rep.Gamma + od).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  // The cutoff remainder lives where the unit-ball edge of u is felt; far
  // outside it vanishes on every frequency.
  double far = 1.0 + parts.conjugated.reach() + 0.5;
  for (const auto& [t, e] : parts.cutoffRemainder.entries()) {
    Mat v = parts.cutoffRemainder.eval(t, {far, far}, &ctx);
    CHECK(v.cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("frozen single-component conjugations") {
  CliffordRep rep = build_generators(2);
  int d = 2;
  MatrixSymbol one(MatrixSymbol::Builder(d, 1, 0.0)
                       .add(Freq::zero(d), scalar_const(1.0))
                       .build());
  MatrixSymbol zero(MatrixSymbol::Builder(d, 1, 0.0).build());

  // B = Id: conjugation is the identity; everything lands in uncoupled.
  PerturbationParts pid = decompose_perturbation(rep, one, zero, {zero, zero});
  Mat u1 = pid.uncoupled.eval(Freq::zero(d), {2.0, 0.0});
  CHECK(rel_err(u1, Mat::Identity(2, 2)) < 1e-13);
  CHECK(pid.odd.eval(Freq::zero(d), {2.0, 0.0}).norm() < 1e-13);
  CHECK(pid.lowerOrder.eval(Freq::zero(d), {2.0, 0.0}).norm() < 1e-13);

  // B = Gamma: outside the ball the conjugation flips it to -P.
  PerturbationParts pg = decompose_perturbation(rep, zero, one, {zero, zero});
  Mat og = pg.odd.eval(Freq::zero(d), {0.0, 3.0});
  CHECK(rel_err(og, Mat(-rep.h[1])) < 1e-13);
  CHECK(pg.uncoupled.eval(Freq::zero(d), {0.0, 3.0}).norm() < 1e-13);
  Mat cg = pg.conjugated.eval(Freq::zero(d), {0.0, 3.0});
  CHECK(rel_err(cg, Mat(-rep.h[1])) < 1e-13);

  // B = h_1 at xi = (2,0): the direction aligns with h_1, giving Gamma.
  PerturbationParts ph = decompose_perturbation(rep, zero, zero, {one, zero});
  Mat ch = ph.conjugated.eval(Freq::zero(d), {2.0, 0.0});
  CHECK(rel_err(ch, rep.Gamma) < 1e-13);
  Mat uh = ph.uncoupled.eval(Freq::zero(d), {2.0, 0.0});
  CHECK(rel_err(uh, rep.Gamma) < 1e-13);
  CHECK(ph.odd.eval(Freq::zero(d), {2.0, 0.0}).norm() < 1e-13);
}

TEST_CASE("lower-order bucket decays one order faster than the input") {
  CliffordRep rep = build_generators(2);
  int d = 2;
  double w = 2.0 * M_PI;
  MatrixSymbol::Builder bi(d, 1, 0.0);
  bi.add({w, 0.0}, scalar_const(1.0));
  bi.add({-w, 0.0}, scalar_const(1.0));
  MatrixSymbol bId = bi.build();
  MatrixSymbol zero(MatrixSymbol::Builder(d, 1, 0.0).build());
  PerturbationParts parts = decompose_perturbation(rep, bId, zero, {zero, zero});
  CHECK(parts.lowerOrder.order() == doctest::Approx(-1.0));

  // Sample the commutator entry along a ray; it should shrink like 1/r.
  auto t = Freq::from_doubles({w, 0.0});
  double near = parts.lowerOrder.eval(t, {10.0, 3.0}).cwiseAbs().maxCoeff();
  double farv = parts.lowerOrder.eval(t, {100.0, 30.0}).cwiseAbs().maxCoeff();
  CHECK(farv < 0.3 * near);
  CHECK(near > 0.0);
}

}
