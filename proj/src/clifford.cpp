#include "gc/clifford.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "gc/errors.hpp"

namespace gc {

namespace {

const Cplx kI(0.0, 1.0);

Mat pauli(int j) {
  Mat s(2, 2);
  switch (j) {
    case 1: s << 0, 1, 1, 0; break;
    case 2: s << 0, -kI, kI, 0; break;
    default: s << 1, 0, 0, -1; break;
  }
  return s;
}

Mat kron(const Mat& A, const Mat& B) {
  Mat K(A.rows() * B.rows(), A.cols() * B.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

// Even dimensions only: d = 2 base, then two new generators per step.
CliffordRep build_even(int d) {
  if (d == 2) {
    CliffordRep r;
    r.d = 2;
    r.m = 2;
    r.h = {pauli(1), pauli(2)};
    r.Gamma = pauli(3);
    return r;
  }
  CliffordRep prev = build_even(d - 2);
  CliffordRep r;
  r.d = d;
  r.m = 2 * prev.m;
  Mat idPrev = Mat::Identity(prev.m, prev.m);
  for (const auto& hj : prev.h) r.h.push_back(kron(hj, pauli(3)));
  r.h.push_back(kron(idPrev, pauli(1)));
  r.h.push_back(kron(idPrev, pauli(2)));
  r.Gamma = kron(prev.Gamma, pauli(3));
  return r;
}

// Permutation that lists the +1 eigenpositions of a diagonal grading first.
void sort_grading(CliffordRep& r) {
  std::vector<int> perm;
  for (int i = 0; i < r.m; ++i)
    if (r.Gamma(i, i).real() > 0) perm.push_back(i);
  for (int i = 0; i < r.m; ++i)
    if (r.Gamma(i, i).real() < 0) perm.push_back(i);
  Mat U = Mat::Zero(r.m, r.m);
  for (int c = 0; c < r.m; ++c) U(perm[c], c) = 1.0;
  for (auto& hj : r.h) hj = Mat(U.adjoint() * hj * U);
  r.Gamma = Mat(U.adjoint() * r.Gamma * U);
}

}  // namespace

CliffordRep build_generators(int d) {
  if (d < 1 || d > 8)
    throw UnsupportedDimension("Clifford generators are built for 1 <= d <= 8, got d = " +
                               std::to_string(d));
  CliffordRep r;
  if (d == 3) {
    // Explicit 4x4 form with the grading already sorted.
    r.d = 3;
    r.m = 4;
    Mat z2 = Mat::Zero(2, 2);
    for (int j = 1; j <= 3; ++j) {
      Mat hj(4, 4);
      hj << z2, pauli(j), pauli(j), z2;
      r.h.push_back(hj);
    }
    r.Gamma = Mat::Zero(4, 4);
    r.Gamma.diagonal() << 1, 1, -1, -1;
    return r;
  }
  if (d % 2 == 0) {
    r = build_even(d);
  } else {
    // Odd d: one generator of the (d+1)-dimensional representation becomes
    // the grading. It is Id (x) sigma_2 by construction, so the exact
    // eigenbasis of sigma_2 diagonalizes it.
    CliffordRep big = build_even(d + 1);
    r.d = d;
    r.m = big.m;
    r.Gamma = big.h.back();
    big.h.pop_back();
    r.h = std::move(big.h);
    Mat W(2, 2);
    W << 1, 1, kI, -kI;
    W /= std::sqrt(2.0);
    Mat U = kron(Mat::Identity(r.m / 2, r.m / 2), W);
    for (auto& hj : r.h) hj = Mat(U.adjoint() * hj * U);
    r.Gamma = Mat(U.adjoint() * r.Gamma * U);
  }
  sort_grading(r);
  return r;
}

MatrixSymbol free_dirac_symbol(const CliffordRep& rep, double mass) {
  std::vector<ExprPtr> terms;
  for (int j = 0; j < rep.d; ++j)
    terms.push_back(product({const_matrix(rep.h[j]), coord(j + 1)}));
  if (mass != 0.0) terms.push_back(scale(mass, const_matrix(rep.Gamma)));
  MatrixSymbol::Builder b(rep.d, rep.m, 1.0);
  b.add(Freq::zero(rep.d), sum(std::move(terms)));
  return b.build();
}

namespace {

// P(xi) = sum_j (xi_j / |xi|) h_j, meaningful away from the origin.
ExprPtr direction_projector(const CliffordRep& rep) {
  std::vector<ExprPtr> terms;
  for (int j = 0; j < rep.d; ++j)
    terms.push_back(product({const_matrix(rep.h[j]), coord(j + 1), hom(-1.0)}));
  return sum(std::move(terms));
}

// Masked direction component xi_k / |xi| on |xi| >= 1, as a scalar symbol.
MatrixSymbol direction_symbol(const CliffordRep& rep, int k) {
  MatrixSymbol::Builder b(rep.d, 1, 0.0);
  b.add(Freq::zero(rep.d), product({ind_ge(1.0), coord(k + 1), hom(-1.0)}));
  return b.build();
}

}  // namespace

MatrixSymbol diagonalizing_unitary(const CliffordRep& rep) {
  ExprPtr outside = product(
      {ind_ge(1.0),
       scale(1.0 / std::sqrt(2.0),
             sum({scalar_const(1.0),
                  product({const_matrix(rep.Gamma), direction_projector(rep)})}))});
  ExprPtr inside = product({ind_lt(1.0), scalar_const(1.0)});
  MatrixSymbol::Builder b(rep.d, rep.m, 0.0);
  b.add(Freq::zero(rep.d), sum({std::move(inside), std::move(outside)}));
  return b.build();
}

DiracConjugation conjugate_dirac(const CliffordRep& rep, double mass) {
  MatrixSymbol u = diagonalizing_unitary(rep);
  MatrixSymbol a = free_dirac_symbol(rep, mass);
  MatrixSymbol transformed = compose(compose(u, a), adjoint(u)).with_order(1.0);

  std::vector<ExprPtr> terms;
  terms.push_back(product({const_matrix(rep.Gamma), hom(1.0)}));
  if (mass != 0.0) terms.push_back(scale(-mass, direction_projector(rep)));
  ExprPtr principalExpr = product({ind_ge(1.0), sum(std::move(terms))});
  MatrixSymbol::Builder pb(rep.d, rep.m, 1.0);
  pb.add(Freq::zero(rep.d), std::move(principalExpr));
  MatrixSymbol principal = pb.build();

  MatrixSymbol residual = subtract(transformed, principal).with_order(0.0);
  return {std::move(transformed), std::move(principal), std::move(residual)};
}

namespace {

MatrixSymbol compose3(const MatrixSymbol& a, const MatrixSymbol& b, const MatrixSymbol& c) {
  return compose(a, compose(b, c));
}

}  // namespace

PerturbationParts decompose_perturbation(const CliffordRep& rep, const MatrixSymbol& bId,
                                         const MatrixSymbol& bGamma,
                                         const std::vector<MatrixSymbol>& bVec) {
  const int d = rep.d;
  if (static_cast<int>(bVec.size()) != d)
    throw DimensionMismatch("expected one vector component per generator");
  for (const MatrixSymbol* s : {&bId, &bGamma})
    if (s->m() != 1 || s->d() != d)
      throw DimensionMismatch("perturbation components must be scalar symbols on R^d");
  for (const auto& s : bVec)
    if (s.m() != 1 || s.d() != d)
      throw DimensionMismatch("perturbation components must be scalar symbols on R^d");

  double beta = std::max(bId.order(), bGamma.order());
  for (const auto& s : bVec) beta = std::max(beta, s.order());
  std::vector<MatrixSymbol> V;
  for (int k = 0; k < d; ++k) V.push_back(direction_symbol(rep, k));

  const Mat Id = Mat::Identity(rep.m, rep.m);
  const Mat& G = rep.Gamma;

  // Accumulate lifted terms bucket by bucket; each entry is a scalar symbol
  // times a constant Clifford word.
  std::vector<MatrixSymbol> unc, odd, low;

  auto lift = [&](std::vector<MatrixSymbol>& bucket, Cplx c, const MatrixSymbol& s,
                  const Mat& word) {
    bucket.push_back(scale_symbol(c, times_const_matrix(s, word)));
  };

  // Id and Gamma components.
  lift(unc, 0.5, bId, Id);
  lift(unc, 0.5, bGamma, G);
  for (int k = 0; k < d; ++k) {
    lift(unc, 0.5, compose3(V[k], bId, V[k]), Id);
    lift(unc, -0.5, compose3(V[k], bGamma, V[k]), G);
    lift(unc, 0.5, compose(bVec[k], V[k]), G);
    lift(unc, 0.5, compose(V[k], bVec[k]), G);
  }

  for (int j = 0; j < d; ++j) {
    lift(odd, 0.5, bVec[j], rep.h[j]);
    lift(odd, -0.5, compose3(V[j], bVec[j], V[j]), rep.h[j]);
    for (int k = 0; k < d; ++k) {
      if (k == j) continue;
      lift(odd, 0.5, compose3(V[k], bVec[j], V[k]), rep.h[j]);
      lift(odd, -0.5, compose3(V[j], bVec[j], V[k]), rep.h[k]);
      lift(odd, -0.5, compose3(V[k], bVec[j], V[j]), rep.h[k]);
    }
  }
  for (int k = 0; k < d; ++k) {
    lift(odd, -0.5, compose(bGamma, V[k]), rep.h[k]);
    lift(odd, -0.5, compose(V[k], bGamma), rep.h[k]);
  }

  // Commutator-type terms: the pointwise parts cancel pairwise, leaving one
  // order less than B.
  for (int k = 0; k < d; ++k) {
    lift(low, 0.5, subtract(compose(V[k], bId), compose(bId, V[k])), Mat(G * rep.h[k]));
    for (int j = 0; j < d; ++j) {
      if (j == k) continue;
      lift(low, 0.5, subtract(compose(bVec[j], V[k]), compose(V[k], bVec[j])),
           Mat(rep.h[j] * rep.h[k] * G));
    }
    for (int l = k + 1; l < d; ++l) {
      MatrixSymbol antiId =
          subtract(compose3(V[k], bId, V[l]), compose3(V[l], bId, V[k]));
      lift(low, 0.5, antiId, Mat(rep.h[k] * rep.h[l]));
      MatrixSymbol antiG =
          subtract(compose3(V[k], bGamma, V[l]), compose3(V[l], bGamma, V[k]));
      lift(low, -0.5, antiG, Mat(rep.h[k] * rep.h[l] * G));
      for (int j = 0; j < d; ++j) {
        if (j == k || j == l) continue;
        MatrixSymbol antiV =
            subtract(compose3(V[k], bVec[j], V[l]), compose3(V[l], bVec[j], V[k]));
        lift(low, -0.5, antiV, Mat(rep.h[k] * rep.h[j] * rep.h[l]));
      }
    }
  }

  auto combine = [&](const std::vector<MatrixSymbol>& parts, double order) {
    std::vector<std::pair<Cplx, const MatrixSymbol*>> terms;
    for (const auto& p : parts) terms.push_back({Cplx(1.0, 0.0), &p});
    return linear_combine(terms, order);
  };

  PerturbationParts out{combine(unc, beta), combine(odd, beta), combine(low, beta - 1.0),
                        MatrixSymbol::Builder(d, rep.m, beta).build(),
                        MatrixSymbol::Builder(d, rep.m, beta).build()};

  // Full conjugation, then the remainder that the three buckets miss. It
  // carries the unit-ball cutoff effects and reconstructs the identity
  //   conjugated = uncoupled + odd + lowerOrder + cutoffRemainder.
  MatrixSymbol bFull = times_const_matrix(bId, Id);
  bFull = add(bFull, times_const_matrix(bGamma, G));
  for (int j = 0; j < d; ++j) bFull = add(bFull, times_const_matrix(bVec[j], rep.h[j]));
  MatrixSymbol u = diagonalizing_unitary(rep);
  out.conjugated = compose3(u, bFull, adjoint(u)).with_order(beta);
  MatrixSymbol partsSum = add(add(out.uncoupled, out.odd), out.lowerOrder);
  out.cutoffRemainder = subtract(out.conjugated, partsSum).with_order(beta);
  return out;
}

}  // namespace gc
