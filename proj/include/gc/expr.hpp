#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <unordered_map>
#include <vector>

#include "gc/freq.hpp"
#include "gc/resonance.hpp"
#include "gc/types.hpp"

namespace gc {

class MatrixSymbol;

// Coefficient expressions form an immutable DAG. A node evaluates to an m x m
// matrix at a point xi; scalar atoms act as multiples of the identity, so the
// same tree can be evaluated at any ambient dimension m. Matrix factors in a
// product keep their order; scalar factors commute through them.
enum class NodeKind {
  ScalarConst,    // c * Id
  ConstMatrix,    // fixed m x m matrix
  Jap,            // <xi>^g = (1+|xi|)^g
  Hom,            // |xi|^g, 0 at xi = 0 for g > 0; g < 0 only under an indicator
  Coord,          // xi_j (1-based axis)
  IndGE,          // 1_{|xi| >= r}
  IndLT,          // 1_{|xi| < r}
  Sum,
  Product,
  Shift,          // inner evaluated at xi + theta
  Scale,          // c * inner
  ConjTranspose,  // inner(xi)^H
  MatDiag,        // matrix-diagonal part of inner(xi)
  MatOffDiag,     // inner(xi) minus its matrix-diagonal
  ResonanceMask,  // entrywise inner(xi)_{jk} * chi_theta(xi)(j,k), or * (1-chi)
  MaskedQuotient, // entrywise num_{jk}(xi) * chi / (aD_j(theta+xi) - aD_k(xi))
};

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  NodeKind kind;
  Cplx c{0.0, 0.0};
  Mat M;
  double x = 0.0;  // exponent or indicator radius
  int axis = 1;
  std::vector<ExprPtr> kids;
  Freq shift;
  std::shared_ptr<const MatrixSymbol> aD;
  ResonanceSpec spec;
  bool complement = false;
};

// Factory helpers. They perform light normalization only (flattening nested
// sums/products, collapsing zero shifts and stacked scales); no constant
// folding, so printed forms stay close to what was built.
ExprPtr scalar_const(Cplx c);
ExprPtr const_matrix(const Mat& M);
ExprPtr jap(double g);
ExprPtr hom(double g);
ExprPtr coord(int axis);
ExprPtr ind_ge(double r);
ExprPtr ind_lt(double r);
ExprPtr sum(std::vector<ExprPtr> kids);
ExprPtr product(std::vector<ExprPtr> kids);
ExprPtr shift_expr(const Freq& theta, ExprPtr inner);
ExprPtr scale(Cplx c, ExprPtr inner);
ExprPtr conj_transpose(ExprPtr inner);
ExprPtr mat_diag(ExprPtr inner);
ExprPtr mat_offdiag(ExprPtr inner);
ExprPtr resonance_mask(ExprPtr inner, std::shared_ptr<const MatrixSymbol> aD,
                       const Freq& theta, const ResonanceSpec& spec, bool complement);
ExprPtr masked_quotient(ExprPtr numerator, std::shared_ptr<const MatrixSymbol> aD,
                        const Freq& theta, const ResonanceSpec& spec);

bool is_zero_const(const ExprPtr& e);

// Structural equality (same shape, same constants). Used by round-trip tests.
bool equal_expr(const ExprPtr& a, const ExprPtr& b);

// Memoizes node evaluations keyed by (node, quantized point). One context per
// logical sweep; sharing it across many evaluations of the same symbol at
// related points is what keeps iterated-commutator DAGs cheap.
class EvalContext {
 public:
  Mat* find(const ExprNode* n, const Freq& at);
  void store(const ExprNode* n, const Freq& at, Mat value);
  std::size_t size() const { return memo_.size(); }

 private:
  struct Key {
    const ExprNode* node;
    Freq at;
    bool operator==(const Key& o) const { return node == o.node && at == o.at; }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return std::hash<const void*>()(k.node) * 0x9e3779b97f4a7c15ull ^ FreqHash()(k.at);
    }
  };
  std::unordered_map<Key, Mat, KeyHash> memo_;
};

// Evaluate at xi with ambient dimension m. ctx may be null.
Mat eval_expr(const ExprPtr& e, const std::vector<double>& xi, int m,
              EvalContext* ctx = nullptr);

// Replace 1x1 constant matrices by scalar constants so a tree built for m = 1
// evaluates at any ambient dimension.
ExprPtr promote_scalar(const ExprPtr& e);

}  // namespace gc
