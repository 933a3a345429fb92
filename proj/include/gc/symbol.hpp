#pragma once

#include <map>
#include <vector>

#include "gc/expr.hpp"
#include "gc/freq.hpp"

namespace gc {

// A matrix-valued quasi-periodic symbol: a finite frequency set Theta and one
// coefficient expression per frequency. The set always contains 0 and is
// closed under negation (missing partners are filled with zero entries), and
// the object is immutable after construction. declaredOrder is bookkeeping
// used by norm inequalities; it is never inferred from the entries.
class MatrixSymbol {
 public:
  class Builder {
   public:
    Builder(int d, int m, double order) : d_(d), m_(m), order_(order) {}
    Builder& add(const Freq& theta, ExprPtr e);
    Builder& add(const std::vector<double>& theta, ExprPtr e);
    MatrixSymbol build() const;

   private:
    int d_, m_;
    double order_;
    std::map<Freq, ExprPtr> entries_;
  };

  int d() const { return d_; }
  int m() const { return m_; }
  double order() const { return order_; }
  const std::map<Freq, ExprPtr>& entries() const { return entries_; }
  bool has(const Freq& theta) const { return entries_.count(theta) != 0; }

  // Coefficient value b_theta(xi); zero matrix off the frequency set.
  Mat eval(const Freq& theta, const std::vector<double>& xi, EvalContext* ctx = nullptr) const;

  // Largest |theta| over the frequency set.
  double reach() const;

  MatrixSymbol with_order(double order) const;

 private:
  MatrixSymbol(int d, int m, double order, std::map<Freq, ExprPtr> entries)
      : d_(d), m_(m), order_(order), entries_(std::move(entries)) {}
  int d_, m_;
  double order_;
  std::map<Freq, ExprPtr> entries_;
};

// (a o b)_theta(xi) = sum over theta_a + theta_b = theta of
// a_{theta_a}(theta_b + xi) * b_{theta_b}(xi). Order adds.
MatrixSymbol compose(const MatrixSymbol& a, const MatrixSymbol& b);

// Adjoint symbol: entry at theta is (b_{-theta}(xi + theta))^H. An involution;
// b is symmetric iff adjoint(b) equals b pointwise.
MatrixSymbol adjoint(const MatrixSymbol& b);

// ad(a, b) = i (a o b - b o a).
MatrixSymbol commutator_ad(const MatrixSymbol& a, const MatrixSymbol& b);

// ad(a; b_1, ..., b_k) folded left to right.
MatrixSymbol ad_chain(const MatrixSymbol& a, const std::vector<const MatrixSymbol*>& bs);

struct DiagonalSplit {
  MatrixSymbol diagonal;     // zero frequency, matrix-diagonal part
  MatrixSymbol offDiagonal;  // everything else
};
DiagonalSplit split_diagonal(const MatrixSymbol& b);

struct UncoupledSplit {
  MatrixSymbol uncoupled;  // matrix-diagonal entries at every frequency
  MatrixSymbol coupled;
};
UncoupledSplit split_uncoupled(const MatrixSymbol& b);

// sum_i c_i * s_i with an explicit declared order for the result.
MatrixSymbol linear_combine(const std::vector<std::pair<Cplx, const MatrixSymbol*>>& terms,
                            double order);

// Convenience forms.
MatrixSymbol add(const MatrixSymbol& a, const MatrixSymbol& b);
MatrixSymbol subtract(const MatrixSymbol& a, const MatrixSymbol& b);
MatrixSymbol scale_symbol(Cplx c, const MatrixSymbol& a);

// Lift a 1x1 symbol to ambient dimension m and multiply by a constant matrix:
// entries become C * promote(e). Scalar entries commute with C, so this is
// also e * C.
MatrixSymbol times_const_matrix(const MatrixSymbol& scalarSym, const Mat& C);

// Pointwise max-over-probes of |adjoint(b) - b|; 0 for symmetric symbols.
double symmetry_defect(const MatrixSymbol& b, int nProbes, double radius);

}  // namespace gc
