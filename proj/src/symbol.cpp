#include "gc/symbol.hpp"

#include <cmath>

#include "gc/errors.hpp"
#include "gc/grids.hpp"

namespace gc {

namespace {

void check_same_shape(const MatrixSymbol& a, const MatrixSymbol& b) {
  if (a.d() != b.d())
    throw DimensionMismatch("symbols live on different base dimensions");
  if (a.m() != b.m())
    throw DimensionMismatch("symbols have different matrix dimensions");
}

}  // namespace

MatrixSymbol::Builder& MatrixSymbol::Builder::add(const Freq& theta, ExprPtr e) {
  if (theta.dim() != d_) throw DimensionMismatch("frequency dimension differs from symbol d");
  auto it = entries_.find(theta);
  if (it == entries_.end()) {
    entries_.emplace(theta, std::move(e));
  } else {
    it->second = sum({it->second, std::move(e)});
  }
  return *this;
}

MatrixSymbol::Builder& MatrixSymbol::Builder::add(const std::vector<double>& theta, ExprPtr e) {
  return add(Freq::from_doubles(theta), std::move(e));
}

MatrixSymbol MatrixSymbol::Builder::build() const {
  std::map<Freq, ExprPtr> es = entries_;
  // Frequency-set invariants: 0 present, closed under negation.
  Freq z = Freq::zero(d_);
  if (!es.count(z)) es.emplace(z, scalar_const(0.0));
  std::vector<Freq> missing;
  for (const auto& [t, e] : es)
    if (!es.count(-t)) missing.push_back(-t);
  for (const auto& t : missing) es.emplace(t, scalar_const(0.0));
  return MatrixSymbol(d_, m_, order_, std::move(es));
}

Mat MatrixSymbol::eval(const Freq& theta, const std::vector<double>& xi, EvalContext* ctx) const {
  if (static_cast<int>(xi.size()) != d_)
    throw DimensionMismatch("evaluation point dimension differs from symbol d");
  auto it = entries_.find(theta);
  if (it == entries_.end()) return Mat::Zero(m_, m_);
  return eval_expr(it->second, xi, m_, ctx);
}

double MatrixSymbol::reach() const {
  double r = 0;
  for (const auto& [t, e] : entries_) r = std::max(r, t.norm());
  return r;
}

MatrixSymbol MatrixSymbol::with_order(double order) const {
  MatrixSymbol s = *this;
  s.order_ = order;
  return s;
}

MatrixSymbol compose(const MatrixSymbol& a, const MatrixSymbol& b) {
  check_same_shape(a, b);
  std::map<Freq, std::vector<ExprPtr>> acc;
  for (const auto& [ta, ea] : a.entries()) {
    if (is_zero_const(ea)) continue;
    for (const auto& [tb, eb] : b.entries()) {
      if (is_zero_const(eb)) continue;
      acc[ta + tb].push_back(product({shift_expr(tb, ea), eb}));
    }
  }
  MatrixSymbol::Builder out(a.d(), a.m(), a.order() + b.order());
  for (auto& [t, terms] : acc) out.add(t, sum(std::move(terms)));
  return out.build();
}

MatrixSymbol adjoint(const MatrixSymbol& b) {
  MatrixSymbol::Builder out(b.d(), b.m(), b.order());
  for (const auto& [t, e] : b.entries()) {
    if (is_zero_const(e)) continue;
    out.add(-t, conj_transpose(shift_expr(-t, e)));
  }
  return out.build();
}

MatrixSymbol commutator_ad(const MatrixSymbol& a, const MatrixSymbol& b) {
  check_same_shape(a, b);
  const Cplx I(0.0, 1.0);
  std::map<Freq, std::vector<ExprPtr>> acc;
  for (const auto& [ta, ea] : a.entries()) {
    if (is_zero_const(ea)) continue;
    for (const auto& [tb, eb] : b.entries()) {
      if (is_zero_const(eb)) continue;
      acc[ta + tb].push_back(scale(I, product({shift_expr(tb, ea), eb})));
      acc[ta + tb].push_back(scale(-I, product({shift_expr(ta, eb), ea})));
    }
  }
  MatrixSymbol::Builder out(a.d(), a.m(), a.order() + b.order());
  for (auto& [t, terms] : acc) out.add(t, sum(std::move(terms)));
  return out.build();
}

MatrixSymbol ad_chain(const MatrixSymbol& a, const std::vector<const MatrixSymbol*>& bs) {
  MatrixSymbol cur = a;
  for (const auto* b : bs) cur = commutator_ad(cur, *b);
  return cur;
}

DiagonalSplit split_diagonal(const MatrixSymbol& b) {
  MatrixSymbol::Builder diag(b.d(), b.m(), b.order());
  MatrixSymbol::Builder off(b.d(), b.m(), b.order());
  Freq z = Freq::zero(b.d());
  for (const auto& [t, e] : b.entries()) {
    if (t == z) {
      diag.add(t, b.m() == 1 ? e : mat_diag(e));
      if (b.m() > 1) off.add(t, mat_offdiag(e));
    } else {
      off.add(t, e);
    }
  }
  return {diag.build(), off.build()};
}

UncoupledSplit split_uncoupled(const MatrixSymbol& b) {
  MatrixSymbol::Builder unc(b.d(), b.m(), b.order());
  MatrixSymbol::Builder cpl(b.d(), b.m(), b.order());
  for (const auto& [t, e] : b.entries()) {
    if (b.m() == 1) {
      unc.add(t, e);
    } else {
      unc.add(t, mat_diag(e));
      cpl.add(t, mat_offdiag(e));
    }
  }
  return {unc.build(), cpl.build()};
}

MatrixSymbol linear_combine(const std::vector<std::pair<Cplx, const MatrixSymbol*>>& terms,
                            double order) {
  if (terms.empty()) throw Error("Internal", "linear_combine needs at least one term");
  int d = terms[0].second->d(), m = terms[0].second->m();
  std::map<Freq, std::vector<ExprPtr>> acc;
  for (const auto& [c, s] : terms) {
    if (s->d() != d || s->m() != m)
      throw DimensionMismatch("linear combination across mismatched symbols");
    for (const auto& [t, e] : s->entries()) {
      if (is_zero_const(e)) continue;
      acc[t].push_back(scale(c, e));
    }
  }
  MatrixSymbol::Builder out(d, m, order);
  for (auto& [t, es] : acc) out.add(t, sum(std::move(es)));
  return out.build();
}

MatrixSymbol add(const MatrixSymbol& a, const MatrixSymbol& b) {
  return linear_combine({{1.0, &a}, {1.0, &b}}, std::max(a.order(), b.order()));
}

MatrixSymbol subtract(const MatrixSymbol& a, const MatrixSymbol& b) {
  return linear_combine({{1.0, &a}, {-1.0, &b}}, std::max(a.order(), b.order()));
}

MatrixSymbol scale_symbol(Cplx c, const MatrixSymbol& a) {
  return linear_combine({{c, &a}}, a.order());
}

MatrixSymbol times_const_matrix(const MatrixSymbol& scalarSym, const Mat& C) {
  if (scalarSym.m() != 1)
    throw DimensionMismatch("times_const_matrix expects a scalar symbol");
  if (C.rows() != C.cols()) throw DimensionMismatch("square matrix required");
  MatrixSymbol::Builder out(scalarSym.d(), static_cast<int>(C.rows()), scalarSym.order());
  ExprPtr cm = const_matrix(C);
  for (const auto& [t, e] : scalarSym.entries()) {
    if (is_zero_const(e)) continue;
    out.add(t, product({cm, promote_scalar(e)}));
  }
  return out.build();
}

double symmetry_defect(const MatrixSymbol& b, int nProbes, double radius) {
  MatrixSymbol adj = adjoint(b);
  auto dirs = unit_directions(b.d(), std::max(4, nProbes / 8));
  auto radii = log_radii(0.25, radius, 8);
  double worst = 0;
  EvalContext ctx;
  for (const auto& [t, e] : b.entries()) {
    for (const auto& u : dirs) {
      for (double r : radii) {
        std::vector<double> xi(u);
        for (double& v : xi) v *= r;
        Mat diff = b.eval(t, xi, &ctx) - adj.eval(t, xi, &ctx);
        worst = std::max(worst, diff.cwiseAbs().maxCoeff());
      }
    }
  }
  return worst;
}

}  // namespace gc
