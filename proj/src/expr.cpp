#include "gc/expr.hpp"

#include <cmath>

#include "gc/errors.hpp"
#include "gc/symbol.hpp"

namespace gc {

namespace {

ExprPtr make(ExprNode n) { return std::make_shared<const ExprNode>(std::move(n)); }

double vec_norm(const std::vector<double>& xi) {
  double s = 0;
  for (double v : xi) s += v * v;
  return std::sqrt(s);
}

}  // namespace

ExprPtr scalar_const(Cplx c) {
  ExprNode n;
  n.kind = NodeKind::ScalarConst;
  n.c = c;
  return make(std::move(n));
}

ExprPtr const_matrix(const Mat& M) {
  ExprNode n;
  n.kind = NodeKind::ConstMatrix;
  n.M = M;
  return make(std::move(n));
}

ExprPtr jap(double g) {
  ExprNode n;
  n.kind = NodeKind::Jap;
  n.x = g;
  return make(std::move(n));
}

ExprPtr hom(double g) {
  ExprNode n;
  n.kind = NodeKind::Hom;
  n.x = g;
  return make(std::move(n));
}

ExprPtr coord(int axis) {
  ExprNode n;
  n.kind = NodeKind::Coord;
  n.axis = axis;
  return make(std::move(n));
}

ExprPtr ind_ge(double r) {
  ExprNode n;
  n.kind = NodeKind::IndGE;
  n.x = r;
  return make(std::move(n));
}

ExprPtr ind_lt(double r) {
  ExprNode n;
  n.kind = NodeKind::IndLT;
  n.x = r;
  return make(std::move(n));
}

bool is_zero_const(const ExprPtr& e) {
  return e->kind == NodeKind::ScalarConst && e->c == Cplx(0.0, 0.0);
}

ExprPtr sum(std::vector<ExprPtr> kids) {
  std::vector<ExprPtr> flat;
  for (auto& k : kids) {
    if (is_zero_const(k)) continue;
    if (k->kind == NodeKind::Sum) {
      flat.insert(flat.end(), k->kids.begin(), k->kids.end());
    } else {
      flat.push_back(std::move(k));
    }
  }
  if (flat.empty()) return scalar_const(0.0);
  if (flat.size() == 1) return flat[0];
  ExprNode n;
  n.kind = NodeKind::Sum;
  n.kids = std::move(flat);
  return make(std::move(n));
}

ExprPtr product(std::vector<ExprPtr> kids) {
  std::vector<ExprPtr> flat;
  for (auto& k : kids) {
    if (is_zero_const(k)) return scalar_const(0.0);
    if (k->kind == NodeKind::Product) {
      flat.insert(flat.end(), k->kids.begin(), k->kids.end());
    } else {
      flat.push_back(std::move(k));
    }
  }
  if (flat.empty()) return scalar_const(1.0);
  if (flat.size() == 1) return flat[0];
  ExprNode n;
  n.kind = NodeKind::Product;
  n.kids = std::move(flat);
  return make(std::move(n));
}

ExprPtr shift_expr(const Freq& theta, ExprPtr inner) {
  if (theta.is_zero()) return inner;
  if (inner->kind == NodeKind::ScalarConst || inner->kind == NodeKind::ConstMatrix)
    return inner;
  if (inner->kind == NodeKind::Shift)
    return shift_expr(theta + inner->shift, inner->kids[0]);
  ExprNode n;
  n.kind = NodeKind::Shift;
  n.shift = theta;
  n.kids = {std::move(inner)};
  return make(std::move(n));
}

ExprPtr scale(Cplx c, ExprPtr inner) {
  if (c == Cplx(0.0, 0.0)) return scalar_const(0.0);
  if (c == Cplx(1.0, 0.0)) return inner;
  if (inner->kind == NodeKind::ScalarConst) return scalar_const(c * inner->c);
  if (inner->kind == NodeKind::Scale) return scale(c * inner->c, inner->kids[0]);
  ExprNode n;
  n.kind = NodeKind::Scale;
  n.c = c;
  n.kids = {std::move(inner)};
  return make(std::move(n));
}

ExprPtr conj_transpose(ExprPtr inner) {
  ExprNode n;
  n.kind = NodeKind::ConjTranspose;
  n.kids = {std::move(inner)};
  return make(std::move(n));
}

ExprPtr mat_diag(ExprPtr inner) {
  ExprNode n;
  n.kind = NodeKind::MatDiag;
  n.kids = {std::move(inner)};
  return make(std::move(n));
}

ExprPtr mat_offdiag(ExprPtr inner) {
  ExprNode n;
  n.kind = NodeKind::MatOffDiag;
  n.kids = {std::move(inner)};
  return make(std::move(n));
}

namespace {

// The per-point evaluation trusts aD to be a pure frequency-zero symbol, so
// reject anything else once, at node construction.
void require_single_frequency(const MatrixSymbol& aD) {
  for (const auto& [t, e] : aD.entries())
    if (!t.is_zero() && !is_zero_const(e))
      throw NotDiagonal("diagonal reference symbol has a non-zero entry at frequency " +
                        t.to_string());
}

}  // namespace

ExprPtr resonance_mask(ExprPtr inner, std::shared_ptr<const MatrixSymbol> aD,
                       const Freq& theta, const ResonanceSpec& spec, bool complement) {
  require_single_frequency(*aD);
  ExprNode n;
  n.kind = NodeKind::ResonanceMask;
  n.kids = {std::move(inner)};
  n.aD = std::move(aD);
  n.shift = theta;
  n.spec = spec;
  n.complement = complement;
  return make(std::move(n));
}

ExprPtr masked_quotient(ExprPtr numerator, std::shared_ptr<const MatrixSymbol> aD,
                        const Freq& theta, const ResonanceSpec& spec) {
  require_single_frequency(*aD);
  ExprNode n;
  n.kind = NodeKind::MaskedQuotient;
  n.kids = {std::move(numerator)};
  n.aD = std::move(aD);
  n.shift = theta;
  n.spec = spec;
  return make(std::move(n));
}

bool equal_expr(const ExprPtr& a, const ExprPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->kind != b->kind) return false;
  if (a->c != b->c || a->x != b->x || a->axis != b->axis) return false;
  if (a->shift.dim() != b->shift.dim() || a->shift != b->shift) return false;
  if (a->M.rows() != b->M.rows() || a->M.cols() != b->M.cols()) return false;
  if (a->M.size() > 0 && a->M != b->M) return false;
  if (a->kids.size() != b->kids.size()) return false;
  for (std::size_t i = 0; i < a->kids.size(); ++i)
    if (!equal_expr(a->kids[i], b->kids[i])) return false;
  return true;
}

Mat* EvalContext::find(const ExprNode* n, const Freq& at) {
  auto it = memo_.find(Key{n, at});
  return it == memo_.end() ? nullptr : &it->second;
}

void EvalContext::store(const ExprNode* n, const Freq& at, Mat value) {
  memo_.emplace(Key{n, at}, std::move(value));
}

namespace {

Mat eval_impl(const ExprNode* e, const std::vector<double>& xi, int m, EvalContext* ctx);

Mat eval_node(const ExprPtr& e, const std::vector<double>& xi, int m, EvalContext* ctx) {
  // Leaves are cheaper to recompute than to hash.
  const bool cacheable =
      ctx != nullptr && (e->kind == NodeKind::Sum || e->kind == NodeKind::Product ||
                         e->kind == NodeKind::Shift || e->kind == NodeKind::Scale ||
                         e->kind == NodeKind::ConjTranspose || e->kind == NodeKind::MatDiag ||
                         e->kind == NodeKind::MatOffDiag || e->kind == NodeKind::ResonanceMask ||
                         e->kind == NodeKind::MaskedQuotient);
  if (!cacheable) return eval_impl(e.get(), xi, m, ctx);
  Freq key = Freq::from_doubles(xi);
  if (Mat* hit = ctx->find(e.get(), key)) return *hit;
  Mat v = eval_impl(e.get(), xi, m, ctx);
  ctx->store(e.get(), key, v);
  return v;
}

bool scalar_indicator(const ExprNode* e, const std::vector<double>& xi) {
  double r = vec_norm(xi);
  return e->kind == NodeKind::IndGE ? (r >= e->x) : (r < e->x);
}

Mat eval_impl(const ExprNode* e, const std::vector<double>& xi, int m, EvalContext* ctx) {
  switch (e->kind) {
    case NodeKind::ScalarConst:
      return e->c * Mat::Identity(m, m);
    case NodeKind::ConstMatrix:
      if (e->M.rows() != m || e->M.cols() != m)
        throw DimensionMismatch("constant matrix is " + std::to_string(e->M.rows()) + "x" +
                                std::to_string(e->M.cols()) + " but ambient dimension is " +
                                std::to_string(m));
      return e->M;
    case NodeKind::Jap:
      return std::pow(weight(xi), e->x) * Mat::Identity(m, m);
    case NodeKind::Hom: {
      double r = vec_norm(xi);
      if (r == 0.0) {
        if (e->x > 0) return Mat::Zero(m, m);
        throw MaskedDivisionOutsideSupport(
            "homogeneous weight with non-positive exponent evaluated at xi = 0 "
            "outside any indicator mask");
      }
      return std::pow(r, e->x) * Mat::Identity(m, m);
    }
    case NodeKind::Coord: {
      if (e->axis < 1 || e->axis > static_cast<int>(xi.size()))
        throw DimensionMismatch("coordinate axis out of range");
      return xi[e->axis - 1] * Mat::Identity(m, m);
    }
    case NodeKind::IndGE:
    case NodeKind::IndLT:
      return (scalar_indicator(e, xi) ? 1.0 : 0.0) * Mat::Identity(m, m);
    case NodeKind::Sum: {
      Mat acc = Mat::Zero(m, m);
      for (const auto& k : e->kids) acc += eval_node(k, xi, m, ctx);
      return acc;
    }
    case NodeKind::Product: {
      // Indicators gate the whole product: if any of them vanishes the value
      // is zero and no other factor is evaluated. This is what allows masked
      // negative-power weights inside an indicator-carrying product.
      for (const auto& k : e->kids)
        if ((k->kind == NodeKind::IndGE || k->kind == NodeKind::IndLT) &&
            !scalar_indicator(k.get(), xi))
          return Mat::Zero(m, m);
      Mat acc = Mat::Identity(m, m);
      for (const auto& k : e->kids) {
        if (k->kind == NodeKind::IndGE || k->kind == NodeKind::IndLT) continue;
        acc = acc * eval_node(k, xi, m, ctx);
      }
      return acc;
    }
    case NodeKind::Shift:
      return eval_node(e->kids[0], shift_point(xi, e->shift), m, ctx);
    case NodeKind::Scale:
      return e->c * eval_node(e->kids[0], xi, m, ctx);
    case NodeKind::ConjTranspose:
      return eval_node(e->kids[0], xi, m, ctx).adjoint();
    case NodeKind::MatDiag: {
      Mat v = eval_node(e->kids[0], xi, m, ctx);
      return Mat(v.diagonal().asDiagonal());
    }
    case NodeKind::MatOffDiag: {
      Mat v = eval_node(e->kids[0], xi, m, ctx);
      v.diagonal().setZero();
      return v;
    }
    case NodeKind::ResonanceMask: {
      Mat v = eval_node(e->kids[0], xi, m, ctx);
      std::vector<double> xs = shift_point(xi, e->shift);
      Mat aSh = e->aD->eval(Freq::zero(e->shift.dim()), xs, ctx);
      Mat aXi = e->aD->eval(Freq::zero(e->shift.dim()), xi, ctx);
      double wXi = weight(xi), wSh = weight(xs);
      bool tz = e->shift.is_zero();
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k) {
          int chi = resonance_cutoff_values(aSh(j, j), aXi(k, k), wXi, wSh, tz, j, k, e->spec);
          double w = e->complement ? 1.0 - chi : chi;
          v(j, k) *= w;
        }
      return v;
    }
    case NodeKind::MaskedQuotient: {
      Mat num = eval_node(e->kids[0], xi, m, ctx);
      Mat out = Mat::Zero(m, m);
      std::vector<double> xs = shift_point(xi, e->shift);
      Mat aSh = e->aD->eval(Freq::zero(e->shift.dim()), xs, ctx);
      Mat aXi = e->aD->eval(Freq::zero(e->shift.dim()), xi, ctx);
      double wXi = weight(xi), wSh = weight(xs);
      bool tz = e->shift.is_zero();
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k) {
          if (resonance_cutoff_values(aSh(j, j), aXi(k, k), wXi, wSh, tz, j, k, e->spec) == 0)
            continue;
          Cplx den = aSh(j, j) - aXi(k, k);
          if (std::abs(den) < 1e-300)
            throw MaskedDivisionOutsideSupport(
                "cutoff marked entry non-resonant but the diagonal gap vanishes; "
                "the resonance spec is inconsistent with aD");
          out(j, k) = num(j, k) / den;
        }
      return out;
    }
  }
  throw Error("Internal", "unhandled expression node");
}

}  // namespace

Mat eval_expr(const ExprPtr& e, const std::vector<double>& xi, int m, EvalContext* ctx) {
  return eval_node(e, xi, m, ctx);
}

ExprPtr promote_scalar(const ExprPtr& e) {
  if (e->kind == NodeKind::ConstMatrix && e->M.rows() == 1 && e->M.cols() == 1)
    return scalar_const(e->M(0, 0));
  if (e->kids.empty()) return e;
  ExprNode n = *e;
  for (auto& k : n.kids) k = promote_scalar(k);
  return std::make_shared<const ExprNode>(std::move(n));
}

}  // namespace gc
