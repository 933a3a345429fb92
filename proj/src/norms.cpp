#include "gc/norms.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>

#include "gc/grids.hpp"

namespace gc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Radial power profile of an entry: on {lo <= |xi| < hi} the value is
// coeff * |xi|^homPow * <xi>^japPow * M, zero elsewhere. M is folded from
// the constant-matrix factors in their original order.
struct Profile {
  double coeff = 1.0;
  double homPow = 0.0;
  double japPow = 0.0;
  double lo = 0.0;
  double hi = kInf;
  Mat M;  // size 0 stands for the identity

  bool empty() const { return lo >= hi; }
};

std::optional<Profile> extract(const ExprPtr& e);

std::optional<Profile> extract_product(const std::vector<ExprPtr>& kids) {
  Profile p;
  for (const auto& k : kids) {
    auto q = extract(k);
    if (!q) return std::nullopt;
    p.coeff *= q->coeff;
    p.homPow += q->homPow;
    p.japPow += q->japPow;
    p.lo = std::max(p.lo, q->lo);
    p.hi = std::min(p.hi, q->hi);
    if (q->M.size() > 0) p.M = p.M.size() > 0 ? Mat(p.M * q->M) : q->M;
  }
  return p;
}

std::optional<Profile> extract(const ExprPtr& e) {
  switch (e->kind) {
    case NodeKind::ScalarConst: {
      Profile p;
      p.coeff = std::abs(e->c);
      return p;
    }
    case NodeKind::ConstMatrix: {
      Profile p;
      p.M = e->M;
      return p;
    }
    case NodeKind::Jap: {
      Profile p;
      p.japPow = e->x;
      return p;
    }
    case NodeKind::Hom: {
      Profile p;
      p.homPow = e->x;
      return p;
    }
    case NodeKind::IndGE: {
      Profile p;
      p.lo = e->x;
      return p;
    }
    case NodeKind::IndLT: {
      Profile p;
      p.hi = e->x;
      return p;
    }
    case NodeKind::Scale: {
      auto q = extract(e->kids[0]);
      if (!q) return std::nullopt;
      q->coeff *= std::abs(e->c);
      return q;
    }
    case NodeKind::Product:
      return extract_product(e->kids);
    case NodeKind::ConjTranspose: {
      auto q = extract(e->kids[0]);
      if (!q) return std::nullopt;
      if (q->M.size() > 0) q->M = Mat(q->M.adjoint());
      return q;
    }
    case NodeKind::MatDiag: {
      auto q = extract(e->kids[0]);
      if (!q) return std::nullopt;
      if (q->M.size() > 0) q->M = Mat(q->M.diagonal().asDiagonal());
      return q;  // identity stays the identity under diag
    }
    case NodeKind::MatOffDiag: {
      auto q = extract(e->kids[0]);
      if (!q) return std::nullopt;
      if (q->M.size() == 0) return Profile{0.0, 0.0, 0.0, 0.0, kInf, Mat()};
      q->M.diagonal().setZero();
      return q;
    }
    default:
      return std::nullopt;
  }
}

// phi(r) = r^h * (1+r)^p evaluated with the conventions 0^0 = 1, 0^h = +inf
// for h < 0.
double phi(double r, double h, double p) {
  double a;
  if (r == 0.0) {
    a = (h > 0) ? 0.0 : (h == 0 ? 1.0 : kInf);
  } else {
    a = std::pow(r, h);
  }
  return a * std::pow(1.0 + r, p);
}

// sup over [lo, hi) of r^h (1+r)^p. The log-derivative numerator
// h + (h+p) r is linear in r, so the sup sits at an endpoint, at the single
// interior critical radius, or at the hi = +inf limit.
double power_sup(double h, double p, double lo, double hi) {
  if (lo >= hi) return 0.0;
  double best = phi(lo, h, p);
  if (std::isfinite(hi)) {
    best = std::max(best, phi(hi, h, p));
  } else {
    double tail = h + p;
    if (tail > 0) return kInf;
    if (tail == 0) best = std::max(best, 1.0);
  }
  if (h + p != 0.0) {
    double rStar = -h / (h + p);
    if (rStar > lo && rStar < hi && rStar > 0) best = std::max(best, phi(rStar, h, p));
  }
  return best;
}

double sampled_sup(const ExprPtr& e, double gamma, int d, int m, const NormGrid& grid) {
  auto dirs = unit_directions(d, grid.directions(d));
  EvalContext ctx;
  double best = 0.0;
  std::vector<double> xi(d, 0.0);
  for (double r : grid.radii) {
    if (r == 0.0) {
      std::fill(xi.begin(), xi.end(), 0.0);
      best = std::max(best, op_norm(eval_expr(e, xi, m, &ctx)));
      continue;
    }
    double w = std::pow(1.0 + r, -gamma);
    for (const auto& u : dirs) {
      for (int i = 0; i < d; ++i) xi[i] = r * u[i];
      best = std::max(best, w * op_norm(eval_expr(e, xi, m, &ctx)));
    }
  }
  return best;
}

}  // namespace

std::string NormGrid::describe(int d) const {
  char buf[128];
  double lo = radii.size() > 1 ? radii[1] : 0.0;
  double hi = radii.empty() ? 0.0 : radii.back();
  std::snprintf(buf, sizeof buf, "radii 0 + log[%g,%g] n=%d; dirs %d",
                lo, hi, static_cast<int>(radii.size()) - 1, directions(d));
  return buf;
}

NormGrid default_norm_grid() {
  NormGrid g;
  g.radii.push_back(0.0);
  auto rs = log_radii(0.05, 1000.0, 64);
  g.radii.insert(g.radii.end(), rs.begin(), rs.end());
  return g;
}

double op_norm(const Mat& M) {
  if (M.size() == 0) return 0.0;
  if (M.rows() == 1 && M.cols() == 1) return std::abs(M(0, 0));
  Eigen::JacobiSVD<Mat> svd(M);
  return svd.singularValues()(0);
}

SupResult weighted_sup(const ExprPtr& e, double gamma, int d, int m, const NormGrid& grid) {
  if (is_zero_const(e)) return {0.0, true};
  if (auto p = extract(e)) {
    if (p->empty()) return {0.0, true};
    double mNorm = p->M.size() > 0 ? op_norm(p->M) : 1.0;
    if (mNorm == 0.0 || p->coeff == 0.0) return {0.0, true};
    double s = power_sup(p->homPow, p->japPow - gamma, p->lo, p->hi);
    return {p->coeff * mNorm * s, true};
  }
  return {sampled_sup(e, gamma, d, m, grid), false};
}

NormEstimate symbol_norm(const MatrixSymbol& b, double l, double gamma) {
  return symbol_norm(b, l, gamma, default_norm_grid());
}

NormEstimate symbol_norm(const MatrixSymbol& b, double l, double gamma, const NormGrid& grid) {
  NormEstimate out;
  for (const auto& [t, e] : b.entries()) {
    if (is_zero_const(e)) continue;
    SupResult s = weighted_sup(e, gamma, b.d(), b.m(), grid);
    out.value += std::pow(freq_weight(t), l) * s.value;
    if (!s.exact) out.exact = false;
  }
  if (!out.exact) out.grid = grid.describe(b.d());
  return out;
}

ExprPtr restrict_annulus(ExprPtr e, double lo, double hi) {
  std::vector<ExprPtr> kids;
  if (lo > 0.0) kids.push_back(ind_ge(lo));
  if (std::isfinite(hi)) kids.push_back(ind_lt(hi));
  kids.push_back(std::move(e));
  return product(std::move(kids));
}

}  // namespace gc
