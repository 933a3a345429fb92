#include "gc/dsl.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "gc/errors.hpp"

namespace gc {
namespace {

enum class Tok { Num, Ident, Plus, Star, LParen, RParen, LBracket, RBracket, Comma, End };

struct Token {
  Tok kind = Tok::End;
  double num = 0.0;
  std::string text;
  int line = 1;
  int col = 1;
};

// A leading minus belongs to a numeric literal; the grammar has no operator
// minus, so `3-2` lexes as two adjacent numbers and fails in the parser.
std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  while (i < src.size()) {
    const char ch = src[i];
    if (ch == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      ++col;
      ++i;
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    const bool startsNumber =
        std::isdigit(static_cast<unsigned char>(ch)) || ch == '.' ||
        (ch == '-' && i + 1 < src.size() &&
         (std::isdigit(static_cast<unsigned char>(src[i + 1])) || src[i + 1] == '.'));
    if (startsNumber) {
      const char* begin = src.c_str() + i;
      char* end = nullptr;
      t.kind = Tok::Num;
      t.num = std::strtod(begin, &end);
      if (end == begin) throw SyntaxError("malformed number", line, col);
      const std::size_t len = static_cast<std::size_t>(end - begin);
      i += len;
      col += static_cast<int>(len);
      out.push_back(t);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) ||
                                src[j] == '_')) {
        ++j;
      }
      t.kind = Tok::Ident;
      t.text = src.substr(i, j - i);
      col += static_cast<int>(j - i);
      i = j;
      out.push_back(t);
      continue;
    }
    switch (ch) {
      case '+': t.kind = Tok::Plus; break;
      case '*': t.kind = Tok::Star; break;
      case '(': t.kind = Tok::LParen; break;
      case ')': t.kind = Tok::RParen; break;
      case '[': t.kind = Tok::LBracket; break;
      case ']': t.kind = Tok::RBracket; break;
      case ',': t.kind = Tok::Comma; break;
      default:
        throw SyntaxError(std::string("unexpected character '") + ch + "'", line, col);
    }
    ++i;
    ++col;
    out.push_back(t);
  }
  Token end;
  end.kind = Tok::End;
  end.line = line;
  end.col = col;
  out.push_back(end);
  return out;
}

class Parser {
 public:
  Parser(std::vector<Token> toks, const DslContext& ctx)
      : toks_(std::move(toks)), ctx_(ctx) {}

  ExprPtr run() {
    ExprPtr e = parse_sum();
    if (peek().kind != Tok::End) {
      throw SyntaxError("trailing input", peek().line, peek().col);
    }
    return e;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  Token take() { return toks_[pos_++]; }

  void expect(Tok kind, const char* what) {
    if (peek().kind != kind) {
      throw SyntaxError(std::string("expected ") + what, peek().line, peek().col);
    }
    ++pos_;
  }

  double number_arg() {
    if (peek().kind != Tok::Num) {
      throw SyntaxError("expected a number", peek().line, peek().col);
    }
    return take().num;
  }

  // name '(' number ')' with a dedicated complaint when extra arguments show.
  double unary_number(const std::string& name) {
    expect(Tok::LParen, "'('");
    const double v = number_arg();
    if (peek().kind == Tok::Comma) {
      throw ArityError(name + " takes one argument (line " +
                       std::to_string(peek().line) + ", col " +
                       std::to_string(peek().col) + ")");
    }
    expect(Tok::RParen, "')'");
    return v;
  }

  int index_arg(const std::string& name, int hi) {
    const Token at = peek();
    const double v = unary_number(name);
    const int j = static_cast<int>(v);
    if (v != static_cast<double>(j) || j < 1 || j > hi) {
      throw ArityError(name + " index must be an integer in 1.." + std::to_string(hi) +
                       " (line " + std::to_string(at.line) + ", col " +
                       std::to_string(at.col) + ")");
    }
    return j;
  }

  ExprPtr parse_sum() {
    std::vector<ExprPtr> terms;
    terms.push_back(parse_term());
    while (peek().kind == Tok::Plus) {
      take();
      terms.push_back(parse_term());
    }
    return terms.size() == 1 ? terms[0] : sum(std::move(terms));
  }

  ExprPtr parse_term() {
    std::vector<ExprPtr> factors;
    factors.push_back(parse_factor());
    while (peek().kind == Tok::Star) {
      take();
      factors.push_back(parse_factor());
    }
    return factors.size() == 1 ? factors[0] : product(std::move(factors));
  }

  const CliffordRep& rep_or_throw(const Token& at) {
    if (ctx_.rep == nullptr) {
      throw UnknownAtom("'" + at.text + "' needs a Clifford representation (line " +
                        std::to_string(at.line) + ", col " + std::to_string(at.col) +
                        ")");
    }
    return *ctx_.rep;
  }

  ExprPtr parse_factor() {
    const Token t = peek();
    if (t.kind == Tok::Num) {
      take();
      return scalar_const(Cplx(t.num, 0.0));
    }
    if (t.kind == Tok::LParen) {
      take();
      ExprPtr e = parse_sum();
      expect(Tok::RParen, "')'");
      return e;
    }
    if (t.kind != Tok::Ident) {
      throw SyntaxError("expected a value", t.line, t.col);
    }
    take();
    const std::string& name = t.text;
    if (name == "i") return scalar_const(Cplx(0.0, 1.0));
    if (name == "id") return const_matrix(Mat::Identity(ctx_.m, ctx_.m));
    if (name == "grading") return const_matrix(rep_or_throw(t).Gamma);
    if (name == "jap") return jap(unary_number(name));
    if (name == "hom") return hom(unary_number(name));
    if (name == "ge") return ind_ge(unary_number(name));
    if (name == "lt") return ind_lt(unary_number(name));
    if (name == "xi") return coord(index_arg(name, ctx_.d));
    if (name == "gamma") {
      const CliffordRep& rep = rep_or_throw(t);
      return const_matrix(rep.h[index_arg(name, static_cast<int>(rep.h.size())) - 1]);
    }
    if (name == "shift") {
      expect(Tok::LParen, "'('");
      expect(Tok::LBracket, "'['");
      std::vector<double> comps;
      comps.push_back(number_arg());
      while (peek().kind == Tok::Comma) {
        take();
        comps.push_back(number_arg());
      }
      expect(Tok::RBracket, "']'");
      if (static_cast<int>(comps.size()) != ctx_.d) {
        throw ArityError("shift needs " + std::to_string(ctx_.d) +
                         " frequency components (line " + std::to_string(t.line) +
                         ", col " + std::to_string(t.col) + ")");
      }
      expect(Tok::Comma, "','");
      ExprPtr inner = parse_sum();
      expect(Tok::RParen, "')'");
      return shift_expr(Freq::from_doubles(comps), std::move(inner));
    }
    throw UnknownAtom("'" + name + "' is not a coefficient atom (line " +
                      std::to_string(t.line) + ", col " + std::to_string(t.col) + ")");
  }

  std::vector<Token> toks_;
  DslContext ctx_;
  std::size_t pos_ = 0;
};

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool same_mat(const Mat& a, const Mat& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a - b).squaredNorm() == 0.0;
}

std::string print_scalar(const Cplx& c) {
  if (c.imag() == 0.0) return fmt_num(c.real());
  if (c.real() == 0.0 && c.imag() == 1.0) return "i";
  if (c.real() == 0.0) return "(" + fmt_num(c.imag()) + "*i)";
  return "(" + fmt_num(c.real()) + " + " + fmt_num(c.imag()) + "*i)";
}

std::string print_node(const ExprPtr& e, const DslContext& ctx, bool inProduct);

std::string print_kids(const ExprPtr& e, const DslContext& ctx, const char* sep,
                       bool inProduct) {
  std::string out;
  for (std::size_t i = 0; i < e->kids.size(); ++i) {
    if (i > 0) out += sep;
    out += print_node(e->kids[i], ctx, inProduct);
  }
  return out;
}

std::string print_node(const ExprPtr& e, const DslContext& ctx, bool inProduct) {
  switch (e->kind) {
    case NodeKind::ScalarConst:
      return print_scalar(e->c);
    case NodeKind::ConstMatrix: {
      if (same_mat(e->M, Mat::Identity(e->M.rows(), e->M.cols()))) return "id";
      if (ctx.rep != nullptr) {
        if (same_mat(e->M, ctx.rep->Gamma)) return "grading";
        for (std::size_t j = 0; j < ctx.rep->h.size(); ++j) {
          if (same_mat(e->M, ctx.rep->h[j])) {
            return "gamma(" + std::to_string(j + 1) + ")";
          }
        }
      }
      throw ConfigError("constant matrix is not a grammar atom");
    }
    case NodeKind::Jap:
      return "jap(" + fmt_num(e->x) + ")";
    case NodeKind::Hom:
      return "hom(" + fmt_num(e->x) + ")";
    case NodeKind::Coord:
      return "xi(" + std::to_string(e->axis) + ")";
    case NodeKind::IndGE:
      return "ge(" + fmt_num(e->x) + ")";
    case NodeKind::IndLT:
      return "lt(" + fmt_num(e->x) + ")";
    case NodeKind::Sum: {
      std::string body = print_kids(e, ctx, " + ", false);
      return inProduct ? "(" + body + ")" : body;
    }
    case NodeKind::Product:
      return print_kids(e, ctx, " * ", true);
    case NodeKind::Shift: {
      std::string out = "shift([";
      for (int i = 0; i < e->shift.dim(); ++i) {
        if (i > 0) out += ", ";
        out += fmt_num(e->shift[i]);
      }
      out += "], " + print_node(e->kids[0], ctx, false) + ")";
      return out;
    }
    case NodeKind::Scale:
      return print_scalar(e->c) + " * " + print_node(e->kids[0], ctx, true);
    default:
      throw ConfigError("expression contains nodes outside the coefficient grammar");
  }
}

}  // namespace

ExprPtr parse_coeff_expr(const std::string& src, const DslContext& ctx) {
  if (ctx.d < 1 || ctx.m < 1) throw ConfigError("context dimensions must be positive");
  Parser p(lex(src), ctx);
  return p.run();
}

std::string print_coeff_expr(const ExprPtr& e, const DslContext& ctx) {
  return print_node(e, ctx, false);
}

}  // namespace gc
