#pragma once

#include <string>

#include "gc/clifford.hpp"
#include "gc/expr.hpp"

namespace gc {

// Binding context for coefficient expressions: the frequency dimension d, the
// matrix dimension m for `id`, and the Clifford representation that backs
// `gamma(j)` and `grading` (may be null when the model has no such atoms).
struct DslContext {
  int d = 2;
  int m = 1;
  const CliffordRep* rep = nullptr;
};

// Grammar: numbers (sign, decimals, exponents), `i`, `jap(g)`, `hom(g)`,
// `xi(j)`, `ge(r)`, `lt(r)`, `id`, `gamma(j)`, `grading`, `+`, `*`,
// parentheses, and `shift([c1, ..., cd], expr)`. Errors carry 1-based source
// positions; unknown names raise UnknownAtom, wrong argument shapes
// ArityError.
ExprPtr parse_coeff_expr(const std::string& src, const DslContext& ctx);

// Inverse of the parser on its own output: printing a parsed tree and parsing
// the result reproduces the tree exactly. Numbers use 17 significant digits.
// Trees containing nodes outside the grammar are rejected with ConfigError.
std::string print_coeff_expr(const ExprPtr& e, const DslContext& ctx);

}  // namespace gc
