#pragma once

#include <stdexcept>
#include <string>

namespace gc {

// Every failure mode surfaced by the library carries a stable machine-readable
// code so the CLI can map it to an exit status and an error report.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& msg)
      : std::runtime_error(msg), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

#define GC_DEFINE_ERROR(Name)                                 \
  class Name : public Error {                                 \
   public:                                                    \
    explicit Name(const std::string& msg) : Error(#Name, msg) {} \
  }

GC_DEFINE_ERROR(DimensionMismatch);
GC_DEFINE_ERROR(MaskedDivisionOutsideSupport);
GC_DEFINE_ERROR(ExactModeUnavailable);
GC_DEFINE_ERROR(NotDiagonal);
GC_DEFINE_ERROR(InsufficientRadii);
GC_DEFINE_ERROR(DegenerateSeparation);
GC_DEFINE_ERROR(UnsupportedDimension);
GC_DEFINE_ERROR(SingularLattice);
GC_DEFINE_ERROR(UntrustedWindow);
GC_DEFINE_ERROR(GridMismatch);
GC_DEFINE_ERROR(ZeroVector);
GC_DEFINE_ERROR(RadialBracketFailure);
GC_DEFINE_ERROR(CombinatorialBudgetExceeded);
GC_DEFINE_ERROR(NotFound);
GC_DEFINE_ERROR(UnknownAtom);
GC_DEFINE_ERROR(ArityError);
GC_DEFINE_ERROR(ConfigError);

#undef GC_DEFINE_ERROR

// Parse errors carry the 1-based source position of the offending token.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& msg, int line, int col)
      : Error("SyntaxError",
              msg + " (line " + std::to_string(line) + ", col " + std::to_string(col) + ")"),
        line_(line), col_(col) {}
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_;
  int col_;
};

}  // namespace gc
