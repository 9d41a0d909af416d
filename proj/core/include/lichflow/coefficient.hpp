#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "lichflow/field.hpp"

namespace lichflow {

/// A coefficient function A(x), B(x), h(x) or u0(x) given either as an
/// expression or as a tabulated snapshot ("@file:<path>").
///
/// Grammar (whitespace insignificant):
///   expr   := term (('+'|'-') term)*
///   term   := unary ('*' unary)*
///   unary  := '-' unary | factor
///   factor := number | 'x' | 'y' | 'pi' | ('sin'|'cos') '(' expr ')' | '(' expr ')'
class CoefficientSpec {
 public:
  struct Node;

  /// Throws ParseError with the byte offset and the expected-token set.
  static CoefficientSpec parse(std::string_view text);
  static CoefficientSpec constant(double value);

  const std::string& text() const noexcept { return text_; }
  bool is_tabulated() const noexcept { return !file_.empty(); }
  const std::string& file() const noexcept { return file_; }
  bool uses_y() const noexcept;
  /// True when the expression has no coordinate dependence.
  bool is_constant() const noexcept;

  /// Evaluates the expression at (x, y). Throws for tabulated specs.
  double evaluate(double x, double y = 0.0) const;

  /// Prefix form of the tree, e.g. "(+ 2 (* 0.5 (cos x)))".
  std::string to_sexpr() const;

 private:
  std::string text_;
  std::string file_;
  std::shared_ptr<const Node> root_;
};

/// Samples a coefficient on a grid. Expressions using y on a 1-d grid and
/// snapshots on a different grid are rejected.
Field materialize(const CoefficientSpec& spec, const Grid& grid);

/// Equivalent to CoefficientSpec::parse.
inline CoefficientSpec parse_coeff(std::string_view text) { return CoefficientSpec::parse(text); }

}  // namespace lichflow
