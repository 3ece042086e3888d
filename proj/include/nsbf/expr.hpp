#pragma once

#include <complex>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

#include "nsbf/errors.hpp"
#include "nsbf/grid.hpp"

namespace nsbf {

// Malformed expression text; position is a 0-based character offset.
class ParseError : public ConfigError {
 public:
  ParseError(const std::string& message, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// Division by an exact zero, log(0), or a non-finite result from a node.
class EvaluationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Arithmetic over complex scalars with one designated variable:
//   literals (3, 2.5e-3, 4i), pi, e, i, + - * / ^ (right-associative),
//   unary minus, and sin cos tan exp log sqrt abs sinh cosh tanh sech.
// Precedence: ^ binds tighter than unary minus, which binds tighter than * /.
class Expr {
 public:
  struct Node;

  static Expr parse(std::string_view text, std::string variable = "x");
  static Expr constant(cplx value);

  cplx evaluate(cplx value = 0.0) const;
  cplx operator()(cplx value) const { return evaluate(value); }

  // True when the expression does not mention the variable.
  bool is_constant() const;
  const std::string& variable() const { return variable_; }

  // Fully parenthesised text that parses back to the same tree.
  std::string print() const;

 private:
  Expr(std::shared_ptr<const Node> root, std::string variable)
      : root_(std::move(root)), variable_(std::move(variable)) {}

  std::shared_ptr<const Node> root_;
  std::string variable_;
};

// Evaluate at every grid node; errors carry the offending node index.
SampledFunction sample(const Expr& expr, const GridPtr& grid);

// max |Im| below tol; selects the real-arithmetic paths of the solver.
bool is_real_valued(const SampledFunction& sf, double tol = 1e-14);

}  // namespace nsbf
