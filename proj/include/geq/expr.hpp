#pragma once

// Closed-form scalar expressions in chart coordinates x0..x{n-1}, with exact
// first derivatives by forward-mode dual propagation.
//
// Grammar (highest precedence first):
//   primary := number | x<digits> | func '(' sum ')' | '(' sum ')'
//   power   := primary ('^' ['-'] integer)*        left associative
//   unary   := '-' unary | power
//   product := unary (('*' | '/') unary)*
//   sum     := product (('+' | '-') product)*
//   func    := exp | log | sin | cos | sqrt

#include <array>
#include <memory>
#include <set>
#include <string>
#include <string_view>

#include "geq/core.hpp"

namespace geq::expr {

enum class Op { Lit, Var, Add, Sub, Mul, Div, Neg, Pow, Exp, Log, Sin, Cos, Sqrt };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Op op;
  double value = 0.0;  // Lit
  int index = 0;       // Var: coordinate index; Pow: integer exponent
  NodePtr lhs;         // unary operand or left operand
  NodePtr rhs;
};

struct DualScalar {
  double value = 0.0;
  std::array<double, kMaxDim> grad{};
  int dim = 0;
};

class ParseError : public Error {
 public:
  ParseError(ErrorCode code, const std::string& message, std::size_t offset)
      : Error(code, message + " (byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Immutable parsed expression; copies share the tree.
class Expr {
 public:
  Expr() = default;
  Expr(NodePtr root, int dim) : root_(std::move(root)), dim_(dim) {}

  int dim() const { return dim_; }
  const NodePtr& root() const { return root_; }
  bool empty() const { return root_ == nullptr; }

  /// Canonical, fully parenthesised text; parse(print()) is AST-equal.
  std::string print() const;
  /// Coordinate indices the expression depends on.
  std::set<int> symbols() const;
  /// True when the expression is a literal (possibly negated).
  bool is_constant() const;

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  NodePtr root_;
  int dim_ = 0;
};

/// Throws ParseError (SyntaxError, UnknownSymbol, IndexOutOfRange).
Expr parse(std::string_view text, int dim);

/// Value only.
double eval(const Expr& e, const Point& p);

/// Value and exact gradient. Throws DomainError naming the offending
/// subexpression on division by zero, log/sqrt outside (0, inf) or a
/// non-finite intermediate.
DualScalar eval_dual(const Expr& e, const Point& p);

std::string print(const NodePtr& node);

}  // namespace geq::expr
