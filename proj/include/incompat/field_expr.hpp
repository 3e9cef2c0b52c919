#pragma once

// Scalar field expressions in the chart variables x and y.
//
// Grammar (standard precedence, ^ is right associative and binds tighter
// than unary minus, binary - and / associate to the left):
//
//   expr    := term  (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | 'x' | 'y' | 'pi' | 'e'
//            | func '(' expr ')' | '(' expr ')'
//   func    := sin | cos | exp | log | sqrt

#include <array>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace incompat {

enum class ExprOp : unsigned char {
  Const, VarX, VarY, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Log, Sqrt
};

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  ExprOp op = ExprOp::Const;
  double value = 0.0;  // Const only
  ExprPtr lhs;         // unary argument or left operand
  ExprPtr rhs;         // right operand of binary ops
};

class ParseError : public std::runtime_error {
 public:
  enum class Kind { Syntax, UnknownIdentifier, Arity, Empty };
  ParseError(Kind kind, std::size_t offset, const std::string& what);
  Kind kind() const { return kind_; }
  /// Byte offset into the source where the problem was detected.
  std::size_t offset() const { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

/// Raised by evaluation when an operation leaves its domain
/// (log/sqrt of an invalid argument, division by zero, ...).
class DomainError : public std::runtime_error {
 public:
  DomainError(std::string subexpression, const std::string& what);
  const std::string& subexpression() const { return subexpression_; }

 private:
  std::string subexpression_;
};

/// An immutable, parsed scalar expression. Cheap to copy; safe to evaluate
/// concurrently.
class ScalarFieldExpr {
 public:
  ScalarFieldExpr();  // the constant 0
  explicit ScalarFieldExpr(ExprPtr root, std::string source = {});

  const ExprPtr& root() const { return root_; }
  const std::string& source() const { return source_; }

  double operator()(double x, double y) const;
  std::string to_string() const;

  /// Symbolic partial derivative (0 = d/dx, 1 = d/dy), lightly simplified.
  ScalarFieldExpr derivative(int var) const;

  bool is_constant() const;

 private:
  struct Instr {
    ExprOp op;
    double value;
    const ExprNode* node;
  };
  void compile();

  ExprPtr root_;
  std::string source_;
  std::vector<Instr> program_;
  std::size_t max_stack_ = 0;
};

ScalarFieldExpr parse_field(std::string_view source);
double eval_field(const ScalarFieldExpr& expr, double x, double y);

/// Renders a tree with the minimal parentheses needed to parse back to the same tree.
std::string to_string(const ExprNode& node);
bool structurally_equal(const ExprNode& a, const ExprNode& b);

/// Value plus first and second partial derivatives, all symbolic.
struct FieldJet {
  double value = 0.0;
  std::array<double, 2> grad{};
  std::array<double, 3> hess{};  // xx, xy, yy
};

/// A field bundled with its symbolic first and second derivatives.
class DifferentiableField {
 public:
  DifferentiableField() = default;
  explicit DifferentiableField(ScalarFieldExpr f);

  const ScalarFieldExpr& expr() const { return f_; }
  double value(double x, double y) const { return f_(x, y); }
  std::array<double, 2> gradient(double x, double y) const;
  FieldJet jet(double x, double y) const;

 private:
  ScalarFieldExpr f_, fx_, fy_, fxx_, fxy_, fyy_;
};

std::array<double, 2> eval_gradient(const ScalarFieldExpr& expr, double x, double y);
/// Returns the symmetric Hessian as a 2x2 array.
std::array<std::array<double, 2>, 2> eval_hessian(const ScalarFieldExpr& expr, double x, double y);

}  // namespace incompat
