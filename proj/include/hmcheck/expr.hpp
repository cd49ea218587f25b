#pragma once

// Coordinate expressions: parse user-written formulas into an immutable AST
// and evaluate them over any scalar type implementing the jet arithmetic
// contract (double, std::complex<double>, Jet3<double>, Jet3<complex>).
//
// Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | power
//   power  := atom ('^' exponent)?          exponent folds to a constant
//   atom   := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//
// Functions: sin cos tan exp log sqrt sinh cosh tanh atan (unary) and
// pow(x, c) with constant c. `pi` is a predefined constant.

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmcheck/jet.hpp"

namespace hmc {

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
};

enum class BinaryOp { kAdd, kSub, kMul, kDiv, kPow };

struct ExprNode;
using ExprNodePtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  enum class Kind { kConstant, kVariable, kNeg, kBinary, kCall };

  Kind kind = Kind::kConstant;
  double value = 0.0;         // kConstant
  int variable = -1;          // kVariable: index into the declared names
  BinaryOp op = BinaryOp::kAdd;
  ElementaryFn fn = ElementaryFn::kSin;
  std::vector<ExprNodePtr> children;
  Span span;
};

class ExprError : public std::runtime_error {
 public:
  enum class Kind { kSyntax, kUnknownIdentifier, kArity, kNonConstantExponent, kDomain };

  ExprError(Kind kind, std::size_t position, const std::string& message)
      : std::runtime_error(message), kind_(kind), position_(position) {}

  Kind kind() const { return kind_; }
  std::size_t position() const { return position_; }

 private:
  Kind kind_;
  std::size_t position_;
};

/// A parsed expression together with the variable names it was parsed
/// against. Copies share the immutable node tree.
class ExprAst {
 public:
  ExprAst() = default;
  ExprAst(ExprNodePtr root, std::vector<std::string> variables, std::string source)
      : root_(std::move(root)), variables_(std::move(variables)), source_(std::move(source)) {}

  static ExprAst constant(double value, std::vector<std::string> variables = {});

  const ExprNode& root() const { return *root_; }
  const ExprNodePtr& root_ptr() const { return root_; }
  const std::vector<std::string>& variables() const { return variables_; }
  const std::string& source() const { return source_; }
  bool empty() const { return root_ == nullptr; }

  /// True when no variable occurs in the tree.
  bool is_constant() const;

 private:
  ExprNodePtr root_;
  std::vector<std::string> variables_;
  std::string source_;
};

ExprAst parse(const std::string& text, const std::vector<std::string>& variables);

/// Fully parenthesised text that parses back to a structurally equal tree.
std::string print(const ExprAst& ast);

/// Structural equality; spans and source text are ignored.
bool structurally_equal(const ExprNode& a, const ExprNode& b);
inline bool structurally_equal(const ExprAst& a, const ExprAst& b) {
  return structurally_equal(a.root(), b.root());
}

/// Product of two expressions over the same variables (used to rescale
/// metric components).
ExprAst multiply(const ExprAst& a, const ExprAst& b);

namespace detail {

template <class T>
T eval_node(const ExprNode& n, const std::vector<T>& env) {
  try {
    switch (n.kind) {
      case ExprNode::Kind::kConstant: return T(n.value);
      case ExprNode::Kind::kVariable: return env.at(static_cast<std::size_t>(n.variable));
      case ExprNode::Kind::kNeg: return -eval_node(*n.children[0], env);
      case ExprNode::Kind::kCall: return hmc::apply(n.fn, eval_node(*n.children[0], env));
      case ExprNode::Kind::kBinary: {
        if (n.op == BinaryOp::kPow) return pow_const(eval_node(*n.children[0], env), n.children[1]->value);
        const T a = eval_node(*n.children[0], env);
        const T b = eval_node(*n.children[1], env);
        switch (n.op) {
          case BinaryOp::kAdd: return a + b;
          case BinaryOp::kSub: return a - b;
          case BinaryOp::kMul: return a * b;
          case BinaryOp::kDiv: return divide(a, b);
          case BinaryOp::kPow: break;
        }
        break;
      }
    }
  } catch (const DomainError& e) {
    if (e.has_span()) throw;
    throw DomainError(e.what(), n.span.begin, n.span.end);
  }
  throw std::logic_error("malformed expression node");
}

}  // namespace detail

/// Evaluates with `env[i]` bound to variable i. Domain failures surface as
/// DomainError carrying the span of the innermost failing subexpression.
template <class T>
T eval(const ExprAst& ast, const std::vector<T>& env) {
  if (env.size() < ast.variables().size()) throw std::invalid_argument("eval: unbound variables");
  return detail::eval_node(ast.root(), env);
}

template <class T>
T eval(const ExprAst& ast, const std::map<std::string, T>& env) {
  std::vector<T> bound;
  bound.reserve(ast.variables().size());
  for (const auto& name : ast.variables()) {
    auto it = env.find(name);
    if (it == env.end()) throw std::invalid_argument("eval: variable '" + name + "' is unbound");
    bound.push_back(it->second);
  }
  return detail::eval_node(ast.root(), bound);
}

/// Human-readable message for a DomainError raised while evaluating `ast`.
std::string describe(const DomainError& e, const ExprAst& ast);

}  // namespace hmc
