#include "hmcheck/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace hmc {
namespace {

struct FunctionEntry {
  const char* name;
  ElementaryFn fn;
};

constexpr FunctionEntry kFunctions[] = {
    {"sin", ElementaryFn::kSin},   {"cos", ElementaryFn::kCos},   {"tan", ElementaryFn::kTan},
    {"exp", ElementaryFn::kExp},   {"log", ElementaryFn::kLog},   {"sqrt", ElementaryFn::kSqrt},
    {"sinh", ElementaryFn::kSinh}, {"cosh", ElementaryFn::kCosh}, {"tanh", ElementaryFn::kTanh},
    {"atan", ElementaryFn::kAtan},
};

std::optional<ElementaryFn> lookup_function(const std::string& name) {
  for (const auto& f : kFunctions)
    if (name == f.name) return f.fn;
  return std::nullopt;
}

bool node_is_constant(const ExprNode& n) {
  if (n.kind == ExprNode::Kind::kVariable) return false;
  for (const auto& c : n.children)
    if (!node_is_constant(*c)) return false;
  return true;
}

ExprNodePtr make_constant(double v, Span span) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::kConstant;
  n->value = v;
  n->span = span;
  return n;
}

class Parser {
 public:
  Parser(const std::string& text, const std::vector<std::string>& variables)
      : text_(text), variables_(variables) {}

  ExprNodePtr parse_all() {
    skip_ws();
    if (pos_ >= text_.size()) fail_syntax("expression");
    ExprNodePtr e = parse_expr();
    skip_ws();
    if (pos_ < text_.size()) fail_syntax("operator or end of input");
    return e;
  }

 private:
  [[noreturn]] void fail_syntax(const std::string& expected) {
    std::string found = pos_ < text_.size() ? "'" + std::string(1, text_[pos_]) + "'" : "end of input";
    throw ExprError(ExprError::Kind::kSyntax, pos_,
                    "syntax error at position " + std::to_string(pos_) + ": expected " + expected +
                        ", found " + found);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail_syntax(std::string("'") + c + "'");
  }

  static ExprNodePtr binary(BinaryOp op, ExprNodePtr l, ExprNodePtr r) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::kBinary;
    n->op = op;
    n->span = {l->span.begin, r->span.end};
    n->children = {std::move(l), std::move(r)};
    return n;
  }

  ExprNodePtr parse_expr() {
    ExprNodePtr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = binary(BinaryOp::kAdd, lhs, parse_term());
      } else if (accept('-')) {
        lhs = binary(BinaryOp::kSub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  ExprNodePtr parse_term() {
    ExprNodePtr lhs = parse_factor();
    for (;;) {
      if (accept('*')) {
        lhs = binary(BinaryOp::kMul, lhs, parse_factor());
      } else if (accept('/')) {
        lhs = binary(BinaryOp::kDiv, lhs, parse_factor());
      } else {
        return lhs;
      }
    }
  }

  struct DepthGuard {
    explicit DepthGuard(Parser& p) : p(p) {
      if (++p.depth_ > kMaxDepth) {
        throw ExprError(ExprError::Kind::kSyntax, p.pos_, "expression nested too deeply");
      }
    }
    ~DepthGuard() { --p.depth_; }
    Parser& p;
  };

  ExprNodePtr parse_factor() {
    DepthGuard guard(*this);
    skip_ws();
    const std::size_t start = pos_;
    if (accept('-')) {
      ExprNodePtr child = parse_factor();
      auto n = std::make_shared<ExprNode>();
      n->kind = ExprNode::Kind::kNeg;
      n->span = {start, child->span.end};
      n->children = {std::move(child)};
      return n;
    }
    return parse_power();
  }

  ExprNodePtr parse_power() {
    ExprNodePtr base = parse_atom();
    if (!accept('^')) return base;
    ExprNodePtr exponent = fold_exponent(parse_exponent());
    return binary(BinaryOp::kPow, std::move(base), std::move(exponent));
  }

  // Right-associative, allows a leading minus: x^-2, x^2^3 = x^(2^3).
  ExprNodePtr parse_exponent() {
    DepthGuard guard(*this);
    skip_ws();
    const std::size_t start = pos_;
    if (accept('-')) {
      ExprNodePtr child = parse_exponent();
      auto n = std::make_shared<ExprNode>();
      n->kind = ExprNode::Kind::kNeg;
      n->span = {start, child->span.end};
      n->children = {std::move(child)};
      return n;
    }
    ExprNodePtr base = parse_atom();
    if (!accept('^')) return base;
    ExprNodePtr exponent = fold_exponent(parse_exponent());
    return binary(BinaryOp::kPow, std::move(base), std::move(exponent));
  }

  ExprNodePtr fold_exponent(const ExprNodePtr& e) {
    if (!node_is_constant(*e)) {
      throw ExprError(ExprError::Kind::kNonConstantExponent, e->span.begin,
                      "exponent at position " + std::to_string(e->span.begin) +
                          " must be a constant expression");
    }
    double v = 0.0;
    try {
      v = detail::eval_node<double>(*e, {});
    } catch (const DomainError& err) {
      throw ExprError(ExprError::Kind::kDomain, e->span.begin,
                      std::string("cannot fold exponent: ") + err.what());
    }
    return make_constant(v, e->span);
  }

  ExprNodePtr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    if (pos_ == start + 1 && text_[start] == '.') {
      pos_ = start;
      fail_syntax("digits");
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        pos_ = save + 1;
        fail_syntax("exponent digits");
      }
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    const double v = std::strtod(text_.substr(start, pos_ - start).c_str(), nullptr);
    if (!std::isfinite(v)) {
      throw ExprError(ExprError::Kind::kSyntax, start, "numeric literal out of range");
    }
    return make_constant(v, {start, pos_});
  }

  ExprNodePtr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail_syntax("number, identifier or '('");
    const std::size_t start = pos_;
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (c == '(') {
      ++pos_;
      ExprNodePtr inner = parse_expr();
      expect(')');
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      const std::string name = text_.substr(start, pos_ - start);
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == '(') return parse_call(name, start);
      for (std::size_t i = 0; i < variables_.size(); ++i) {
        if (variables_[i] == name) {
          auto n = std::make_shared<ExprNode>();
          n->kind = ExprNode::Kind::kVariable;
          n->variable = static_cast<int>(i);
          n->span = {start, start + name.size()};
          return n;
        }
      }
      if (name == "pi") return make_constant(std::numbers::pi, {start, start + name.size()});
      throw ExprError(ExprError::Kind::kUnknownIdentifier, start,
                      "unknown identifier '" + name + "' at position " + std::to_string(start));
    }
    fail_syntax("number, identifier or '('");
  }

  ExprNodePtr parse_call(const std::string& name, std::size_t start) {
    const bool is_pow = name == "pow";
    const auto fn = lookup_function(name);
    if (!is_pow && !fn) {
      throw ExprError(ExprError::Kind::kUnknownIdentifier, start,
                      "unknown function '" + name + "' at position " + std::to_string(start));
    }
    expect('(');
    std::vector<ExprNodePtr> args{parse_expr()};
    while (accept(',')) args.push_back(parse_expr());
    expect(')');
    const std::size_t want = is_pow ? 2 : 1;
    if (args.size() != want) {
      throw ExprError(ExprError::Kind::kArity, start,
                      "function '" + name + "' takes " + std::to_string(want) + " argument(s), got " +
                          std::to_string(args.size()));
    }
    if (is_pow) {
      auto n = binary(BinaryOp::kPow, args[0], fold_exponent(args[1]));
      auto m = std::make_shared<ExprNode>(*n);
      m->span = {start, pos_};
      return m;
    }
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::kCall;
    n->fn = *fn;
    n->children = std::move(args);
    n->span = {start, pos_};
    return n;
  }

  static constexpr int kMaxDepth = 200;

  const std::string& text_;
  const std::vector<std::string>& variables_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (v < 0.0 || (v == 0.0 && std::signbit(v))) return "(" + s + ")";
  return s;
}

void print_node(const ExprNode& n, const std::vector<std::string>& vars, std::string& out) {
  switch (n.kind) {
    case ExprNode::Kind::kConstant: out += format_number(n.value); return;
    case ExprNode::Kind::kVariable: out += vars.at(static_cast<std::size_t>(n.variable)); return;
    case ExprNode::Kind::kNeg:
      out += "(-";
      print_node(*n.children[0], vars, out);
      out += ")";
      return;
    case ExprNode::Kind::kCall:
      out += to_string(n.fn);
      out += "(";
      print_node(*n.children[0], vars, out);
      out += ")";
      return;
    case ExprNode::Kind::kBinary: {
      static const char* ops[] = {" + ", " - ", " * ", " / ", "^"};
      out += "(";
      print_node(*n.children[0], vars, out);
      out += ops[static_cast<int>(n.op)];
      print_node(*n.children[1], vars, out);
      out += ")";
      return;
    }
  }
}

}  // namespace

ExprAst ExprAst::constant(double value, std::vector<std::string> variables) {
  return ExprAst(make_constant(value, {}), std::move(variables), format_number(value));
}

bool ExprAst::is_constant() const { return root_ && node_is_constant(*root_); }

ExprAst parse(const std::string& text, const std::vector<std::string>& variables) {
  Parser p(text, variables);
  return ExprAst(p.parse_all(), variables, text);
}

std::string print(const ExprAst& ast) {
  std::string out;
  print_node(ast.root(), ast.variables(), out);
  return out;
}

bool structurally_equal(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind || a.children.size() != b.children.size()) return false;
  switch (a.kind) {
    case ExprNode::Kind::kConstant:
      if (!(a.value == b.value)) return false;
      break;
    case ExprNode::Kind::kVariable:
      if (a.variable != b.variable) return false;
      break;
    case ExprNode::Kind::kBinary:
      if (a.op != b.op) return false;
      break;
    case ExprNode::Kind::kCall:
      if (a.fn != b.fn) return false;
      break;
    case ExprNode::Kind::kNeg: break;
  }
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!structurally_equal(*a.children[i], *b.children[i])) return false;
  return true;
}

ExprAst multiply(const ExprAst& a, const ExprAst& b) {
  if (a.variables() != b.variables()) throw std::invalid_argument("multiply: variable lists differ");
  return parse("(" + print(a) + ") * (" + print(b) + ")", a.variables());
}

std::string describe(const DomainError& e, const ExprAst& ast) {
  std::string msg = e.what();
  if (e.has_span() && e.span_end() <= ast.source().size() && e.span_begin() < e.span_end()) {
    msg += " in '" + ast.source().substr(e.span_begin(), e.span_end() - e.span_begin()) +
           "' (positions " + std::to_string(e.span_begin()) + "-" + std::to_string(e.span_end()) + ")";
  }
  return msg;
}

}  // namespace hmc
