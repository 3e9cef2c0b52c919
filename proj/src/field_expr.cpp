#include "incompat/field_expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <tuple>

namespace incompat {

ParseError::ParseError(Kind kind, std::size_t offset, const std::string& what)
    : std::runtime_error(what + " at offset " + std::to_string(offset)), kind_(kind), offset_(offset) {}

DomainError::DomainError(std::string subexpression, const std::string& what)
    : std::runtime_error(what + " in '" + subexpression + "'"), subexpression_(std::move(subexpression)) {}

namespace {

ExprPtr make_const(double v) {
  auto n = std::make_shared<ExprNode>();
  n->op = ExprOp::Const;
  n->value = v;
  return n;
}

ExprPtr make_var(ExprOp op) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  return n;
}

ExprPtr make_node(ExprOp op, ExprPtr lhs, ExprPtr rhs = nullptr) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

bool is_binary(ExprOp op) {
  return op == ExprOp::Add || op == ExprOp::Sub || op == ExprOp::Mul || op == ExprOp::Div || op == ExprOp::Pow;
}

const char* function_name(ExprOp op) {
  switch (op) {
    case ExprOp::Sin: return "sin";
    case ExprOp::Cos: return "cos";
    case ExprOp::Exp: return "exp";
    case ExprOp::Log: return "log";
    case ExprOp::Sqrt: return "sqrt";
    default: return "?";
  }
}

// ---------------------------------------------------------------------------
// Lexer / parser

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
  Tok kind = Tok::End;
  std::size_t offset = 0;
  std::string_view text;
  double number = 0.0;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) { advance(); }

  ExprPtr parse() {
    ExprPtr e = expr();
    if (tok_.kind != Tok::End) fail("unexpected '" + std::string(tok_.text) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, ParseError::Kind kind = ParseError::Kind::Syntax) const {
    throw ParseError(kind, tok_.offset, msg);
  }

  void advance() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
      ++pos_;
    tok_ = Token{};
    tok_.offset = pos_;
    if (pos_ >= src_.size()) {
      tok_.kind = Tok::End;
      tok_.text = "end of input";
      return;
    }
    const char ch = src_[pos_];
    auto single = [&](Tok k) {
      tok_.kind = k;
      tok_.text = src_.substr(pos_, 1);
      ++pos_;
    };
    switch (ch) {
      case '+': return single(Tok::Plus);
      case '-': return single(Tok::Minus);
      case '*': return single(Tok::Star);
      case '/': return single(Tok::Slash);
      case '^': return single(Tok::Caret);
      case '(': return single(Tok::LParen);
      case ')': return single(Tok::RParen);
      case ',': return single(Tok::Comma);
      default: break;
    }
    if ((ch >= '0' && ch <= '9') || ch == '.') {
      std::size_t end = pos_;
      bool digits = false;
      while (end < src_.size() && src_[end] >= '0' && src_[end] <= '9') { ++end; digits = true; }
      if (end < src_.size() && src_[end] == '.') {
        ++end;
        while (end < src_.size() && src_[end] >= '0' && src_[end] <= '9') { ++end; digits = true; }
      }
      if (!digits) {
        tok_.text = src_.substr(pos_, 1);
        fail("malformed number");
      }
      // Exponent only when followed by digits, so that "2e" stays 2 then the constant e.
      if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
        std::size_t k = end + 1;
        if (k < src_.size() && (src_[k] == '+' || src_[k] == '-')) ++k;
        if (k < src_.size() && src_[k] >= '0' && src_[k] <= '9') {
          while (k < src_.size() && src_[k] >= '0' && src_[k] <= '9') ++k;
          end = k;
        }
      }
      tok_.kind = Tok::Number;
      tok_.text = src_.substr(pos_, end - pos_);
      const auto res = std::from_chars(tok_.text.data(), tok_.text.data() + tok_.text.size(), tok_.number);
      if (res.ec != std::errc() || !std::isfinite(tok_.number)) fail("malformed number");
      pos_ = end;
      return;
    }
    if ((ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || ch == '_') {
      std::size_t end = pos_;
      while (end < src_.size() && ((src_[end] >= 'a' && src_[end] <= 'z') || (src_[end] >= 'A' && src_[end] <= 'Z') ||
                                   (src_[end] >= '0' && src_[end] <= '9') || src_[end] == '_'))
        ++end;
      tok_.kind = Tok::Ident;
      tok_.text = src_.substr(pos_, end - pos_);
      pos_ = end;
      return;
    }
    tok_.text = src_.substr(pos_, 1);
    fail("unexpected character '" + std::string(tok_.text) + "'");
  }

  ExprPtr expr() {
    ExprPtr lhs = term();
    while (tok_.kind == Tok::Plus || tok_.kind == Tok::Minus) {
      const ExprOp op = tok_.kind == Tok::Plus ? ExprOp::Add : ExprOp::Sub;
      advance();
      lhs = make_node(op, lhs, term());
    }
    return lhs;
  }

  ExprPtr term() {
    ExprPtr lhs = unary();
    while (tok_.kind == Tok::Star || tok_.kind == Tok::Slash) {
      const ExprOp op = tok_.kind == Tok::Star ? ExprOp::Mul : ExprOp::Div;
      advance();
      lhs = make_node(op, lhs, unary());
    }
    return lhs;
  }

  ExprPtr unary() {
    if (tok_.kind == Tok::Minus) {
      advance();
      return make_node(ExprOp::Neg, unary());
    }
    return power();
  }

  ExprPtr power() {
    ExprPtr base = primary();
    if (tok_.kind == Tok::Caret) {
      advance();
      return make_node(ExprOp::Pow, base, unary());
    }
    return base;
  }

  ExprPtr primary() {
    switch (tok_.kind) {
      case Tok::Number: {
        const double v = tok_.number;
        advance();
        return make_const(v);
      }
      case Tok::LParen: {
        advance();
        ExprPtr e = expr();
        if (tok_.kind != Tok::RParen) fail("expected ')'");
        advance();
        return e;
      }
      case Tok::Ident: return identifier();
      default:
        fail("unexpected '" + std::string(tok_.text) + "'");
    }
  }

  ExprPtr identifier() {
    const std::string_view name = tok_.text;
    const std::size_t at = tok_.offset;
    ExprOp fn;
    if (name == "sin") fn = ExprOp::Sin;
    else if (name == "cos") fn = ExprOp::Cos;
    else if (name == "exp") fn = ExprOp::Exp;
    else if (name == "log") fn = ExprOp::Log;
    else if (name == "sqrt") fn = ExprOp::Sqrt;
    else {
      ExprPtr leaf;
      if (name == "x") leaf = make_var(ExprOp::VarX);
      else if (name == "y") leaf = make_var(ExprOp::VarY);
      else if (name == "pi") leaf = make_const(std::numbers::pi);
      else if (name == "e") leaf = make_const(std::numbers::e);
      else throw ParseError(ParseError::Kind::UnknownIdentifier, at, "unknown identifier '" + std::string(name) + "'");
      advance();
      if (tok_.kind == Tok::LParen)
        throw ParseError(ParseError::Kind::Arity, at, "'" + std::string(name) + "' is not a function");
      return leaf;
    }
    advance();
    if (tok_.kind != Tok::LParen)
      throw ParseError(ParseError::Kind::Arity, at, "function '" + std::string(name) + "' expects 1 argument");
    advance();
    if (tok_.kind == Tok::RParen)
      throw ParseError(ParseError::Kind::Arity, at, "function '" + std::string(name) + "' expects 1 argument, got 0");
    ExprPtr arg = expr();
    if (tok_.kind == Tok::Comma) {
      std::size_t count = 1;
      while (tok_.kind == Tok::Comma) {
        advance();
        expr();
        ++count;
      }
      throw ParseError(ParseError::Kind::Arity, at,
                       "function '" + std::string(name) + "' expects 1 argument, got " + std::to_string(count));
    }
    if (tok_.kind != Tok::RParen) fail("expected ')'");
    advance();
    return make_node(fn, arg);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  Token tok_;
};

// ---------------------------------------------------------------------------
// Printing

int precedence(const ExprNode& n) {
  switch (n.op) {
    case ExprOp::Add:
    case ExprOp::Sub: return 1;
    case ExprOp::Mul:
    case ExprOp::Div: return 2;
    case ExprOp::Neg: return 3;
    case ExprOp::Pow: return 4;
    case ExprOp::Const: return n.value < 0.0 ? 3 : 5;
    default: return 5;
  }
}

std::string number_to_string(double v) {
  if (v == std::numbers::pi) return "pi";
  if (v == std::numbers::e) return "e";
  char buf[64];
  const double mag = std::abs(v);
  std::snprintf(buf, sizeof buf, "%.17g", mag);
  std::string s = buf;
  // inf/nan cannot appear in parsed trees; keep them readable anyway.
  return v < 0.0 ? "-" + s : s;
}

void print(const ExprNode& n, std::string& out) {
  auto child = [&](const ExprNode& c, bool paren) {
    if (paren) out += '(';
    print(c, out);
    if (paren) out += ')';
  };
  switch (n.op) {
    case ExprOp::Const: out += number_to_string(n.value); return;
    case ExprOp::VarX: out += 'x'; return;
    case ExprOp::VarY: out += 'y'; return;
    case ExprOp::Neg:
      out += '-';
      child(*n.lhs, precedence(*n.lhs) < 3);
      return;
    case ExprOp::Add:
    case ExprOp::Sub:
    case ExprOp::Mul:
    case ExprOp::Div: {
      const int p = precedence(n);
      child(*n.lhs, precedence(*n.lhs) < p);
      out += n.op == ExprOp::Add ? " + " : n.op == ExprOp::Sub ? " - " : n.op == ExprOp::Mul ? "*" : "/";
      // Left-associative: a right operand of equal precedence needs parentheses.
      child(*n.rhs, precedence(*n.rhs) <= p);
      return;
    }
    case ExprOp::Pow:
      child(*n.lhs, precedence(*n.lhs) < 5);
      out += '^';
      child(*n.rhs, precedence(*n.rhs) < 3);
      return;
    default:
      out += function_name(n.op);
      out += '(';
      print(*n.lhs, out);
      out += ')';
      return;
  }
}

// ---------------------------------------------------------------------------
// Simplifying constructors used by differentiation

bool is_const(const ExprPtr& e, double v) { return e->op == ExprOp::Const && e->value == v; }
bool is_const(const ExprPtr& e) { return e->op == ExprOp::Const; }

ExprPtr add(ExprPtr a, ExprPtr b) {
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  if (is_const(a) && is_const(b)) return make_const(a->value + b->value);
  return make_node(ExprOp::Add, a, b);
}
ExprPtr neg(ExprPtr a) {
  if (is_const(a)) return make_const(-a->value);
  if (a->op == ExprOp::Neg) return a->lhs;
  return make_node(ExprOp::Neg, a);
}
ExprPtr sub(ExprPtr a, ExprPtr b) {
  if (is_const(b, 0.0)) return a;
  if (is_const(a, 0.0)) return neg(b);
  if (is_const(a) && is_const(b)) return make_const(a->value - b->value);
  return make_node(ExprOp::Sub, a, b);
}
ExprPtr mul(ExprPtr a, ExprPtr b) {
  if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (is_const(a) && is_const(b)) return make_const(a->value * b->value);
  return make_node(ExprOp::Mul, a, b);
}
ExprPtr div(ExprPtr a, ExprPtr b) {
  if (is_const(a, 0.0)) return make_const(0.0);
  if (is_const(b, 1.0)) return a;
  return make_node(ExprOp::Div, a, b);
}
ExprPtr pow_(ExprPtr a, ExprPtr b) {
  if (is_const(b, 1.0)) return a;
  if (is_const(b, 0.0)) return make_const(1.0);
  return make_node(ExprOp::Pow, a, b);
}

ExprPtr differentiate(const ExprPtr& n, ExprOp var) {
  switch (n->op) {
    case ExprOp::Const: return make_const(0.0);
    case ExprOp::VarX:
    case ExprOp::VarY: return make_const(n->op == var ? 1.0 : 0.0);
    case ExprOp::Neg: return neg(differentiate(n->lhs, var));
    case ExprOp::Add: return add(differentiate(n->lhs, var), differentiate(n->rhs, var));
    case ExprOp::Sub: return sub(differentiate(n->lhs, var), differentiate(n->rhs, var));
    case ExprOp::Mul:
      return add(mul(differentiate(n->lhs, var), n->rhs), mul(n->lhs, differentiate(n->rhs, var)));
    case ExprOp::Div: {
      // (u/v)' = u'/v - u v'/v^2
      const ExprPtr du = differentiate(n->lhs, var);
      const ExprPtr dv = differentiate(n->rhs, var);
      return sub(div(du, n->rhs), div(mul(n->lhs, dv), pow_(n->rhs, make_const(2.0))));
    }
    case ExprOp::Pow: {
      const ExprPtr& u = n->lhs;
      const ExprPtr& v = n->rhs;
      const ExprPtr du = differentiate(u, var);
      const ExprPtr dv = differentiate(v, var);
      if (is_const(dv, 0.0)) {
        // Exponent independent of the variable: v u^(v-1) u'.
        return mul(mul(v, pow_(u, sub(v, make_const(1.0)))), du);
      }
      // u^v (v' log u + v u'/u)
      return mul(n, add(mul(dv, make_node(ExprOp::Log, u)), div(mul(v, du), u)));
    }
    case ExprOp::Sin: return mul(make_node(ExprOp::Cos, n->lhs), differentiate(n->lhs, var));
    case ExprOp::Cos: return neg(mul(make_node(ExprOp::Sin, n->lhs), differentiate(n->lhs, var)));
    case ExprOp::Exp: return mul(n, differentiate(n->lhs, var));
    case ExprOp::Log: return div(differentiate(n->lhs, var), n->lhs);
    case ExprOp::Sqrt: return div(differentiate(n->lhs, var), mul(make_const(2.0), n));
  }
  return make_const(0.0);
}

std::size_t emit(const ExprNode& n, std::vector<std::tuple<ExprOp, double, const ExprNode*>>& out) {
  if (n.op == ExprOp::Const || n.op == ExprOp::VarX || n.op == ExprOp::VarY) {
    out.emplace_back(n.op, n.value, &n);
    return 1;
  }
  if (is_binary(n.op)) {
    const std::size_t l = emit(*n.lhs, out);
    const std::size_t r = emit(*n.rhs, out);
    out.emplace_back(n.op, 0.0, &n);
    return std::max(l, r + 1);
  }
  const std::size_t l = emit(*n.lhs, out);
  out.emplace_back(n.op, 0.0, &n);
  return l;
}

}  // namespace

std::string to_string(const ExprNode& node) {
  std::string out;
  print(node, out);
  return out;
}

bool structurally_equal(const ExprNode& a, const ExprNode& b) {
  if (a.op != b.op) return false;
  if (a.op == ExprOp::Const) return a.value == b.value;
  if (a.op == ExprOp::VarX || a.op == ExprOp::VarY) return true;
  if (!structurally_equal(*a.lhs, *b.lhs)) return false;
  if (is_binary(a.op)) return structurally_equal(*a.rhs, *b.rhs);
  return true;
}

ScalarFieldExpr::ScalarFieldExpr() : ScalarFieldExpr(make_const(0.0), "0") {}

ScalarFieldExpr::ScalarFieldExpr(ExprPtr root, std::string source) : root_(std::move(root)), source_(std::move(source)) {
  if (source_.empty()) source_ = incompat::to_string(*root_);
  compile();
}

void ScalarFieldExpr::compile() {
  std::vector<std::tuple<ExprOp, double, const ExprNode*>> tmp;
  max_stack_ = emit(*root_, tmp);
  program_.clear();
  program_.reserve(tmp.size());
  for (auto& [op, v, node] : tmp) program_.push_back({op, v, node});
}

double ScalarFieldExpr::operator()(double x, double y) const {
  constexpr std::size_t kInline = 32;
  double inline_stack[kInline] = {};
  std::vector<double> heap;
  double* st = inline_stack;
  if (max_stack_ > kInline) {
    heap.resize(max_stack_);
    st = heap.data();
  }
  std::size_t top = 0;
  auto domain = [](const ExprNode* node, const char* what) -> DomainError {
    return DomainError(incompat::to_string(*node), what);
  };
  for (const Instr& in : program_) {
    switch (in.op) {
      case ExprOp::Const: st[top++] = in.value; break;
      case ExprOp::VarX: st[top++] = x; break;
      case ExprOp::VarY: st[top++] = y; break;
      case ExprOp::Neg: st[top - 1] = -st[top - 1]; break;
      case ExprOp::Add: --top; st[top - 1] += st[top]; break;
      case ExprOp::Sub: --top; st[top - 1] -= st[top]; break;
      case ExprOp::Mul: --top; st[top - 1] *= st[top]; break;
      case ExprOp::Div:
        --top;
        if (st[top] == 0.0) throw domain(in.node, "division by zero");
        st[top - 1] /= st[top];
        break;
      case ExprOp::Pow: {
        --top;
        const double b = st[top - 1], p = st[top];
        if (b < 0.0 && p != std::floor(p)) throw domain(in.node, "negative base with non-integer exponent");
        if (b == 0.0 && p < 0.0) throw domain(in.node, "zero raised to a negative power");
        st[top - 1] = p == 2.0 ? b * b : std::pow(b, p);
        break;
      }
      case ExprOp::Sin: st[top - 1] = std::sin(st[top - 1]); break;
      case ExprOp::Cos: st[top - 1] = std::cos(st[top - 1]); break;
      case ExprOp::Exp: st[top - 1] = std::exp(st[top - 1]); break;
      case ExprOp::Log:
        if (!(st[top - 1] > 0.0)) throw domain(in.node, "log of nonpositive value");
        st[top - 1] = std::log(st[top - 1]);
        break;
      case ExprOp::Sqrt:
        if (!(st[top - 1] >= 0.0)) throw domain(in.node, "sqrt of negative value");
        st[top - 1] = std::sqrt(st[top - 1]);
        break;
    }
  }
  return st[0];
}

std::string ScalarFieldExpr::to_string() const { return incompat::to_string(*root_); }

ScalarFieldExpr ScalarFieldExpr::derivative(int var) const {
  return ScalarFieldExpr(differentiate(root_, var == 0 ? ExprOp::VarX : ExprOp::VarY));
}

bool ScalarFieldExpr::is_constant() const {
  for (const Instr& in : program_)
    if (in.op == ExprOp::VarX || in.op == ExprOp::VarY) return false;
  return true;
}

ScalarFieldExpr parse_field(std::string_view source) {
  bool blank = true;
  for (char ch : source)
    if (ch != ' ' && ch != '\t' && ch != '\n' && ch != '\r') blank = false;
  if (blank) throw ParseError(ParseError::Kind::Empty, 0, "empty expression");
  Parser p(source);
  return ScalarFieldExpr(p.parse(), std::string(source));
}

double eval_field(const ScalarFieldExpr& expr, double x, double y) { return expr(x, y); }

DifferentiableField::DifferentiableField(ScalarFieldExpr f)
    : f_(std::move(f)), fx_(f_.derivative(0)), fy_(f_.derivative(1)), fxx_(fx_.derivative(0)),
      fxy_(fx_.derivative(1)), fyy_(fy_.derivative(1)) {}

std::array<double, 2> DifferentiableField::gradient(double x, double y) const { return {fx_(x, y), fy_(x, y)}; }

FieldJet DifferentiableField::jet(double x, double y) const {
  FieldJet j;
  j.value = f_(x, y);
  j.grad = {fx_(x, y), fy_(x, y)};
  j.hess = {fxx_(x, y), fxy_(x, y), fyy_(x, y)};
  return j;
}

std::array<double, 2> eval_gradient(const ScalarFieldExpr& expr, double x, double y) {
  return {expr.derivative(0)(x, y), expr.derivative(1)(x, y)};
}

std::array<std::array<double, 2>, 2> eval_hessian(const ScalarFieldExpr& expr, double x, double y) {
  const ScalarFieldExpr fx = expr.derivative(0);
  const double xy = fx.derivative(1)(x, y);
  return {{{fx.derivative(0)(x, y), xy}, {xy, expr.derivative(1).derivative(1)(x, y)}}};
}

}  // namespace incompat
