#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "incompat/field_expr.hpp"

using namespace incompat;

TEST_CASE("parse_field examples") {
  const auto x = parse_field("x");
  CHECK(x(0.25, 7.0) == 0.25);
  CHECK(x(-3.0, 1.0) == -3.0);

  const auto e = parse_field("exp(2*(x^2+y^2)/2)");
  CHECK(e(0.3, -0.4) == doctest::Approx(std::exp(0.25)).epsilon(1e-15));

  try {
    parse_field("x +* y");
    FAIL("expected a syntax error");
  } catch (const ParseError& err) {
    CHECK(err.kind() == ParseError::Kind::Syntax);
    CHECK(err.offset() == 3);
  }
}

TEST_CASE("parse errors are structured") {
  CHECK_THROWS_AS(parse_field(""), ParseError);
  CHECK_THROWS_AS(parse_field("   "), ParseError);
  try {
    parse_field("x + foo(y)");
    FAIL("expected unknown identifier");
  } catch (const ParseError& err) {
    CHECK(err.kind() == ParseError::Kind::UnknownIdentifier);
    CHECK(err.offset() == 4);
  }
  try {
    parse_field("sin(x, y)");
    FAIL("expected arity error");
  } catch (const ParseError& err) {
    CHECK(err.kind() == ParseError::Kind::Arity);
  }
  CHECK_THROWS_AS(parse_field("(x"), ParseError);
  CHECK_THROWS_AS(parse_field("x)"), ParseError);
  CHECK_THROWS_AS(parse_field("2..5"), ParseError);
}

TEST_CASE("precedence and associativity") {
  CHECK(parse_field("2+3*4")(0, 0) == 14.0);
  CHECK(parse_field("2^3^2")(0, 0) == 512.0);
  CHECK(parse_field("-2^2")(0, 0) == -4.0);
  CHECK(parse_field("8-3-2")(0, 0) == 3.0);
  CHECK(parse_field("8/4/2")(0, 0) == 1.0);
  CHECK(parse_field("2^-1")(0, 0) == 0.5);
  CHECK(parse_field("1e-3*x")(2, 0) == doctest::Approx(2e-3));
}

TEST_CASE("eval_field examples") {
  CHECK(eval_field(parse_field("x*y"), 2, 3) == 6.0);
  CHECK(std::abs(eval_field(parse_field("sin(pi)"), 0, 0)) <= 1e-15);
  try {
    eval_field(parse_field("1/x"), 0, 0);
    FAIL("expected a domain error");
  } catch (const DomainError& err) {
    CHECK(err.subexpression() == "1/x");
  }
  CHECK_THROWS_AS(eval_field(parse_field("log(x)"), -1, 0), DomainError);
  CHECK_THROWS_AS(eval_field(parse_field("sqrt(y)"), 0, -1), DomainError);
  CHECK(eval_field(parse_field("sqrt(x)"), 0, 0) == 0.0);
}

TEST_CASE("gradient and hessian examples") {
  const auto g = eval_gradient(parse_field("x^2+y"), 3, 0);
  CHECK(g[0] == 6.0);
  CHECK(g[1] == 1.0);
  const auto h = eval_hessian(parse_field("x*y"), 1, 1);
  CHECK(h[0][0] == 0.0);
  CHECK(h[0][1] == 1.0);
  CHECK(h[1][0] == 1.0);
  CHECK(h[1][1] == 0.0);
  const auto ge = eval_gradient(parse_field("exp(x)"), 0, 5);
  CHECK(ge[0] == 1.0);
  CHECK(ge[1] == 0.0);
}

namespace {

// Random expressions that stay inside their natural domain near the unit square.
std::string random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 11);
  std::uniform_real_distribution<double> c(0.5, 2.0);
  switch (pick(rng)) {
    case 0: return "x";
    case 1: return "y";
    case 2: return std::to_string(c(rng));
    case 3: return "(" + random_expr(rng, depth - 1) + "+" + random_expr(rng, depth - 1) + ")";
    case 4: return "(" + random_expr(rng, depth - 1) + "-" + random_expr(rng, depth - 1) + ")";
    case 5: return "(" + random_expr(rng, depth - 1) + "*" + random_expr(rng, depth - 1) + ")";
    case 6: return "(" + random_expr(rng, depth - 1) + "/(2+cos(" + random_expr(rng, depth - 1) + ")))";
    case 7: return "sin(" + random_expr(rng, depth - 1) + ")";
    case 8: return "exp(sin(" + random_expr(rng, depth - 1) + "))";
    case 9: return "log(2+sin(" + random_expr(rng, depth - 1) + "))";
    case 10: return "sqrt(1+" + random_expr(rng, depth - 1) + "^2)";
    default: return "(1.5+sin(" + random_expr(rng, depth - 1) + "))^" + std::to_string(c(rng));
  }
}

}  // namespace

TEST_CASE("symbolic gradient matches central differences on random trees") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto f = parse_field(random_expr(rng, 4));
    const double x = u(rng), y = u(rng), h = 1e-6;
    const auto g = eval_gradient(f, x, y);
    const double fd[2] = {(f(x + h, y) - f(x - h, y)) / (2 * h), (f(x, y + h) - f(x, y - h)) / (2 * h)};
    const double scale = std::max({1.0, std::abs(g[0]), std::abs(g[1])});
    for (int k = 0; k < 2; ++k) CHECK(std::abs(g[k] - fd[k]) / scale < 1e-6);
    // The Hessian is symmetric and consistent with the gradient.
    const auto H = eval_hessian(f, x, y);
    CHECK(H[0][1] == H[1][0]);
    const auto gx = eval_gradient(f, x + h, y), gm = eval_gradient(f, x - h, y);
    CHECK(std::abs((gx[0] - gm[0]) / (2 * h) - H[0][0]) / std::max(1.0, std::abs(H[0][0])) < 1e-5);
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("print and re-parse is stable") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    const auto f = parse_field(random_expr(rng, 4));
    const auto g = parse_field(f.to_string());
    CHECK(structurally_equal(*f.root(), *g.root()));
    CHECK(g.to_string() == f.to_string());
  }
  for (const char* s : {"-x^2", "(-x)^2", "x-(y-1)", "x/(y/2)", "2^3^x", "(2^3)^x", "-(-x)", "x*-y", "sin(x)^2"}) {
    const auto f = parse_field(s);
    CHECK(structurally_equal(*f.root(), *parse_field(f.to_string()).root()));
  }
}

TEST_CASE("evaluation is deterministic and thread-safe in use") {
  const auto f = parse_field("exp((x^2+y^2)/2)*sin(3*x*y)+log(2+y)");
  const double a = f(0.3, 0.7);
  for (int i = 0; i < 100; ++i) CHECK(f(0.3, 0.7) == a);
}

namespace {

// Independent recognizer of the grammar on a token stream.
struct Recognizer {
  std::vector<std::string> t;
  std::size_t i = 0;
  bool peek(const std::string& s) const { return i < t.size() && t[i] == s; }
  bool eat(const std::string& s) {
    if (!peek(s)) return false;
    ++i;
    return true;
  }
  bool primary() {
    if (i >= t.size()) return false;
    const std::string& s = t[i];
    if (s == "x" || s == "y" || s == "pi" || s == "e" || s == "1" || s == "2.5") return ++i, true;
    if (s == "sin" || s == "cos" || s == "exp" || s == "log" || s == "sqrt") {
      ++i;
      return eat("(") && expr() && eat(")");
    }
    if (eat("(")) return expr() && eat(")");
    return false;
  }
  bool power() { return primary() && (!eat("^") || unary()); }
  bool unary() { return eat("-") ? unary() : power(); }
  bool term() {
    if (!unary()) return false;
    while (peek("*") || peek("/")) {
      ++i;
      if (!unary()) return false;
    }
    return true;
  }
  bool expr() {
    if (!term()) return false;
    while (peek("+") || peek("-")) {
      ++i;
      if (!term()) return false;
    }
    return true;
  }
  bool accepts() { return expr() && i == t.size(); }
};

}  // namespace

TEST_CASE("fuzz: parser agrees with an independent recognizer") {
  const std::vector<std::string> vocab{"x", "y", "pi", "e", "1", "2.5", "+", "-", "*", "/", "^",
                                       "(", ")", "sin", "cos", "exp", "log", "sqrt", ",", "z", "@"};
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> len(1, 9), tok(0, vocab.size() - 1);
  int accepted = 0, rejected = 0;
  for (int n = 0; n < 20000; ++n) {
    Recognizer r;
    std::string src;
    const std::size_t L = len(rng);
    for (std::size_t k = 0; k < L; ++k) {
      r.t.push_back(vocab[tok(rng)]);
      src += r.t.back() + " ";
    }
    bool ok = false;
    try {
      parse_field(src);
      ok = true;
    } catch (const ParseError&) {
      ok = false;
    }
    CHECK_MESSAGE(ok == r.accepts(), src);
    (ok ? accepted : rejected)++;
  }
  CHECK(accepted > 100);
  CHECK(rejected > 100);
}

TEST_CASE("fuzz: arbitrary bytes never escape as anything but ParseError") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> byte(0, 255), len(0, 24);
  for (int n = 0; n < 20000; ++n) {
    std::string s(static_cast<std::size_t>(len(rng)), '\0');
    for (char& ch : s) ch = static_cast<char>(byte(rng));
    try {
      const auto f = parse_field(s);
      (void)f.to_string();
    } catch (const ParseError&) {
    }
  }
}

TEST_CASE("derivative simplification keeps constants constant") {
  CHECK(parse_field("3*pi").derivative(0).is_constant());
  CHECK(parse_field("x").derivative(1).is_constant());
  CHECK(parse_field("x").derivative(0)(5, 5) == 1.0);
  const DifferentiableField f(parse_field("x^3*y^2"));
  const auto j = f.jet(2.0, 3.0);
  CHECK(j.value == 72.0);
  CHECK(j.grad[0] == 108.0);
  CHECK(j.grad[1] == 48.0);
  CHECK(j.hess[0] == 108.0);
  CHECK(j.hess[1] == 72.0);
  CHECK(j.hess[2] == 16.0);
}
