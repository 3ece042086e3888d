#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nsbf/expr.hpp"

using namespace nsbf;

namespace {
bool close(cplx a, cplx b, double tol = 1e-14) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }
}  // namespace

TEST_CASE("parse and evaluate the documented examples") {
  CHECK(close(Expr::parse("exp(x)").evaluate(0.0), 1.0));
  CHECK(close(Expr::parse("1/(x+0.1)^2").evaluate(0.0), 100.0));
  CHECK(close(Expr::parse("(1+i)*x^2").evaluate(2.0), cplx(4.0, 4.0)));
  CHECK(close(Expr::parse("-12*sech(x-8)^2").evaluate(8.0), -12.0));
  CHECK(Expr::parse("pi").evaluate() == cplx(std::numbers::pi));
  CHECK(Expr::parse("x^2").evaluate(cplx(0.0, 1.0)) == cplx(-1.0, 0.0));
  const char* gl = "2*((1+x/2+sin(2*x)/4)*sin(2*x)+cos(x)^4)/(1+x/2+sin(2*x)/4)^2";
  CHECK(close(Expr::parse(gl).evaluate(0.0), 2.0));
}

TEST_CASE("precedence and associativity") {
  CHECK(close(Expr::parse("-x^2").evaluate(3.0), -9.0));
  CHECK(close(Expr::parse("2^3^2").evaluate(), 512.0));
  CHECK(close(Expr::parse("2^-1").evaluate(), 0.5));
  CHECK(close(Expr::parse("1 - 2 - 3").evaluate(), -4.0));
  CHECK(close(Expr::parse("12 / 3 / 2").evaluate(), 2.0));
  CHECK(close(Expr::parse("2 + 3 * 4").evaluate(), 14.0));
  CHECK(close(Expr::parse("  ( 2 + 3 ) * 4 ").evaluate(), 20.0));
  CHECK(close(Expr::parse("3i + 1").evaluate(), cplx(1.0, 3.0)));
  CHECK(close(Expr::parse("2.5e-1*4").evaluate(), 1.0));
}

TEST_CASE("variable symbol is per context") {
  auto bc = Expr::parse("i*w", "w");
  CHECK(close(bc.evaluate(cplx(0.0, 2.0)), -2.0));
  CHECK_THROWS_AS(Expr::parse("x+1", "w"), ParseError);
  CHECK(Expr::parse("sqrt(2)+pi", "w").is_constant());
  CHECK_FALSE(bc.is_constant());
}

TEST_CASE("functions") {
  const cplx z(0.3, -0.2);
  CHECK(close(Expr::parse("sin(x)").evaluate(z), std::sin(z)));
  CHECK(close(Expr::parse("cos(x)").evaluate(z), std::cos(z)));
  CHECK(close(Expr::parse("tan(x)").evaluate(z), std::tan(z)));
  CHECK(close(Expr::parse("log(x)").evaluate(z), std::log(z)));
  CHECK(close(Expr::parse("sqrt(x)").evaluate(z), std::sqrt(z)));
  CHECK(close(Expr::parse("abs(x)").evaluate(z), std::abs(z)));
  CHECK(close(Expr::parse("sinh(x)").evaluate(z), std::sinh(z)));
  CHECK(close(Expr::parse("cosh(x)").evaluate(z), std::cosh(z)));
  CHECK(close(Expr::parse("tanh(x)").evaluate(z), std::tanh(z)));
  CHECK(close(Expr::parse("sech(x)").evaluate(z), 1.0 / std::cosh(z)));
}

TEST_CASE("syntax errors carry a position") {
  try {
    Expr::parse("1 + * 2");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position() == 4);
  }
  CHECK_THROWS_AS(Expr::parse(""), ParseError);
  CHECK_THROWS_AS(Expr::parse("sin x"), ParseError);
  CHECK_THROWS_AS(Expr::parse("foo(x)"), ParseError);
  CHECK_THROWS_AS(Expr::parse("(1+2"), ParseError);
  CHECK_THROWS_AS(Expr::parse("2x"), ParseError);
  CHECK_THROWS_AS(Expr::parse("sin(1,2)"), ParseError);
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(Expr::parse("1/x").evaluate(0.0), EvaluationError);
  CHECK_THROWS_AS(Expr::parse("log(x)").evaluate(0.0), EvaluationError);
  CHECK_THROWS_AS(Expr::parse("x^-1").evaluate(0.0), EvaluationError);
}

TEST_CASE("sample evaluates at nodes and reports the failing node") {
  auto g = Grid::make(GridKind::uniform, std::numbers::pi, 21);
  auto zero = sample(Expr::parse("0"), g);
  CHECK(zero.sup_norm() == 0.0);
  auto ex = sample(Expr::parse("exp(x)"), g);
  for (std::size_t i = 0; i < g->size(); ++i) CHECK(close(ex[i], std::exp(g->node(i))));
  CHECK(is_real_valued(ex));
  CHECK_FALSE(is_real_valued(sample(Expr::parse("(1+i)*x^2"), g)));
  try {
    sample(Expr::parse("1/(x-pi)"), g);
    FAIL("expected EvaluationError");
  } catch (const EvaluationError& e) {
    CHECK(std::string(e.what()).find("node 20") != std::string::npos);
  }
}

TEST_CASE("print round-trips through parse") {
  const char* samples[] = {"-x^2", "2^3^2", "(1+i)*x^2 - 3.5e-2/x", "-12*sech(x-8)^2",
                           "2*((1+x/2+sin(2*x)/4)*sin(2*x)+cos(x)^4)/(1+x/2+sin(2*x)/4)^2",
                           "--x", "exp(-x)*4i"};
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (const char* s : samples) {
    auto e = Expr::parse(s);
    auto again = Expr::parse(e.print());
    CHECK(again.print() == e.print());
    for (int k = 0; k < 5; ++k) {
      const cplx z(u(rng), u(rng) - 1.0);
      CHECK(again.evaluate(z) == e.evaluate(z));
    }
  }
  auto c = Expr::constant(cplx(1.25, -0.5));
  CHECK(c.evaluate() == cplx(1.25, -0.5));
}
