#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nsbf/errors.hpp"
#include "nsbf/expr.hpp"
#include "nsbf/solution.hpp"
#include "support/ode_oracle.hpp"

using namespace nsbf;

namespace {

std::shared_ptr<const CoefficientSet> build(const std::string& q_text, double b, std::size_t n, int N,
                                            std::optional<ParticularSolution> ps = std::nullopt) {
  auto g = Grid::make(GridKind::uniform, b, n);
  auto q = sample(Expr::parse(q_text), g);
  if (!ps) ps = particular_solution(q);
  return std::make_shared<const CoefficientSet>(coefficients_recurrent(*ps, q, N));
}

const std::shared_ptr<const CoefficientSet>& paine1() {
  static const auto cs = build("exp(x)", std::numbers::pi, 20001, 40);
  return cs;
}

// c = u + h v and s from the oracle, at x = b.
struct OracleCS {
  oracle::State c, s;
};

OracleCS oracle_cs(const oracle::Potential& q, cplx omega, cplx h, double x) {
  const oracle::cplx w(omega.real(), omega.imag());
  const oracle::cplx hh(h.real(), h.imag());
  // c(omega, 0) = 1, c' = h;  s(omega, 0) = 0, s' = omega
  const auto c = oracle::shoot(q, w, {1.0L, hh}, x);
  const auto s = oracle::shoot(q, w, {0.0L, w}, x);
  return {c, s};
}

cplx to_c(oracle::cplx v) { return {static_cast<double>(v.real()), static_cast<double>(v.imag())}; }

oracle::cplx exp_q(oracle::real x) { return std::exp(x); }

}  // namespace

TEST_CASE("zero potential with f = 1 reproduces trigonometric solutions") {
  auto g = Grid::make(GridKind::uniform, 2.0, 201);
  auto ps = particular_solution_from(SampledFunction(g, 1.0), SampledFunction(g, 0.0));
  NsbfSolver solver(build("0", 2.0, 201, 8, ps));
  for (cplx w : {cplx(0.3), cplx(7.0), cplx(2.0, 0.5)}) {
    for (double x : {0.0, 0.5, 2.0}) {
      const auto v = solver.eval_basis(w, x);
      CHECK(std::abs(v.c - std::cos(w * x)) < 1e-12);
      CHECK(std::abs(v.s - std::sin(w * x)) < 1e-12);
      CHECK(std::abs(v.c_prime + w * std::sin(w * x)) < 1e-12 * std::abs(w));
      CHECK(std::abs(v.s_prime - w * std::cos(w * x)) < 1e-12 * std::abs(w));
      CHECK(std::abs(v.s_over_omega * w - v.s) < 1e-12);
      const auto d = solver.eval_omega_derivatives(w, x);
      CHECK(std::abs(d.dc_domega + x * std::sin(w * x)) < 1e-12);
      CHECK(std::abs(d.ds_domega - x * std::cos(w * x)) < 1e-12);
    }
  }
  CHECK_THROWS_AS(solver.eval_basis(1.0, 0.123), ConfigError);
  CHECK_THROWS_AS(solver.set_N(9), ConfigError);
}

TEST_CASE("zero potential with f = 1 + ix has a constant kernel") {
  NsbfSolver solver(build("0", 1.0, 201, 10));
  // roundoff in sigma_n is amplified by (b/x)^n when recovering beta_n at small x
  for (double x : {0.25, 1.0})
    for (double t : {-x, 0.0, 0.3 * x, x}) CHECK(std::abs(solver.eval_kernel(x, t) - cplx(0, 0.5)) < 1e-8);
  CHECK_THROWS_AS(solver.eval_kernel(0.5, 0.6), ConfigError);
  CHECK_THROWS_AS(solver.eval_kernel(0.0, 0.0), ConfigError);
}

TEST_CASE("omega = 0 values") {
  const auto& cs = paine1();
  NsbfSolver solver(cs);
  const double b = std::numbers::pi;
  const auto v = solver.eval_basis(0.0, b);
  CHECK(std::abs(v.c - (1.0 + 2.0 * cs->beta(0, cs->grid->size() - 1))) < 1e-15 * std::abs(v.c));
  CHECK(v.s == cplx(0.0));
  // s/omega at omega = 0 is the solution with y(0) = 0, y'(0) = 1
  const auto ref = oracle::shoot(exp_q, 0.0L, {0.0L, 1.0L}, b);
  CHECK(std::abs(v.s_over_omega - to_c(ref.y)) < 1e-11 * std::abs(to_c(ref.y)));
  CHECK(std::abs(v.s_prime_over_omega - to_c(ref.dy)) < 1e-11 * std::abs(to_c(ref.dy)));
  // continuity of the quotient through omega = 0
  const auto v2 = solver.eval_basis(1e-7, b);
  CHECK(std::abs(v2.s / 1e-7 - v.s_over_omega) < 1e-6 * std::abs(v.s_over_omega));
  const auto start = solver.eval_basis(0.7, 0.0);
  CHECK(start.c == cplx(1.0));
  CHECK(std::abs(start.c_prime - cs->h) < 1e-15);
  CHECK(start.s == cplx(0.0));
  CHECK(std::abs(start.s_prime_over_omega - 1.0) < 1e-15);
}

TEST_CASE("Paine 1 solutions match the Runge-Kutta oracle") {
  const auto& cs = paine1();
  NsbfSolver solver(cs);
  const double b = std::numbers::pi;
  for (double w : {0.5, 3.0, 10.0, 40.0}) {
    const auto v = solver.eval_basis(w, b);
    const auto ref = oracle_cs(exp_q, w, cs->h, b);
    CAPTURE(w);
    CHECK(std::abs(v.c - to_c(ref.c.y)) < 1e-10);
    CHECK(std::abs(v.c_prime - to_c(ref.c.dy)) < 1e-9);
    CHECK(std::abs(v.s - to_c(ref.s.y)) < 1e-10);
    CHECK(std::abs(v.s_prime - to_c(ref.s.dy)) < 1e-9);
  }
}

TEST_CASE("symmetry in omega") {
  NsbfSolver solver(paine1());
  for (double w : {0.7, 5.0, 31.0}) {
    const auto p = solver.eval_basis(w, std::numbers::pi);
    const auto m = solver.eval_basis(-w, std::numbers::pi);
    CHECK(std::abs(p.c - m.c) < 1e-13 * std::abs(p.c));
    CHECK(std::abs(p.s + m.s) < 1e-13 * std::max(1.0, std::abs(p.s)));
    CHECK(std::abs(p.s_over_omega - m.s_over_omega) < 1e-13 * std::abs(p.s_over_omega));
  }
}

TEST_CASE("omega derivatives match central differences") {
  NsbfSolver solver(paine1());
  const double b = std::numbers::pi;
  for (cplx w : {cplx(0.9), cplx(3.7), cplx(25.0), cplx(4.0, 0.8)}) {
    const double step = 1e-6 * std::max(1.0, std::abs(w));
    const auto d = solver.eval_omega_derivatives(w, b);
    const auto p = solver.eval_basis(w + step, b), m = solver.eval_basis(w - step, b);
    const cplx dc = (p.c - m.c) / (2 * step), ds = (p.s - m.s) / (2 * step);
    CAPTURE(w);
    CHECK(std::abs(d.dc_domega - dc) < 1e-6 * std::abs(d.dc_domega));
    CHECK(std::abs(d.ds_domega - ds) < 1e-6 * std::abs(d.ds_domega));
  }
  // c is even in omega, so dc/domega vanishes at 0
  CHECK(std::abs(solver.eval_omega_derivatives(0.0, b).dc_domega) < 1e-14);
}

TEST_CASE("truncation error decays with N at fixed omega") {
  const auto& cs = paine1();
  NsbfSolver solver(cs);
  const double b = std::numbers::pi, w = 5.0;
  const auto ref = to_c(oracle_cs(exp_q, w, cs->h, b).c.y);
  double prev = 1e300;
  for (int N : {4, 8, 12, 16}) {
    solver.set_N(N);
    const double err = std::abs(solver.eval_basis(w, b).c - ref);
    CAPTURE(N);
    CHECK(err < 0.5 * prev);
    prev = err;
  }
}

TEST_CASE("kernel Goursat values") {
  const auto& cs = paine1();
  NsbfSolver solver(cs);
  const double b = std::numbers::pi;
  const cplx Qb = std::exp(b) - 1.0;
  CHECK(std::abs(solver.eval_kernel(b, b) - (cs->h / 2.0 + Qb / 2.0)) < 1e-10);
  CHECK(std::abs(solver.eval_kernel(b, -b) - cs->h / 2.0) < 1e-10);
  // K_1(x,-x) = (q(0) + h Q(x))/4, from integrating along the characteristic t = -x
  const cplx k1_minus = 0.25 * (1.0 + cs->h * Qb);
  CHECK(std::abs(solver.eval_kernel1(b, -b) - k1_minus) < 1e-8);
  const cplx k1_plus = 0.25 * (std::exp(b) + cs->h * Qb + 0.5 * Qb * Qb);
  CHECK(std::abs(solver.eval_kernel1(b, b) - k1_plus) < 1e-8 * std::abs(k1_plus));
}
