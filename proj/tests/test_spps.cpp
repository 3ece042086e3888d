#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nsbf/errors.hpp"
#include "nsbf/expr.hpp"
#include "nsbf/spps.hpp"

using namespace nsbf;

namespace {
// Max error, relative where |exact| > 1.
double max_err(const SampledFunction& a, auto&& exact) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const cplx ex = exact(a.grid()->node(i));
    e = std::max(e, std::abs(a[i] - ex) / std::max(1.0, std::abs(ex)));
  }
  return e;
}

// ODE residual y'' - q y away from the one-sided end stencils.
double interior_residual(const SampledFunction& y, const SampledFunction& q) {
  const auto r = second_difference(y) - q * y;
  double m = 0.0;
  for (std::size_t i = 4; i + 4 < r.size(); ++i) m = std::max(m, std::abs(r[i]));
  return m;
}
}  // namespace

TEST_CASE("zero potential gives u = 1, v = x") {
  auto g = Grid::make(GridKind::uniform, 3.0, 301);
  auto pp = picard_pair(SampledFunction(g, 0.0));
  CHECK(max_err(pp.u, [](double) { return 1.0; }) == 0.0);
  CHECK(max_err(pp.v, [](double x) { return x; }) < 1e-15);
  auto ps = particular_solution(SampledFunction(g, 0.0));
  CHECK(ps.h == cplx(0.0, 1.0));
  CHECK(ps.min_abs == doctest::Approx(1.0));
}

TEST_CASE("constant potential gives cosh and sinh") {
  for (auto kind : {GridKind::uniform, GridKind::chebyshev}) {
    auto g = Grid::make(kind, 2.0, kind == GridKind::uniform ? 2001 : 101);
    auto pp = picard_pair(SampledFunction(g, 1.0));
    CHECK(max_err(pp.u, [](double x) { return std::cosh(x); }) < 1e-13);
    CHECK(max_err(pp.v, [](double x) { return std::sinh(x); }) < 1e-13);
    CHECK(max_err(pp.u_prime, [](double x) { return std::sinh(x); }) < 1e-13);
    CHECK(max_err(pp.v_prime, [](double x) { return std::cosh(x); }) < 1e-13);
  }
}

TEST_CASE("particular solution satisfies the ODE and the Wronskian identity") {
  // The stencil's roundoff floor is about 10 eps |u| / h^2, so keep h moderate.
  auto g = Grid::make(GridKind::uniform, std::numbers::pi, 1201);
  auto q = sample(Expr::parse("exp(x)"), g);
  auto pp = picard_pair(q);
  CHECK(interior_residual(pp.u, q) < 1e-8 * pp.u.sup_norm());
  CHECK(interior_residual(pp.v, q) < 1e-8 * pp.v.sup_norm());
  auto w = pp.u * pp.v_prime - pp.u_prime * pp.v;
  const double scale = pp.u.sup_norm() * pp.v_prime.sup_norm();
  CHECK(max_err(w, [](double) { return 1.0; }) < 1e-14 * scale);
  auto ps = particular_solution(q);
  CHECK(ps.h == cplx(0.0, 1.0));
  CHECK(ps.f[0] == cplx(1.0));
  CHECK(ps.min_abs > 0.5);
}

TEST_CASE("complex potential particular solution") {
  auto g = Grid::make(GridKind::uniform, std::numbers::pi, 1201);
  auto q = sample(Expr::parse("(1+i)*x^2"), g);
  auto ps = particular_solution(q);
  CHECK(interior_residual(ps.f, q) < 1e-8 * ps.f.sup_norm());
  CHECK(ps.min_abs > 1e-3);
}

TEST_CASE("overridden particular solution and formal powers") {
  auto g = Grid::make(GridKind::uniform, 1.5, 1501);
  SUBCASE("f = exp(x): phi_1 = sinh, and phi_k solve the recursion") {
    auto f = sample(Expr::parse("exp(x)"), g);
    auto ps = particular_solution_from(f, f);
    CHECK(ps.h == cplx(1.0));
    auto fp = formal_powers(ps, 4);
    CHECK(max_err(fp.phi[1], [](double x) { return std::sinh(x); }) < 1e-14);
    CHECK(max_err(fp.phi[0], [](double x) { return std::exp(x); }) < 1e-14);
    // phi_prime from the identity against numerical differentiation
    for (int k = 0; k <= 4; ++k) {
      auto d = derivative(fp.phi[k]) - fp.phi_prime[k];
      CHECK(d.sup_norm() < 1e-9);
    }
  }
  SUBCASE("f = 1: phi_k = x^k") {
    auto ps = particular_solution_from(SampledFunction(g, 1.0));
    CHECK(std::abs(ps.h) < 1e-11);  // one-sided stencil on a constant: roundoff / h
    auto fp = formal_powers(ps, 8);
    for (int k = 0; k <= 8; ++k) {
      CHECK(max_err(fp.phi[k], [k](double x) { return std::pow(x, k); }) < 1e-13);
      CHECK(max_err(fp.psi[k], [k](double x) { return std::pow(x, k); }) < 1e-13);
    }
  }
  SUBCASE("derivative is taken numerically when absent") {
    auto f = sample(Expr::parse("cosh(x)"), g);
    auto ps = particular_solution_from(f);
    CHECK(std::abs(ps.h) < 1e-11);
    CHECK(max_err(ps.f_prime, [](double x) { return std::sinh(x); }) < 1e-10);
  }
  CHECK_THROWS_AS(particular_solution_from(SampledFunction(g, 2.0)), ConfigError);
  CHECK_THROWS_AS(particular_solution_from(sample(Expr::parse("1-x"), g)), NumericalError);
}

TEST_CASE("long interval: Picard converges for bounded potentials") {
  auto g = Grid::make(GridKind::uniform, 16.0, 3201);
  auto q = sample(Expr::parse("-12*sech(x-8)^2"), g);
  auto ps = particular_solution(q);
  const double res = interior_residual(ps.f, q);
  CHECK(res < 1e-8 * ps.f.sup_norm());
  // the single series loses most digits to cancellation here
  PicardOptions plain;
  plain.segment_budget = 0.0;
  auto pp = picard_pair(q, plain);
  CHECK(interior_residual(pp.u, q) > 100.0 * res);
}
