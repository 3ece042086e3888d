#include "nsbf/spps.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nsbf/errors.hpp"

namespace nsbf {

namespace {

double max_abs(const SampledFunction& a) { return a.sup_norm(); }

// Plain series on one grid: y_{k+1} = int int q y_k from the left end.
PicardPair picard_series(const SampledFunction& q, const PicardOptions& options) {
  const GridPtr& grid = q.grid();
  PicardPair out;
  SampledFunction u_term(grid, 1.0);
  SampledFunction v_term = coordinate(grid);
  out.u = u_term;
  out.v = v_term;
  out.u_prime = SampledFunction(grid, 0.0);
  out.v_prime = SampledFunction(grid, 1.0);

  for (int k = 1; k <= options.max_iter; ++k) {
    const SampledFunction du = cumulative_integral(q * u_term);
    const SampledFunction dv = cumulative_integral(q * v_term);
    u_term = cumulative_integral(du);
    v_term = cumulative_integral(dv);
    out.u_prime += du;
    out.v_prime += dv;
    out.u += u_term;
    out.v += v_term;
    out.iterations = k;

    if (!out.u.all_finite() || !out.v.all_finite())
      throw NumericalError("picard_pair: iteration overflowed after " + std::to_string(k) +
                           " terms; the interval is too long or q too large");

    const double tu = std::max(max_abs(u_term), max_abs(du));
    const double tv = std::max(max_abs(v_term), max_abs(dv));
    const double su = std::max({1.0, max_abs(out.u), max_abs(out.u_prime)});
    const double sv = std::max({1.0, max_abs(out.v), max_abs(out.v_prime)});
    if (tu < options.tol * su && tv < options.tol * sv) return out;
  }
  throw NumericalError("picard_pair: no convergence after " + std::to_string(options.max_iter) +
                       " terms; the interval is too long or q too large for the series");
}

// Panel-aligned segment ends [0 = e_0 < e_1 < ... = n-1] such that
// L^2 max|q| stays below the growth budget on each segment.
std::vector<std::size_t> segment_ends(const SampledFunction& q, double budget) {
  const std::size_t last = q.size() - 1;
  const double h = q.grid()->step();
  std::vector<std::size_t> ends{0};
  std::size_t a = 0;
  while (a < last) {
    std::size_t e = a;
    double qmax = 0.0;
    while (e < last) {
      double m = qmax;
      for (std::size_t i = e; i <= e + 5; ++i) m = std::max(m, std::abs(q[i]));
      const double len = static_cast<double>(e + 5 - a) * h;
      if (e > a && len * len * m > budget) break;
      qmax = m;
      e += 5;
    }
    ends.push_back(e);
    a = e;
  }
  return ends;
}

}  // namespace

PicardPair picard_pair(const SampledFunction& q, const PicardOptions& options) {
  const GridPtr& grid = q.grid();
  if (grid->kind() != GridKind::uniform || options.segment_budget <= 0.0)
    return picard_series(q, options);
  const auto ends = segment_ends(q, options.segment_budget);
  if (ends.size() == 2) return picard_series(q, options);

  // Restart the series on each segment and carry the fundamental pair
  // across: y = y(a) u_s + y'(a) v_s. Avoids the cancellation that the
  // single series suffers when |q| x^2 is large.
  PicardPair out;
  out.u = SampledFunction(grid, 0.0);
  out.v = out.u_prime = out.v_prime = out.u;
  out.u[0] = 1.0;
  out.v_prime[0] = 1.0;
  const double h = grid->step();
  for (std::size_t s = 0; s + 1 < ends.size(); ++s) {
    const std::size_t a = ends[s], e = ends[s + 1];
    auto sub = Grid::make(GridKind::uniform, static_cast<double>(e - a) * h, e - a + 1);
    std::vector<cplx> qs(q.values().begin() + a, q.values().begin() + e + 1);
    const PicardPair loc = picard_series(SampledFunction(sub, std::move(qs)), options);
    out.iterations = std::max(out.iterations, loc.iterations);
    const cplx u0 = out.u[a], du0 = out.u_prime[a], v0 = out.v[a], dv0 = out.v_prime[a];
    for (std::size_t i = a + 1; i <= e; ++i) {
      const std::size_t j = i - a;
      out.u[i] = u0 * loc.u[j] + du0 * loc.v[j];
      out.u_prime[i] = u0 * loc.u_prime[j] + du0 * loc.v_prime[j];
      out.v[i] = v0 * loc.u[j] + dv0 * loc.v[j];
      out.v_prime[i] = v0 * loc.u_prime[j] + dv0 * loc.v_prime[j];
    }
    if (!out.u.all_finite() || !out.v.all_finite())
      throw NumericalError("picard_pair: solution overflowed on [" + std::to_string(grid->node(a)) + ", " +
                           std::to_string(grid->node(e)) + "]");
  }
  return out;
}

ParticularSolution particular_solution(const SampledFunction& q, double vanishing_tol,
                                       const PicardOptions& options) {
  const PicardPair pp = picard_pair(q, options);
  const cplx i(0.0, 1.0);
  ParticularSolution ps;
  ps.f = pp.u + pp.v * i;
  ps.f_prime = pp.u_prime + pp.v_prime * i;
  ps.f[0] = 1.0;
  ps.h = ps.f_prime[0];
  double m = std::abs(ps.f[0]);
  for (auto v : ps.f.values()) m = std::min(m, std::abs(v));
  ps.min_abs = m;
  if (!(m >= vanishing_tol))
    throw NumericalError("particular solution u + i v nearly vanishes (min |f| = " + std::to_string(m) +
                         "); supply a non-vanishing particular solution explicitly");
  return ps;
}

ParticularSolution particular_solution_from(SampledFunction f, std::optional<SampledFunction> f_prime,
                                            double vanishing_tol) {
  if (std::abs(f[0] - 1.0) > 1e-12)
    throw ConfigError("particular solution must satisfy f(0) = 1");
  ParticularSolution ps;
  ps.f_prime = f_prime ? std::move(*f_prime) : derivative(f);
  ps.f = std::move(f);
  ps.f[0] = 1.0;
  ps.h = ps.f_prime[0];
  double m = 1.0;
  for (auto v : ps.f.values()) m = std::min(m, std::abs(v));
  ps.min_abs = m;
  if (!(m >= vanishing_tol))
    throw NumericalError("supplied particular solution vanishes on the interval (min |f| = " +
                         std::to_string(m) + ")");
  return ps;
}

FormalPowers formal_powers(const ParticularSolution& ps, int K) {
  if (K < 1) throw std::invalid_argument("formal_powers: K must be at least 1");
  if (!(ps.min_abs > 0.0)) throw NumericalError("formal_powers: f vanishes");
  const GridPtr& grid = ps.f.grid();
  const SampledFunction f2 = ps.f * ps.f;
  const SampledFunction inv_f2 = SampledFunction(grid, 1.0) / f2;
  const SampledFunction inv_f = SampledFunction(grid, 1.0) / ps.f;
  const SampledFunction log_deriv = ps.f_prime / ps.f;

  FormalPowers fp;
  fp.X.reserve(K + 1);
  fp.X_tilde.reserve(K + 1);
  fp.X.emplace_back(grid, 1.0);
  fp.X_tilde.emplace_back(grid, 1.0);
  for (int n = 1; n <= K; ++n) {
    // X^(n) uses (f^2)^{(-1)^n}, X~^(n) the reciprocal weight.
    const bool odd = n % 2 == 1;
    const auto& w = odd ? inv_f2 : f2;
    const auto& wt = odd ? f2 : inv_f2;
    fp.X.push_back(cumulative_integral(fp.X.back() * w) * cplx(n));
    fp.X_tilde.push_back(cumulative_integral(fp.X_tilde.back() * wt) * cplx(n));
    if (!fp.X.back().all_finite() || !fp.X_tilde.back().all_finite())
      throw NumericalError("formal_powers: recursive integral X^(" + std::to_string(n) +
                           ") overflowed; K is too large for this interval");
  }

  fp.phi.reserve(K + 1);
  fp.psi.reserve(K + 1);
  fp.phi_prime.reserve(K + 1);
  for (int k = 0; k <= K; ++k) {
    const bool odd = k % 2 == 1;
    fp.phi.push_back(ps.f * (odd ? fp.X[k] : fp.X_tilde[k]));
    fp.psi.push_back(inv_f * (odd ? fp.X_tilde[k] : fp.X[k]));
  }
  for (int k = 0; k <= K; ++k) {
    SampledFunction d = log_deriv * fp.phi[k];
    if (k > 0) d += fp.psi[k - 1] * cplx(k);
    fp.phi_prime.push_back(std::move(d));
  }
  return fp;
}

}  // namespace nsbf
