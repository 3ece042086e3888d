#include "nsbf/coefficients.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "nsbf/errors.hpp"

namespace nsbf {

namespace {

// v * r^n evaluated in extended range; results below double range flush to 0.
cplx scale_up(cplx v, double r, int n) {
  if (n == 0 || r == 1.0) return v;
  const long double p = std::pow(static_cast<long double>(r), n);
  return {static_cast<double>(v.real() * p), static_cast<double>(v.imag() * p)};
}

std::size_t node_or_throw(const CoefficientSet& cs, double x) {
  const auto i = cs.grid->index_of(x);
  if (!i) throw ConfigError("x = " + std::to_string(x) + " is not a grid node");
  return *i;
}

void check_order(const CoefficientSet& cs, int n) {
  if (n < 0 || n > cs.N)
    throw std::out_of_range("coefficient index " + std::to_string(n) + " outside 0.." + std::to_string(cs.N));
}

// phi_k(x) / x^k, with 0 at x = 0.
SampledFunction divided_power(const SampledFunction& phi, int k) {
  SampledFunction out = phi;
  const auto& g = *phi.grid();
  out[0] = 0.0;
  for (std::size_t i = 1; i < out.size(); ++i) out[i] = scale_up(phi[i], 1.0 / g.node(i), k);
  return out;
}

}  // namespace

double legendre_moment(int j, int k) {
  if (j < 0 || k < j || (j - k) % 2 != 0) return 0.0;
  // j = 2m + d, k = 2n + d
  const int d = j % 2, m = j / 2, n = k / 2;
  const double lg = 0.5 * std::log(std::numbers::pi) + std::lgamma(2.0 * n + 1 + d) -
                    (2.0 * n + d) * std::numbers::ln2 - std::lgamma(n - m + 1.0) - std::lgamma(1.5 + n + m + d);
  return std::exp(lg);
}

LegendreData legendre_data(int n_max) {
  LegendreData out;
  out.l.assign(n_max + 1, {});
  out.l[0] = {1.0};
  if (n_max >= 1) out.l[1] = {0.0, 1.0};
  for (int n = 1; n < n_max; ++n) {
    // (n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1}
    std::vector<double> next(n + 2, 0.0);
    for (int k = 0; k <= n; ++k) next[k + 1] += (2.0 * n + 1.0) * out.l[n][k] / (n + 1.0);
    for (int k = 0; k <= n - 1; ++k) next[k] -= n * out.l[n - 1][k] / (n + 1.0);
    out.l[n + 1] = std::move(next);
  }
  out.p.assign(n_max + 1, std::vector<double>(n_max + 1, 0.0));
  for (int j = 0; j <= n_max; ++j)
    for (int k = j; k <= n_max; k += 2) out.p[j][k] = legendre_moment(j, k);
  return out;
}

cplx CoefficientSet::beta(int n, std::size_t i) const {
  if (i == 0) return 0.0;
  return scale_up(sigma_hat[n][i], b() / grid->node(i), n);
}

cplx CoefficientSet::gamma(int n, std::size_t i) const {
  if (i == 0) {
    if (n == 0) return tau_hat[0][0];
    const double x1 = grid->node(1), x2 = grid->node(2);
    const cplx g1 = gamma(n, 1), g2 = gamma(n, 2);
    return g1 - x1 * (g2 - g1) / (x2 - x1);
  }
  return scale_up(tau_hat[n][i], b() / grid->node(i), n);
}

void CoefficientSet::betas(std::size_t i, std::span<cplx> out) const {
  for (int n = 0; n <= N && n < static_cast<int>(out.size()); ++n) out[n] = beta(n, i);
}

void CoefficientSet::gammas(std::size_t i, std::span<cplx> out) const {
  for (int n = 0; n <= N && n < static_cast<int>(out.size()); ++n) out[n] = gamma(n, i);
}

CoefficientSet coefficients_recurrent(const ParticularSolution& ps, const SampledFunction& q, int N) {
  if (N < 1) throw ConfigError("coefficient order N must be at least 1");
  const GridPtr& grid = ps.f.grid();
  const double b = grid->b();
  const std::size_t n_nodes = grid->size();
  CoefficientSet cs;
  cs.N = N;
  cs.grid = grid;
  cs.h = ps.h;
  cs.q = q;
  cs.q_cum = cumulative_integral(q);
  cs.route = CoefficientRoute::recurrent;

  const FormalPowers fp = formal_powers(ps, 1);
  const SampledFunction& f = ps.f;
  const SampledFunction& fpr = ps.f_prime;
  const SampledFunction& Q = cs.q_cum;
  const SampledFunction x = coordinate(grid);

  cs.sigma_hat.reserve(N + 1);
  cs.tau_hat.reserve(N + 1);
  cs.sigma_hat.push_back((f - 1.0) * cplx(0.5));
  cs.tau_hat.push_back((fpr - ps.h) * cplx(0.5) - Q * cplx(0.25));
  {
    SampledFunction s1(grid), t1(grid);
    for (std::size_t i = 0; i < n_nodes; ++i) {
      s1[i] = 1.5 * (fp.phi[1][i] - x[i]) / b;
      t1[i] = 1.5 * ((fpr[i] * fp.phi[1][i] + 1.0) / f[i] - 1.0 - 0.5 * x[i] * Q[i]) / b;
    }
    cs.sigma_hat.push_back(std::move(s1));
    cs.tau_hat.push_back(std::move(t1));
  }

  SampledFunction xf_prime = x * fpr;
  SampledFunction inv_f2(grid), xf(grid);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    inv_f2[i] = 1.0 / (f[i] * f[i]);
    xf[i] = x[i] * f[i];
  }
  const double inv_b2 = 1.0 / (b * b);
  SampledFunction work(grid);
  for (int n = 2; n <= N; ++n) {
    const SampledFunction& s = cs.sigma_hat[n - 2];
    const SampledFunction& t = cs.tau_hat[n - 2];
    for (std::size_t i = 0; i < n_nodes; ++i) work[i] = (xf_prime[i] + double(n - 1) * f[i]) * s[i];
    const SampledFunction eta = cumulative_integral(work);
    for (std::size_t i = 0; i < n_nodes; ++i) work[i] = inv_f2[i] * (eta[i] - xf[i] * s[i]);
    const SampledFunction theta = cumulative_integral(work);

    const double r = (2.0 * n + 1.0) / (2.0 * n - 3.0);
    const double c = 2.0 * (2.0 * n - 1.0);
    SampledFunction sn(grid), tn(grid);
    for (std::size_t i = 0; i < n_nodes; ++i) {
      const double xb = x[i].real() / b;
      sn[i] = r * (xb * xb * s[i] + c * inv_b2 * f[i] * theta[i]);
      tn[i] = r * (xb * xb * t[i] + c * inv_b2 * (fpr[i] * theta[i] + eta[i] / f[i]) -
                   (c - 2.0 * n + 1.0) * x[i].real() * inv_b2 * s[i]);
    }
    if (!sn.all_finite() || !tn.all_finite())
      throw NumericalError("coefficients_recurrent: non-finite values at order n = " + std::to_string(n));
    cs.sigma_hat.push_back(std::move(sn));
    cs.tau_hat.push_back(std::move(tn));
  }
  return cs;
}

cplx beta_at(const CoefficientSet& cs, int n, double x) {
  check_order(cs, n);
  return cs.beta(n, node_or_throw(cs, x));
}

cplx gamma_at(const CoefficientSet& cs, int n, double x) {
  check_order(cs, n);
  return cs.gamma(n, node_or_throw(cs, x));
}

std::vector<SampledFunction> beta_via_definition(const FormalPowers& fp, int N) {
  if (static_cast<int>(fp.phi.size()) <= N) throw std::invalid_argument("beta_via_definition: too few formal powers");
  std::vector<SampledFunction> beta;
  beta.reserve(N + 1);
  beta.push_back((fp.phi[0] - 1.0) * cplx(0.5));
  if (N >= 1) beta.push_back((divided_power(fp.phi[1], 1) - 1.0) * cplx(1.5));
  for (int k = 2; k <= N; ++k) {
    SampledFunction bk = divided_power(fp.phi[k], k) - 1.0;
    for (int j = k % 2; j <= k - 2; j += 2) bk -= beta[j] * cplx(legendre_moment(j, k));
    bk *= cplx(1.0 / legendre_moment(k, k));
    bk[0] = 0.0;
    beta.push_back(std::move(bk));
  }
  beta[0][0] = 0.0;
  if (N >= 1) beta[1][0] = 0.0;
  return beta;
}

SampledFunction beta_via_direct(const FormalPowers& fp, int n) {
  if (static_cast<int>(fp.phi.size()) <= n) throw std::invalid_argument("beta_via_direct: too few formal powers");
  const auto ld = legendre_data(n);
  SampledFunction sum(fp.phi[0].grid(), 0.0);
  for (int k = 0; k <= n; ++k)
    if (ld.l[n][k] != 0.0) sum += divided_power(fp.phi[k], k) * cplx(ld.l[n][k]);
  SampledFunction out = (sum - 1.0) * cplx((2.0 * n + 1.0) / 2.0);
  out[0] = 0.0;
  return out;
}

SampledFunction gamma_via_direct(const FormalPowers& fp, const SampledFunction& q_cum, cplx h, int n) {
  if (static_cast<int>(fp.phi_prime.size()) <= n)
    throw std::invalid_argument("gamma_via_direct: too few formal powers");
  const GridPtr& grid = q_cum.grid();
  const auto ld = legendre_data(n);
  SampledFunction sum(grid, 0.0);
  for (int k = 0; k <= n; ++k)
    if (ld.l[n][k] != 0.0) sum += divided_power(fp.phi_prime[k], k) * cplx(ld.l[n][k]);
  const cplx hterm = 0.5 * h * (n % 2 == 0 ? 2.0 : 0.0);
  SampledFunction out(grid);
  for (std::size_t i = 1; i < grid->size(); ++i)
    out[i] = (2.0 * n + 1.0) / 2.0 *
             (sum[i] - n * (n + 1.0) / (2.0 * grid->node(i)) - 0.5 * q_cum[i] - hterm);
  // x = 0: phi'_0(0) = h, the other terms cancel in the limit; extrapolate for n >= 1.
  if (n == 0)
    out[0] = 0.5 * (fp.phi_prime[0][0] - h);
  else
    out[0] = out[1] - grid->node(1) * (out[2] - out[1]) / (grid->node(2) - grid->node(1));
  return out;
}

}  // namespace nsbf
