#pragma once

#include <span>
#include <vector>

#include "nsbf/grid.hpp"
#include "nsbf/spps.hpp"

namespace nsbf {

// p_{j,k} = int_{-1}^{1} P_j(y) y^k dy (zero unless k >= j with equal parity).
double legendre_moment(int j, int k);

struct LegendreData {
  std::vector<std::vector<double>> l;  // l[n][k]: coefficient of x^k in P_n
  std::vector<std::vector<double>> p;  // p[j][k] = legendre_moment(j, k)
};

LegendreData legendre_data(int n_max);

enum class CoefficientRoute { recurrent, direct, definition };

// sigma_n = x^n beta_n and tau_n = x^n gamma_n, stored divided by b^n so
// that long intervals (b^n ~ 1e320 for b = 100, n = 160) stay in range:
// sigma_hat[n](x) = (x/b)^n beta_n(x).
struct CoefficientSet {
  int N = 0;
  GridPtr grid;
  cplx h;
  SampledFunction q_cum;  // int_0^x q
  SampledFunction q;
  std::vector<SampledFunction> sigma_hat, tau_hat;
  CoefficientRoute route = CoefficientRoute::recurrent;

  double b() const { return grid->b(); }
  // beta_n and gamma_n at node i. beta_n(0) = 0; gamma_n(0) for n >= 1 is a
  // linear extrapolation from nodes 1 and 2 (heuristic).
  cplx beta(int n, std::size_t i) const;
  cplx gamma(int n, std::size_t i) const;
  // beta_0..beta_N (resp. gamma) at node i, written to out (size N+1).
  void betas(std::size_t i, std::span<cplx> out) const;
  void gammas(std::size_t i, std::span<cplx> out) const;
};

// Recurrent integration from the seeds sigma_0, tau_0, sigma_1, tau_1.
CoefficientSet coefficients_recurrent(const ParticularSolution& ps, const SampledFunction& q, int N);

// Node lookup for beta_at/gamma_at; throws ConfigError when x is off-grid.
cplx beta_at(const CoefficientSet& cs, int n, double x);
cplx gamma_at(const CoefficientSet& cs, int n, double x);

// Cross-validation routes; both lose accuracy exponentially in n. Values at
// x = 0 are set to 0 (the continuity limit).
std::vector<SampledFunction> beta_via_definition(const FormalPowers& fp, int N);
SampledFunction beta_via_direct(const FormalPowers& fp, int n);
SampledFunction gamma_via_direct(const FormalPowers& fp, const SampledFunction& q_cum, cplx h, int n);

}  // namespace nsbf
