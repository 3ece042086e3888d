#pragma once

#include <optional>
#include <vector>

#include "nsbf/grid.hpp"

namespace nsbf {

struct PicardOptions {
  int max_iter = 200;
  // Stop once the newest term is below tol * max(1, |sum|_inf).
  double tol = 1e-16;
  // Uniform grids: restart the series whenever L^2 max|q| on the current
  // segment would exceed this budget (<= 0 disables restarts).
  double segment_budget = 4.0;
};

// u, v solve y'' = q y with (u, u')(0) = (1, 0) and (v, v')(0) = (0, 1).
struct PicardPair {
  SampledFunction u, u_prime, v, v_prime;
  int iterations = 0;
};

// Iterated double integration: y_{k+1}(x) = int_0^x int_0^t q y_k, restarted
// on segments of a uniform grid when the terms would grow large.
PicardPair picard_pair(const SampledFunction& q, const PicardOptions& options = {});

// Non-vanishing solution of f'' = q f with f(0) = 1 and h = f'(0).
struct ParticularSolution {
  SampledFunction f;
  SampledFunction f_prime;
  cplx h;
  double min_abs = 0.0;
};

inline constexpr double kVanishingTolerance = 1e-10;

// Default f = u + i v, so h = u'(0) + i = i; never vanishes for real q.
ParticularSolution particular_solution(const SampledFunction& q,
                                       double vanishing_tol = kVanishingTolerance,
                                       const PicardOptions& options = {});

// User-supplied f (must have f(0) = 1). Without f_prime the derivative is
// taken numerically from the samples.
ParticularSolution particular_solution_from(SampledFunction f,
                                            std::optional<SampledFunction> f_prime = std::nullopt,
                                            double vanishing_tol = kVanishingTolerance);

// Formal powers phi_k, psi_k built from the alternating recursive integrals
// X^(n) (weights f^2, 1/f^2, ... starting with 1/f^2) and X~^(n) (the
// opposite alternation). phi_prime[k] = k psi_{k-1} + (f'/f) phi_k.
struct FormalPowers {
  std::vector<SampledFunction> phi, psi, phi_prime;
  std::vector<SampledFunction> X, X_tilde;
};

FormalPowers formal_powers(const ParticularSolution& ps, int K);

}  // namespace nsbf
