#pragma once

#include <memory>
#include <vector>

#include "nsbf/coefficients.hpp"

namespace nsbf {

// c, s and their x-derivatives at (omega, x). The quotients by omega are
// evaluated termwise so they stay finite and smooth through omega = 0.
struct SolutionValues {
  cplx c, s, s_over_omega;
  cplx c_prime, s_prime, s_prime_over_omega;
};

struct OmegaDerivatives {
  cplx dc_domega, ds_domega;
};

class NsbfSolver {
 public:
  explicit NsbfSolver(std::shared_ptr<const CoefficientSet> cs, int N_active = -1);

  const CoefficientSet& coefficients() const { return *cs_; }
  const GridPtr& grid() const { return cs_->grid; }
  cplx h() const { return cs_->h; }
  int N() const { return N_; }
  void set_N(int N);

  // By node index (fast path) or by coordinate (must be a node).
  SolutionValues eval(cplx omega, std::size_t node) const;
  SolutionValues eval_basis(cplx omega, double x) const;
  OmegaDerivatives omega_derivatives(cplx omega, std::size_t node) const;
  OmegaDerivatives eval_omega_derivatives(cplx omega, double x) const;

  // Partial sums of the kernel expansions; needs x > 0 a node, |t| <= x.
  cplx eval_kernel(double x, double t) const;
  cplx eval_kernel1(double x, double t) const;

 private:
  std::size_t node_of(double x) const;
  // beta_0..beta_N and gamma_0..gamma_N at a node; the right end is cached.
  void coefficients_at(std::size_t node, std::vector<cplx>& beta, std::vector<cplx>& gamma) const;

  std::shared_ptr<const CoefficientSet> cs_;
  int N_;
  std::vector<cplx> beta_b_, gamma_b_;
};

// cos z and sin z for z = omega * x with the rounding error of the product
// folded back in (matters once |omega x| reaches the thousands).
void cos_sin_of_product(cplx omega, double x, cplx& cos_z, cplx& sin_z);

}  // namespace nsbf
