#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsbf/accuracy.hpp"
#include "nsbf/expr.hpp"
#include "nsbf/solution.hpp"

namespace nsbf {

// alpha0 y(0) + mu0 y'(0) = 0,  alphab y(b) + mub y'(b) = 0.
// Each coefficient is an expression in the variable w (= omega).
struct BoundaryCondition {
  struct Values {
    cplx alpha0, mu0, alphab, mub;
  };

  Expr alpha0 = Expr::constant(1.0), mu0 = Expr::constant(0.0);
  Expr alphab = Expr::constant(1.0), mub = Expr::constant(0.0);

  static BoundaryCondition dirichlet() { return {}; }
  static BoundaryCondition parse(const std::string& alpha0, const std::string& mu0, const std::string& alphab,
                                 const std::string& mub);

  bool omega_dependent() const;
  // Throws NumericalError when either pair vanishes at omega.
  Values at(cplx omega) const;
};

struct SpectralProblem {
  std::shared_ptr<const NsbfSolver> solver;
  BoundaryCondition bc;
};

// particular_solution -> coefficients_recurrent(N) -> select_N, with the
// solver truncated at N_star.
struct PreparedProblem {
  SpectralProblem problem;
  NSelection selection;
};
PreparedProblem prepare_problem(const SampledFunction& q, BoundaryCondition bc, int N,
                                const std::optional<ParticularSolution>& ps = std::nullopt);

struct Eigenvalue {
  int index = 0;
  cplx omega, lambda;
  double residual = 0;  // |Phi_N(omega)|
  int iterations = 0;
};

struct Spectrum {
  std::vector<Eigenvalue> entries;
  std::vector<std::string> warnings;
};

// Phi_N(omega) = alphab y(b) + mub y'(b) for y = mu0 c - (alpha0 + mu0 h) s/omega.
cplx char_fn(const SpectralProblem& p, cplx omega);

// Real mode: positive lambda from a scan of Re Phi on [0, omega_max] and
// negative lambda from omega = i nu, nu in (0, nu_max]. With count > 0 the
// positive scan extends until the first count eigenvalues are known
// (omega_max is then a lower bound). nu_max < 0 picks a bound from q and the
// boundary coefficients.
struct RealSearch {
  int count = 0;
  double omega_max = 0;
  double nu_max = -1;
};
Spectrum find_real_spectrum(const SpectralProblem& p, const RealSearch& search);

// Rectangle in the omega plane.
struct Rectangle {
  double re0, re1, im0, im1;
};
Spectrum find_complex_spectrum(const SpectralProblem& p, const Rectangle& rect, int max_zeros = 1000);

// y = mu0 c_N - (alpha0 + mu0 h) s_N/omega at every node; optionally scaled
// to unit sup norm.
SampledFunction eigenfunction(const SpectralProblem& p, cplx omega, bool normalize = false);

// JSON: [{index, lambda_re, lambda_im, omega_re, omega_im, residual}, ...]
nlohmann::json spectrum_json(const Spectrum& s);
void write_spectrum_csv(std::ostream& os, const Spectrum& s);

}  // namespace nsbf
