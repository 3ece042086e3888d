#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nsbf/coefficients.hpp"

namespace nsbf {

// Distance of the truncated kernel sums from their known boundary values:
//   eps1 = |sum beta_j/x - (h/2 + Q/2)|      eps2 = |sum (-1)^j beta_j/x - h/2|
//   d1   = |sum gamma_j/x - K1(x,x)|         d2   = |sum (-1)^j gamma_j/x - K1(x,-x)|
// with K1(x,x) = (q(x) + hQ + Q^2/2)/4 and K1(x,-x) = (q(0) + hQ)/4.
struct ResidualRow {
  int N = 0;
  double eps1 = 0, eps2 = 0, d1 = 0, d2 = 0;
  double worst() const;
};

struct ResidualPair {
  double first = 0, second = 0;
};

ResidualPair goursat_residuals(const CoefficientSet& cs, double x, int N);
ResidualPair kernel1_residuals(const CoefficientSet& cs, double x, int N);

// Same from explicit coefficient values (for the cross-validation routes).
ResidualPair goursat_residuals(std::span<const cplx> beta, double x, cplx h, cplx q_cum);

// Rows N = 0..cs.N at node i, built from running sums.
std::vector<ResidualRow> residual_table(const CoefficientSet& cs, std::size_t node);

struct NSelection {
  int N_star = 0;
  bool stabilized = false;  // last five worst-residuals within 10% of each other
  std::vector<ResidualRow> table;
  std::vector<std::string> warnings;
};

// argmin over N of the worst residual at x (default: the right end);
// ties go to the smaller N.
NSelection select_N(const CoefficientSet& cs);
NSelection select_N(const CoefficientSet& cs, double x);

// Columns: N,eps1,eps2,d1,d2
void write_residual_csv(std::ostream& os, const std::vector<ResidualRow>& rows);

}  // namespace nsbf
