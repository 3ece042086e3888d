#include "nsbf/accuracy.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <ostream>

#include "nsbf/errors.hpp"

namespace nsbf {

namespace {

std::size_t residual_node(const CoefficientSet& cs, double x) {
  const auto i = cs.grid->index_of(x);
  if (!i) throw ConfigError("x = " + std::to_string(x) + " is not a grid node");
  if (*i == 0) throw ConfigError("residuals need x > 0");
  return *i;
}

struct Targets {
  cplx k_plus, k_minus, k1_plus, k1_minus;
};

Targets targets(const CoefficientSet& cs, std::size_t i) {
  const cplx Q = cs.q_cum[i], h = cs.h;
  return {h / 2.0 + Q / 2.0, h / 2.0, 0.25 * (cs.q[i] + h * Q + 0.5 * Q * Q), 0.25 * (cs.q[0] + h * Q)};
}

}  // namespace

double ResidualRow::worst() const { return std::max({eps1, eps2, d1, d2}); }

std::vector<ResidualRow> residual_table(const CoefficientSet& cs, std::size_t i) {
  if (i == 0 || i >= cs.grid->size()) throw ConfigError("residuals need a node with x > 0");
  const double x = cs.grid->node(i);
  const Targets t = targets(cs, i);
  std::vector<ResidualRow> rows;
  rows.reserve(cs.N + 1);
  cplx sb = 0.0, ab = 0.0, sg = 0.0, ag = 0.0;
  for (int n = 0; n <= cs.N; ++n) {
    const double sign = n % 2 ? -1.0 : 1.0;
    const cplx b = cs.beta(n, i) / x, g = cs.gamma(n, i) / x;
    sb += b;
    ab += sign * b;
    sg += g;
    ag += sign * g;
    rows.push_back({n, std::abs(sb - t.k_plus), std::abs(ab - t.k_minus), std::abs(sg - t.k1_plus),
                    std::abs(ag - t.k1_minus)});
  }
  return rows;
}

ResidualPair goursat_residuals(const CoefficientSet& cs, double x, int N) {
  if (N < 0 || N > cs.N) throw ConfigError("N outside the computed range");
  const auto row = residual_table(cs, residual_node(cs, x))[N];
  return {row.eps1, row.eps2};
}

ResidualPair kernel1_residuals(const CoefficientSet& cs, double x, int N) {
  if (N < 0 || N > cs.N) throw ConfigError("N outside the computed range");
  const auto row = residual_table(cs, residual_node(cs, x))[N];
  return {row.d1, row.d2};
}

ResidualPair goursat_residuals(std::span<const cplx> beta, double x, cplx h, cplx q_cum) {
  cplx s = 0.0, a = 0.0;
  for (std::size_t j = 0; j < beta.size(); ++j) {
    s += beta[j] / x;
    a += (j % 2 ? -1.0 : 1.0) * beta[j] / x;
  }
  return {std::abs(s - (h / 2.0 + q_cum / 2.0)), std::abs(a - h / 2.0)};
}

NSelection select_N(const CoefficientSet& cs) { return select_N(cs, cs.b()); }

NSelection select_N(const CoefficientSet& cs, double x) {
  NSelection sel;
  sel.table = residual_table(cs, residual_node(cs, x));
  double best = sel.table[0].worst();
  for (const auto& r : sel.table) best = std::min(best, r.worst());
  // differences at roundoff level count as ties, so the smallest such N wins
  const double tie = best + 64.0 * std::numeric_limits<double>::epsilon();
  for (const auto& r : sel.table)
    if (r.worst() <= tie) {
      sel.N_star = r.N;
      break;
    }
  if (sel.table.size() >= 5) {
    double lo = 1e300, hi = 0.0;
    for (std::size_t k = sel.table.size() - 5; k < sel.table.size(); ++k) {
      lo = std::min(lo, sel.table[k].worst());
      hi = std::max(hi, sel.table[k].worst());
    }
    sel.stabilized = hi - lo <= 0.1 * hi;
  }
  if (sel.N_star == cs.N && cs.N > 0 && best > 0.0)
    sel.warnings.push_back("residual minimum at the largest computed order N = " + std::to_string(cs.N) +
                           "; recompute with a larger N");
  return sel;
}

void write_residual_csv(std::ostream& os, const std::vector<ResidualRow>& rows) {
  os << "N,eps1,eps2,d1,d2\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.6e,%.6e,%.6e,%.6e\n", r.N, r.eps1, r.eps2, r.d1, r.d2);
    os << buf;
  }
}

}  // namespace nsbf
