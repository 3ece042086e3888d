#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nsbf {

using cplx = std::complex<double>;

enum class GridKind { uniform, chebyshev };

const char* to_string(GridKind kind);
GridKind grid_kind_from_string(const std::string& name);

class Grid;
using GridPtr = std::shared_ptr<const Grid>;

// Nodes on [0,b], ascending, nodes[0]=0 and nodes[n-1]=b.
// Uniform grids need (n-1) % 5 == 0 so every node sits in a six-point panel.
class Grid {
 public:
  static GridPtr make(GridKind kind, double b, std::size_t n);

  GridKind kind() const { return kind_; }
  double b() const { return b_; }
  std::size_t size() const { return nodes_.size(); }
  double node(std::size_t i) const { return nodes_[i]; }
  std::span<const double> nodes() const { return nodes_; }

  // Spacing of a uniform grid; meaningless for Chebyshev grids.
  double step() const { return b_ / static_cast<double>(nodes_.size() - 1); }

  // Index of the node equal to x within rel_tol*b, if any.
  std::optional<std::size_t> index_of(double x, double rel_tol = 1e-10) const;

 private:
  Grid(GridKind kind, double b, std::vector<double> nodes)
      : kind_(kind), b_(b), nodes_(std::move(nodes)) {}

  GridKind kind_;
  double b_;
  std::vector<double> nodes_;
};

// Complex samples of a function at the nodes of a grid.
class SampledFunction {
 public:
  SampledFunction() = default;
  explicit SampledFunction(GridPtr grid, cplx fill = 0.0);
  SampledFunction(GridPtr grid, std::vector<cplx> values);

  template <class F>
  static SampledFunction from(GridPtr grid, F&& fn) {
    std::vector<cplx> v(grid->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(grid->node(i));
    return SampledFunction(std::move(grid), std::move(v));
  }

  const GridPtr& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  cplx operator[](std::size_t i) const { return values_[i]; }
  cplx& operator[](std::size_t i) { return values_[i]; }
  cplx front() const { return values_.front(); }
  cplx back() const { return values_.back(); }

  std::span<const cplx> values() const { return values_; }
  std::span<cplx> values() { return values_; }

  double sup_norm() const;
  double max_abs_imag() const;
  bool all_finite() const;

  SampledFunction& operator+=(const SampledFunction& o);
  SampledFunction& operator-=(const SampledFunction& o);
  SampledFunction& operator*=(const SampledFunction& o);
  SampledFunction& operator/=(const SampledFunction& o);
  SampledFunction& operator*=(cplx s);
  SampledFunction& operator+=(cplx s);

 private:
  void require_same_grid(const SampledFunction& o) const;

  GridPtr grid_;
  std::vector<cplx> values_;
};

SampledFunction operator+(SampledFunction a, const SampledFunction& b);
SampledFunction operator-(SampledFunction a, const SampledFunction& b);
SampledFunction operator*(SampledFunction a, const SampledFunction& b);
SampledFunction operator/(SampledFunction a, const SampledFunction& b);
SampledFunction operator*(SampledFunction a, cplx s);
SampledFunction operator*(cplx s, SampledFunction a);
SampledFunction operator+(SampledFunction a, cplx s);
SampledFunction operator-(SampledFunction a, cplx s);

// The identity function x on the grid.
SampledFunction coordinate(const GridPtr& grid);

// F(x_i) = integral of sf over [0, x_i]; F(0) = 0.
// Uniform grids: six-point Newton-Cotes per panel, the degree-5 interpolant
// integrated over each subinterval. Chebyshev grids: Clenshaw-Curtis with
// the Filippi indefinite-integral coefficients.
SampledFunction cumulative_integral(const SampledFunction& sf);

// Integral over the whole interval using the same rule.
cplx definite_integral(const SampledFunction& sf);

// First derivative of the sampled data (sixth-order finite differences on
// uniform grids, Chebyshev spectral differentiation otherwise).
SampledFunction derivative(const SampledFunction& sf);

// Second derivative by an eighth-order central stencil (one-sided
// stencils near the ends). Uniform grids only; used for ODE residual checks.
SampledFunction second_difference(const SampledFunction& sf);

// Weights w[m][k] = integral over [m, m+1] of the k-th Lagrange basis
// polynomial on nodes 0..5; exposed for tests.
const std::array<std::array<double, 6>, 5>& newton_cotes_subinterval_weights();

}  // namespace nsbf
