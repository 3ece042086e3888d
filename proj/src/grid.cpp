#include "nsbf/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "nsbf/errors.hpp"

namespace nsbf {

const char* to_string(GridKind kind) {
  return kind == GridKind::uniform ? "uniform" : "chebyshev";
}

GridKind grid_kind_from_string(const std::string& name) {
  if (name == "uniform") return GridKind::uniform;
  if (name == "chebyshev") return GridKind::chebyshev;
  throw ConfigError("unknown grid kind '" + name + "' (expected uniform or chebyshev)");
}

GridPtr Grid::make(GridKind kind, double b, std::size_t n) {
  if (!(b > 0.0) || !std::isfinite(b)) throw ConfigError("grid: interval length b must be positive");
  if (n < 6) throw ConfigError("grid: at least 6 nodes are required");
  if (kind == GridKind::uniform && (n - 1) % 5 != 0)
    throw ConfigError("grid: uniform grids need (n-1) divisible by 5, got n=" + std::to_string(n));

  std::vector<double> nodes(n);
  const auto last = static_cast<double>(n - 1);
  if (kind == GridKind::uniform) {
    for (std::size_t i = 0; i < n; ++i) nodes[i] = b * static_cast<double>(i) / last;
  } else {
    // Chebyshev-Gauss-Lobatto points; sin form keeps the spacing near the
    // ends accurate.
    for (std::size_t i = 0; i < n; ++i) {
      const double s = std::sin(std::numbers::pi * static_cast<double>(i) / (2.0 * last));
      nodes[i] = b * s * s;
    }
  }
  nodes.front() = 0.0;
  nodes.back() = b;
  return GridPtr(new Grid(kind, b, std::move(nodes)));
}

std::optional<std::size_t> Grid::index_of(double x, double rel_tol) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), x);
  const double tol = rel_tol * b_;
  std::optional<std::size_t> best;
  double best_d = tol;
  for (auto c : {it, it == nodes_.begin() ? it : std::prev(it)}) {
    if (c == nodes_.end()) continue;
    const double d = std::abs(*c - x);
    if (d <= best_d) {
      best_d = d;
      best = static_cast<std::size_t>(c - nodes_.begin());
    }
  }
  return best;
}

// SampledFunction ------------------------------------------------------------

SampledFunction::SampledFunction(GridPtr grid, cplx fill)
    : grid_(std::move(grid)), values_(grid_->size(), fill) {}

SampledFunction::SampledFunction(GridPtr grid, std::vector<cplx> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_->size())
    throw std::invalid_argument("SampledFunction: value count does not match grid");
}

void SampledFunction::require_same_grid(const SampledFunction& o) const {
  if (grid_ != o.grid_ && (grid_->size() != o.grid_->size() || grid_->b() != o.grid_->b() ||
                           grid_->kind() != o.grid_->kind()))
    throw std::invalid_argument("SampledFunction: operands live on different grids");
}

double SampledFunction::sup_norm() const {
  double m = 0.0;
  for (auto v : values_) m = std::max(m, std::abs(v));
  return m;
}

double SampledFunction::max_abs_imag() const {
  double m = 0.0;
  for (auto v : values_) m = std::max(m, std::abs(v.imag()));
  return m;
}

bool SampledFunction::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

SampledFunction& SampledFunction::operator+=(const SampledFunction& o) {
  require_same_grid(o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}
SampledFunction& SampledFunction::operator-=(const SampledFunction& o) {
  require_same_grid(o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}
SampledFunction& SampledFunction::operator*=(const SampledFunction& o) {
  require_same_grid(o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] *= o.values_[i];
  return *this;
}
SampledFunction& SampledFunction::operator/=(const SampledFunction& o) {
  require_same_grid(o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] /= o.values_[i];
  return *this;
}
SampledFunction& SampledFunction::operator*=(cplx s) {
  for (auto& v : values_) v *= s;
  return *this;
}
SampledFunction& SampledFunction::operator+=(cplx s) {
  for (auto& v : values_) v += s;
  return *this;
}

SampledFunction operator+(SampledFunction a, const SampledFunction& b) { return a += b; }
SampledFunction operator-(SampledFunction a, const SampledFunction& b) { return a -= b; }
SampledFunction operator*(SampledFunction a, const SampledFunction& b) { return a *= b; }
SampledFunction operator/(SampledFunction a, const SampledFunction& b) { return a /= b; }
SampledFunction operator*(SampledFunction a, cplx s) { return a *= s; }
SampledFunction operator*(cplx s, SampledFunction a) { return a *= s; }
SampledFunction operator+(SampledFunction a, cplx s) { return a += s; }
SampledFunction operator-(SampledFunction a, cplx s) { return a += -s; }

SampledFunction coordinate(const GridPtr& grid) {
  return SampledFunction::from(grid, [](double x) { return cplx(x); });
}

// Newton-Cotes ----------------------------------------------------------------

const std::array<std::array<double, 6>, 5>& newton_cotes_subinterval_weights() {
  static const auto weights = [] {
    std::array<std::array<double, 6>, 5> w{};
    for (int k = 0; k < 6; ++k) {
      // Coefficients of L_k(s) = prod_{j != k} (s - j) / (k - j), lowest first.
      std::array<long double, 6> poly{1.0L};
      int degree = 0;
      long double denom = 1.0L;
      for (int j = 0; j < 6; ++j) {
        if (j == k) continue;
        denom *= static_cast<long double>(k - j);
        for (int d = degree + 1; d > 0; --d) poly[d] = poly[d - 1] - j * poly[d];
        poly[0] *= -j;
        ++degree;
      }
      for (int m = 0; m < 5; ++m) {
        long double acc = 0.0L;
        for (int d = 0; d < 6; ++d) {
          const long double e = d + 1;
          acc += poly[d] * (std::pow(static_cast<long double>(m + 1), e) -
                            std::pow(static_cast<long double>(m), e)) / e;
        }
        w[m][k] = static_cast<double>(acc / denom);
      }
    }
    return w;
  }();
  return weights;
}

namespace {

SampledFunction cumulative_newton_cotes(const SampledFunction& sf) {
  const auto& w = newton_cotes_subinterval_weights();
  const std::size_t n = sf.size();
  const double h = sf.grid()->step();
  std::vector<cplx> out(n);
  out[0] = 0.0;
  for (std::size_t p = 0; p + 5 < n; p += 5) {
    cplx acc = out[p];
    for (std::size_t m = 0; m < 5; ++m) {
      cplx piece = 0.0;
      for (std::size_t k = 0; k < 6; ++k) piece += w[m][k] * sf[p + k];
      acc += h * piece;
      out[p + m + 1] = acc;
    }
  }
  return SampledFunction(sf.grid(), std::move(out));
}

// DCT-I (FFTW REDFT00): y_k = x_0 + (-1)^k x_N + 2 sum_{j=1}^{N-1} x_j cos(pi j k / N).
// Planning is not thread-safe in FFTW, execution on fresh arrays is.
class DctPlan {
 public:
  static void execute(std::vector<double>& in, std::vector<double>& out) {
    fftw_plan plan = get(in.size());
    fftw_execute_r2r(plan, in.data(), out.data());
  }

 private:
  static fftw_plan get(std::size_t n) {
    static std::mutex mutex;
    static std::map<std::size_t, fftw_plan> plans;
    std::lock_guard lock(mutex);
    auto it = plans.find(n);
    if (it != plans.end()) return it->second;
    std::vector<double> a(n), b(n);
    fftw_plan p = fftw_plan_r2r_1d(static_cast<int>(n), a.data(), b.data(), FFTW_REDFT00,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans.emplace(n, p);
    return p;
  }
};

// Chebyshev coefficients c_0..c_N of the interpolant through the samples
// (ascending nodes i <-> t = cos((N-i) pi / N)).
void chebyshev_coefficients(std::span<const double> samples, std::vector<double>& coeff) {
  const std::size_t n = samples.size();
  const std::size_t N = n - 1;
  std::vector<double> in(n);
  coeff.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) in[j] = samples[N - j];
  DctPlan::execute(in, coeff);
  for (auto& c : coeff) c /= static_cast<double>(N);
  coeff.front() *= 0.5;
  coeff.back() *= 0.5;
}

// Values sum_{k=0}^{N} c_k T_k at the grid nodes (ascending).
void chebyshev_synthesis(const std::vector<double>& coeff, std::span<double> out) {
  const std::size_t n = coeff.size();
  const std::size_t N = n - 1;
  std::vector<double> in(coeff), res(n);
  for (std::size_t k = 1; k < N; ++k) in[k] *= 0.5;
  DctPlan::execute(in, res);
  for (std::size_t j = 0; j < n; ++j) out[N - j] = res[j];
}

void chebyshev_cumulative_real(std::span<const double> samples, std::span<double> out, double half_len) {
  const std::size_t n = samples.size();
  const std::size_t N = n - 1;
  std::vector<double> c;
  chebyshev_coefficients(samples, c);
  c.resize(N + 3, 0.0);

  // Antiderivative coefficients B_1..B_{N+1}; the halved top coefficient of
  // the interpolant is what makes the indefinite integral exact.
  std::vector<double> B(N + 2, 0.0);
  B[1] = c[0] - 0.5 * c[2];
  for (std::size_t k = 2; k <= N + 1; ++k) B[k] = (c[k - 1] - c[k + 1]) / (2.0 * static_cast<double>(k));
  double at_minus_one = 0.0;
  for (std::size_t k = 1; k <= N + 1; ++k) at_minus_one += (k % 2 == 0 ? 1.0 : -1.0) * B[k];
  B[0] = -at_minus_one;

  const double top = B[N + 1];
  B.resize(n);
  chebyshev_synthesis(B, out);
  // T_{N+1}(cos(j pi/N)) = (-1)^j cos(j pi/N).
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = N - i;
    const double t = std::cos(std::numbers::pi * static_cast<double>(j) / static_cast<double>(N));
    out[i] = half_len * (out[i] + top * ((j % 2 == 0) ? t : -t));
  }
  out[0] = 0.0;
}

void chebyshev_derivative_real(std::span<const double> samples, std::span<double> out, double half_len) {
  const std::size_t n = samples.size();
  const std::size_t N = n - 1;
  std::vector<double> c;
  chebyshev_coefficients(samples, c);
  std::vector<double> d(n + 1, 0.0);
  for (std::size_t k = N; k >= 1; --k) d[k - 1] = (k + 1 < d.size() ? d[k + 1] : 0.0) + 2.0 * static_cast<double>(k) * c[k];
  d[0] *= 0.5;
  d.resize(n);
  d[N] = 0.0;
  chebyshev_synthesis(d, out);
  for (auto& v : out) v /= half_len;
}

template <class RealOp>
SampledFunction apply_componentwise(const SampledFunction& sf, RealOp&& op) {
  const std::size_t n = sf.size();
  std::vector<double> re(n), im(n), ore(n), oim(n);
  for (std::size_t i = 0; i < n; ++i) {
    re[i] = sf[i].real();
    im[i] = sf[i].imag();
  }
  op(std::span<const double>(re), std::span<double>(ore));
  op(std::span<const double>(im), std::span<double>(oim));
  std::vector<cplx> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = cplx(ore[i], oim[i]);
  return SampledFunction(sf.grid(), std::move(out));
}

// Fornberg's algorithm: weights of the m-th derivative at 0 for integer
// offsets.
std::vector<double> fd_weights(const std::vector<double>& offsets, int m) {
  const std::size_t n = offsets.size();
  std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0, c4 = offsets[0];
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const int mn = std::min<int>(static_cast<int>(i), m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = offsets[i];
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = offsets[i] - offsets[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = c[i][m];
  return w;
}

SampledFunction finite_difference(const SampledFunction& sf, int order, std::size_t width) {
  const std::size_t n = sf.size();
  if (n < width) throw std::invalid_argument("finite_difference: grid too small for stencil");
  const double h = sf.grid()->step();
  const double scale = std::pow(h, -order);
  std::map<long, std::vector<double>> cache;
  std::vector<cplx> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const long half = static_cast<long>(width / 2);
    long start = static_cast<long>(i) - half;
    start = std::clamp(start, 0L, static_cast<long>(n - width));
    const long shift = start - static_cast<long>(i);
    auto it = cache.find(shift);
    if (it == cache.end()) {
      std::vector<double> offs(width);
      for (std::size_t k = 0; k < width; ++k) offs[k] = static_cast<double>(shift + static_cast<long>(k));
      it = cache.emplace(shift, fd_weights(offs, order)).first;
    }
    cplx acc = 0.0;
    for (std::size_t k = 0; k < width; ++k) acc += it->second[k] * sf[static_cast<std::size_t>(start) + k];
    out[i] = acc * scale;
  }
  return SampledFunction(sf.grid(), std::move(out));
}

}  // namespace

SampledFunction cumulative_integral(const SampledFunction& sf) {
  if (sf.grid()->kind() == GridKind::uniform) return cumulative_newton_cotes(sf);
  const double half = 0.5 * sf.grid()->b();
  return apply_componentwise(sf, [half](std::span<const double> in, std::span<double> out) {
    chebyshev_cumulative_real(in, out, half);
  });
}

cplx definite_integral(const SampledFunction& sf) { return cumulative_integral(sf).back(); }

SampledFunction derivative(const SampledFunction& sf) {
  if (sf.grid()->kind() == GridKind::uniform) return finite_difference(sf, 1, 7);
  const double half = 0.5 * sf.grid()->b();
  return apply_componentwise(sf, [half](std::span<const double> in, std::span<double> out) {
    chebyshev_derivative_real(in, out, half);
  });
}

SampledFunction second_difference(const SampledFunction& sf) {
  if (sf.grid()->kind() != GridKind::uniform)
    throw std::invalid_argument("second_difference: uniform grid required");
  return finite_difference(sf, 2, 9);
}

}  // namespace nsbf
