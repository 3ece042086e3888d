#include "nsbf/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

#include "nsbf/errors.hpp"

namespace nsbf {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(cplx v) { return fmt(v.real()) + (v.imag() < 0 ? "" : "+") + fmt(v.imag()) + "i"; }

// out[k] = fn(k), spread over hardware threads in contiguous blocks.
template <class Fn>
void parallel_fill(std::vector<cplx>& out, Fn fn) {
  const std::size_t n = out.size();
  const std::size_t workers = std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), n / 64 + 1);
  if (workers <= 1) {
    for (std::size_t k = 0; k < n; ++k) out[k] = fn(k);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t k = w * n / workers; k < (w + 1) * n / workers; ++k) out[k] = fn(k);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double b_of(const SpectralProblem& p) { return p.solver->grid()->b(); }

// Real root of g between a and b (g(a), g(b) of opposite sign): secant
// steps, replaced by bisection when they leave the bracket or stop shrinking.
// Runs to roundoff: a 1e-13 relative error in omega would already be ~1e-9
// in lambda = omega^2 for omega in the hundreds.
template <class G>
double refine_bracket(G g, double a, double b, double ga, double gb, int& iterations) {
  double x0 = a, g0 = ga, x1 = b, g1 = gb;
  double last_step = b - a, prev_step = b - a;
  bool bisect = false;
  for (iterations = 1; iterations <= 200; ++iterations) {
    const double tol = 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x1));
    double x = 0.5 * (a + b);
    if (!bisect && g1 != g0) {
      const double s = x1 - g1 * (x1 - x0) / (g1 - g0);
      if (s > a && s < b) x = s;
    }
    const double gx = g(x);
    if (gx == 0.0) return x;
    if ((gx < 0) == (ga < 0)) {
      a = x;
      ga = gx;
    } else {
      b = x;
      gb = gx;
    }
    const double step = std::abs(x - x1);
    if (step <= tol || b - a <= tol) return x;
    // secant steps must at least halve every other iteration
    bisect = !bisect && step > 0.5 * prev_step;
    prev_step = last_step;
    last_step = step;
    x0 = x1;
    g0 = g1;
    x1 = x;
    g1 = gx;
  }
  if (b - a <= 1e-13 * std::max(1.0, std::abs(b))) return 0.5 * (a + b);
  throw NumericalError("root refinement did not converge in [" + fmt(a) + ", " + fmt(b) + "]");
}

// One axis of the real search: omega = t (real) or omega = i t.
struct AxisRoots {
  std::vector<std::pair<double, int>> roots;  // (t, iterations)
  std::vector<std::string> warnings;
};

// skip_origin: lambda = 0 is already accepted, so the interval next to
// omega = 0 only carries the roundoff sign of Phi(0).
void scan_axis(const SpectralProblem& p, bool imaginary, const std::vector<double>& mesh, AxisRoots& out,
               bool skip_origin = false) {
  const cplx dir = imaginary ? cplx(0, 1) : cplx(1, 0);
  auto phi = [&](double t) { return char_fn(p, t * dir); };
  std::vector<cplx> vals(mesh.size());
  parallel_fill(vals, [&](std::size_t k) { return phi(mesh[k]); });
  double scale = 0;
  for (const auto& v : vals) scale = std::max(scale, std::abs(v));
  auto g = [&](double t) { return phi(t).real(); };
  std::size_t rejected = 0;
  for (std::size_t k = 0; k + 1 < mesh.size(); ++k) {
    if (k == 0 && skip_origin && mesh[0] == 0.0) continue;
    const double ga = vals[k].real(), gb = vals[k + 1].real();
    if (k > 0 && ga == 0.0) {
      out.roots.emplace_back(mesh[k], 0);
      continue;
    }
    if (gb == 0.0 || (ga < 0) == (gb < 0)) {
      // no sign change: a dip to roundoff level between same-sign neighbours
      if (k > 0 && gb != 0.0 && k + 2 < mesh.size()) {
        const double m = std::abs(gb);
        if (m < 1e-8 * scale && m < std::abs(ga) && m < std::abs(vals[k + 2].real()) &&
            (vals[k + 2].real() < 0) == (gb < 0))
          out.warnings.push_back("suspected double root near omega = " + fmt(mesh[k + 1] * dir));
      }
      continue;
    }
    int it = 0;
    const double t = refine_bracket(g, mesh[k], mesh[k + 1], ga, gb, it);
    // Re Phi may change sign where Phi itself is far from zero (omega-dependent
    // boundary data make Phi complex on the axis); those are not eigenvalues.
    const double bound = std::max(std::abs(vals[k]), std::abs(vals[k + 1]));
    if (std::abs(phi(t).imag()) > 1e-6 * bound) {
      ++rejected;
      continue;
    }
    out.roots.emplace_back(t, it);
  }
  if (rejected)
    out.warnings.push_back(std::to_string(rejected) + " sign change(s) of Re Phi on the " +
                           (imaginary ? "imaginary" : "real") + " axis rejected: Phi is not real there");
}

std::vector<double> mesh_between(double t0, double t1, double step) {
  std::vector<double> m;
  const auto n = static_cast<std::size_t>(std::ceil((t1 - t0) / step - 1e-9));
  for (std::size_t k = 0; k <= n; ++k) m.push_back(std::min(t1, t0 + static_cast<double>(k) * step));
  return m;
}

void sort_and_index(Spectrum& s) {
  std::stable_sort(s.entries.begin(), s.entries.end(), [](const Eigenvalue& a, const Eigenvalue& b) {
    if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
    return a.lambda.imag() < b.lambda.imag();
  });
  for (std::size_t k = 0; k < s.entries.size(); ++k) s.entries[k].index = static_cast<int>(k);
}

// ---- argument principle -------------------------------------------------

struct BoundaryHit {};

class ZeroLocator {
 public:
  ZeroLocator(const SpectralProblem& p, int max_zeros) : p_(p), max_zeros_(max_zeros) {}

  void run(Rectangle r, Spectrum& out) {
    int w = 0;
    try {
      w = winding(r);
    } catch (const BoundaryHit&) {
      r = jitter_outward(r);
      try {
        w = winding(r);
      } catch (const BoundaryHit&) {
        throw NumericalError("search rectangle boundary passes through a zero of Phi");
      }
    }
    if (w < 0) throw NumericalError("negative winding number: Phi has poles in the rectangle");
    if (w > max_zeros_) throw NumericalError("rectangle holds " + std::to_string(w) + " zeros, more than max_zeros");
    if (w > 0) descend(r, w, out);
  }

 private:
  cplx phi(cplx w) {
    const cplx v = char_fn(p_, w);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw NumericalError("non-finite characteristic function at omega = " + fmt(w));
    return v;
  }

  // Phase change of Phi from a to b, bisecting until every step is < pi/2.
  double edge_phase(cplx a, cplx b, cplx fa, cplx fb, int depth) {
    if (fa == cplx(0.0) || fb == cplx(0.0)) throw BoundaryHit{};
    const double d = std::arg(fb / fa);
    if (std::abs(d) < kPi / 2) return d;
    if (depth > 40) throw BoundaryHit{};
    const cplx m = 0.5 * (a + b), fm = phi(m);
    return edge_phase(a, m, fa, fm, depth + 1) + edge_phase(m, b, fm, fb, depth + 1);
  }

  int winding(const Rectangle& r) {
    const cplx c[4] = {{r.re0, r.im0}, {r.re1, r.im0}, {r.re1, r.im1}, {r.re0, r.im1}};
    double total = 0;
    for (int e = 0; e < 4; ++e) {
      const cplx a = c[e], b = c[(e + 1) % 4];
      // a handful of equispaced samples first, then adaptive refinement
      constexpr int kSamples = 8;
      cplx prev = phi(a);
      for (int k = 1; k <= kSamples; ++k) {
        const cplx x = a + (b - a) * (static_cast<double>(k) / kSamples);
        const cplx fx = phi(x);
        total += edge_phase(a + (b - a) * (static_cast<double>(k - 1) / kSamples), x, prev, fx, 0);
        prev = fx;
      }
    }
    return static_cast<int>(std::lround(total / (2 * kPi)));
  }

  Rectangle jitter_outward(const Rectangle& r) {
    std::uniform_real_distribution<double> u(0.5, 1.0);
    const double dx = 0.01 * (r.re1 - r.re0), dy = 0.01 * (r.im1 - r.im0);
    return {r.re0 - dx * u(rng_), r.re1 + dx * u(rng_), r.im0 - dy * u(rng_), r.im1 + dy * u(rng_)};
  }

  // Halves of r split along the longer side at fraction t.
  static std::pair<Rectangle, Rectangle> split(const Rectangle& r, double t) {
    if (r.re1 - r.re0 >= r.im1 - r.im0) {
      const double m = r.re0 + t * (r.re1 - r.re0);
      return {{r.re0, m, r.im0, r.im1}, {m, r.re1, r.im0, r.im1}};
    }
    const double m = r.im0 + t * (r.im1 - r.im0);
    return {{r.re0, r.re1, r.im0, m}, {r.re0, r.re1, m, r.im1}};
  }

  void descend(const Rectangle& r, int w, Spectrum& out) {
    const double side = std::max(r.re1 - r.re0, r.im1 - r.im0);
    if (w == 1 && side <= 0.1 && try_newton(r, out)) return;
    if (side < 1e-9) throw NumericalError("zero of Phi near " + fmt(cplx(r.re0, r.im0)) + " could not be isolated");
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int attempt = 0; attempt < 2; ++attempt) {
      // a split line through a zero is moved by up to 1% of the side
      const auto [lo, hi] = split(r, attempt == 0 ? 0.5 : 0.5 + 0.01 * u(rng_));
      int wl = 0, wh = 0;
      try {
        wl = winding(lo);
        wh = winding(hi);
      } catch (const BoundaryHit&) {
        if (attempt == 1) throw NumericalError("split line through a zero of Phi near " + fmt(cplx(r.re0, r.im0)));
        continue;
      }
      if (wl < 0 || wh < 0) throw NumericalError("negative winding number: Phi has poles in the rectangle");
      if (wl > 0) descend(lo, wl, out);
      if (wh > 0) descend(hi, wh, out);
      return;
    }
  }

  // Newton from the centre with a central-difference derivative.
  bool try_newton(const Rectangle& r, Spectrum& out) {
    cplx w(0.5 * (r.re0 + r.re1), 0.5 * (r.im0 + r.im1));
    const double scale = (std::abs(phi({r.re0, r.im0})) + std::abs(phi({r.re1, r.im0})) +
                          std::abs(phi({r.re1, r.im1})) + std::abs(phi({r.re0, r.im1}))) /
                         4;
    cplx f = phi(w);
    int it = 0;
    for (; it < 60 && std::abs(f) >= 1e-12 * scale; ++it) {
      const double d = 1e-7 * std::max(1.0, std::abs(w));
      const cplx df = (phi(w + d) - phi(w - d)) / (2 * d);
      if (df == cplx(0.0)) return false;
      const cplx step = f / df;
      w -= step;
      f = phi(w);
      if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(w))) break;
    }
    // Newton has to stay in (a small neighbourhood of) the rectangle
    const double mx = 0.05 * (r.re1 - r.re0), my = 0.05 * (r.im1 - r.im0);
    if (w.real() < r.re0 - mx || w.real() > r.re1 + mx || w.imag() < r.im0 - my || w.imag() > r.im1 + my)
      return false;
    if (std::abs(f) >= 1e-12 * scale) {
      // converged as far as the arithmetic allows; accept if clearly a zero
      if (std::abs(f) > 1e-8 * scale) return false;
      out.warnings.push_back("zero near omega = " + fmt(w) + " refined only to |Phi|/scale = " +
                             fmt(std::abs(f) / scale));
    }
    for (const auto& e : out.entries)
      if (std::abs(e.omega - w) < 1e-8 * std::max(1.0, std::abs(w))) {
        out.warnings.push_back("duplicate zero at omega = " + fmt(w) + " dropped");
        return true;
      }
    if (static_cast<int>(out.entries.size()) >= max_zeros_)
      throw NumericalError("more than max_zeros = " + std::to_string(max_zeros_) + " zeros found");
    out.entries.push_back({0, w, w * w, std::abs(f), it});
    return true;
  }

  const SpectralProblem& p_;
  int max_zeros_;
  std::mt19937 rng_{20240531u};
};

}  // namespace

// ---- boundary conditions ---------------------------------------------------

BoundaryCondition BoundaryCondition::parse(const std::string& alpha0, const std::string& mu0,
                                           const std::string& alphab, const std::string& mub) {
  return {Expr::parse(alpha0, "w"), Expr::parse(mu0, "w"), Expr::parse(alphab, "w"), Expr::parse(mub, "w")};
}

bool BoundaryCondition::omega_dependent() const {
  return !(alpha0.is_constant() && mu0.is_constant() && alphab.is_constant() && mub.is_constant());
}

BoundaryCondition::Values BoundaryCondition::at(cplx omega) const {
  const Values v{alpha0(omega), mu0(omega), alphab(omega), mub(omega)};
  if (v.alpha0 == cplx(0.0) && v.mu0 == cplx(0.0))
    throw NumericalError("boundary condition at 0 degenerates at omega = " + fmt(omega));
  if (v.alphab == cplx(0.0) && v.mub == cplx(0.0))
    throw NumericalError("boundary condition at b degenerates at omega = " + fmt(omega));
  return v;
}

// ---- problem assembly --------------------------------------------------------

PreparedProblem prepare_problem(const SampledFunction& q, BoundaryCondition bc, int N,
                                const std::optional<ParticularSolution>& ps) {
  const ParticularSolution f = ps ? *ps : particular_solution(q);
  auto cs = std::make_shared<const CoefficientSet>(coefficients_recurrent(f, q, N));
  NSelection sel = select_N(*cs);
  auto solver = std::make_shared<const NsbfSolver>(cs, sel.N_star);
  return {{std::move(solver), std::move(bc)}, std::move(sel)};
}

cplx char_fn(const SpectralProblem& p, cplx omega) {
  const auto bc = p.bc.at(omega);
  const auto v = p.solver->eval(omega, p.solver->grid()->size() - 1);
  const cplx a = bc.alpha0 + bc.mu0 * p.solver->h();
  return bc.alphab * (bc.mu0 * v.c - a * v.s_over_omega) + bc.mub * (bc.mu0 * v.c_prime - a * v.s_prime_over_omega);
}

Spectrum find_real_spectrum(const SpectralProblem& p, const RealSearch& search) {
  if (search.count < 0 || search.omega_max < 0) throw ConfigError("search count and omega_max must be >= 0");
  const double b = b_of(p);
  const double coarse = kPi / (4 * b), fine = coarse / 4, fine_end = 20 * kPi / b;
  Spectrum out;
  auto add = [&](cplx w, int it) { out.entries.push_back({0, w, w * w, std::abs(char_fn(p, w)), it}); };

  double nu_max = search.nu_max;
  if (nu_max < 0) {
    const auto& q = p.solver->coefficients().q;
    double qmin = 0;
    for (std::size_t i = 0; i < q.size(); ++i) qmin = std::min(qmin, q[i].real());
    const auto bc = p.bc.at(0.0);
    double robin = 0;
    if (bc.mu0 != cplx(0.0)) robin += std::abs(bc.alpha0 / bc.mu0);
    if (bc.mub != cplx(0.0)) robin += std::abs(bc.alphab / bc.mub);
    nu_max = std::sqrt(-qmin) + robin + 1.0;
  }

  // lambda = 0 sits at a double zero of Phi in omega; test it directly
  // against the size of Phi over the first few expected eigenvalue gaps
  const double phi0 = std::abs(char_fn(p, 0.0));
  double local_scale = 0;
  for (int k = 1; k <= 16; ++k) local_scale = std::max(local_scale, std::abs(char_fn(p, k * coarse)));
  const bool zero_root = phi0 <= 1e-10 * local_scale;

  AxisRoots imag_roots, real_roots;
  if (nu_max > 0) {
    auto mesh = mesh_between(0.0, std::min(nu_max, fine_end), fine);
    if (nu_max > fine_end) {
      auto rest = mesh_between(fine_end, nu_max, coarse);
      mesh.insert(mesh.end(), rest.begin() + 1, rest.end());
    }
    scan_axis(p, true, mesh, imag_roots, zero_root);
  }


  // range mode stops at omega_max; count mode always covers the fine region
  auto mesh = mesh_between(0.0, search.count > 0 ? fine_end : std::min(fine_end, search.omega_max), fine);
  if (search.omega_max > fine_end) {
    auto rest = mesh_between(fine_end, search.omega_max, coarse);
    mesh.insert(mesh.end(), rest.begin() + 1, rest.end());
  }
  if (search.count > 0 || search.omega_max > 0) {
    scan_axis(p, false, mesh, real_roots, zero_root);
    // extend in blocks until enough eigenvalues are known
    double end = mesh.back();
    for (int block = 0; search.count > 0; ++block) {
      const std::size_t have = imag_roots.roots.size() + real_roots.roots.size() + (zero_root ? 1 : 0);
      if (have >= static_cast<std::size_t>(search.count)) break;
      if (block > 20000) throw NumericalError("real search did not reach " + std::to_string(search.count) + " eigenvalues");
      const std::size_t missing = search.count - have;
      const double next = end + coarse * static_cast<double>(std::max<std::size_t>(64, 5 * missing));
      scan_axis(p, false, mesh_between(end, next, coarse), real_roots);
      end = next;
    }
  }

  if (zero_root) add(0.0, 0);
  for (const auto& [t, it] : imag_roots.roots)
    if (t > 0) add(cplx(0, t), it);
  for (const auto& [t, it] : real_roots.roots)
    if (t > 0) add(t, it);
  for (auto* w : {&imag_roots.warnings, &real_roots.warnings}) out.warnings.insert(out.warnings.end(), w->begin(), w->end());

  sort_and_index(out);
  if (search.count > 0 && out.entries.size() > static_cast<std::size_t>(search.count)) out.entries.resize(search.count);
  return out;
}

Spectrum find_complex_spectrum(const SpectralProblem& p, const Rectangle& rect, int max_zeros) {
  if (!(rect.re1 > rect.re0 && rect.im1 > rect.im0)) throw ConfigError("empty search rectangle");
  if (rect.re0 < 0) throw ConfigError("search rectangle must lie in Re omega >= 0");
  if (rect.re0 <= 0 && rect.im0 <= 0 && rect.im1 >= 0) throw ConfigError("omega = 0 on the rectangle boundary");
  Spectrum out;
  ZeroLocator(p, max_zeros).run(rect, out);
  sort_and_index(out);
  return out;
}

SampledFunction eigenfunction(const SpectralProblem& p, cplx omega, bool normalize) {
  const auto bc = p.bc.at(omega);
  const auto& grid = p.solver->grid();
  const cplx a = bc.alpha0 + bc.mu0 * p.solver->h();
  std::vector<cplx> y(grid->size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto v = p.solver->eval(omega, i);
    y[i] = bc.mu0 * v.c - a * v.s_over_omega;
  }
  if (normalize) {
    double m = 0;
    for (const auto& v : y) m = std::max(m, std::abs(v));
    if (m > 0)
      for (auto& v : y) v /= m;
  }
  return SampledFunction(grid, std::move(y));
}

nlohmann::json spectrum_json(const Spectrum& s) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : s.entries)
    arr.push_back({{"index", e.index},
                   {"lambda_re", e.lambda.real()},
                   {"lambda_im", e.lambda.imag()},
                   {"omega_re", e.omega.real()},
                   {"omega_im", e.omega.imag()},
                   {"residual", e.residual}});
  return arr;
}

void write_spectrum_csv(std::ostream& os, const Spectrum& s) {
  os << "index,lambda_re,lambda_im,omega_re,omega_im,residual\n";
  char buf[256];
  for (const auto& e : s.entries) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.6e\n", e.index, e.lambda.real(), e.lambda.imag(),
                  e.omega.real(), e.omega.imag(), e.residual);
    os << buf;
  }
}

}  // namespace nsbf
