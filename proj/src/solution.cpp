#include "nsbf/solution.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nsbf/errors.hpp"
#include "nsbf/special_functions.hpp"

namespace nsbf {

namespace {

// Scratch for the Bessel sequence; evaluations run concurrently from scans.
std::vector<cplx>& bessel_buffer(std::size_t n) {
  thread_local std::vector<cplx> buf;
  if (buf.size() < n) buf.resize(n);
  return buf;
}

}  // namespace

void cos_sin_of_product(cplx omega, double x, cplx& cos_z, cplx& sin_z) {
  const double zr = omega.real() * x, zi = omega.imag() * x;
  const double er = std::fma(omega.real(), x, -zr), ei = std::fma(omega.imag(), x, -zi);
  const cplx z(zr, zi), dz(er, ei);
  const cplx c = std::cos(z), s = std::sin(z);
  cos_z = c - dz * s;
  sin_z = s + dz * c;
}

NsbfSolver::NsbfSolver(std::shared_ptr<const CoefficientSet> cs, int N_active) : cs_(std::move(cs)) {
  N_ = cs_->N;
  set_N(N_active < 0 ? cs_->N : N_active);
  const std::size_t last = cs_->grid->size() - 1;
  beta_b_.resize(cs_->N + 1);
  gamma_b_.resize(cs_->N + 1);
  cs_->betas(last, beta_b_);
  cs_->gammas(last, gamma_b_);
}

void NsbfSolver::set_N(int N) {
  if (N < 0 || N > cs_->N)
    throw ConfigError("truncation N = " + std::to_string(N) + " outside 0.." + std::to_string(cs_->N));
  N_ = N;
}

std::size_t NsbfSolver::node_of(double x) const {
  const auto i = cs_->grid->index_of(x);
  if (!i) throw ConfigError("x = " + std::to_string(x) + " is not a grid node");
  return *i;
}

void NsbfSolver::coefficients_at(std::size_t node, std::vector<cplx>& beta, std::vector<cplx>& gamma) const {
  if (node + 1 == cs_->grid->size()) {
    beta.assign(beta_b_.begin(), beta_b_.begin() + N_ + 1);
    gamma.assign(gamma_b_.begin(), gamma_b_.begin() + N_ + 1);
    return;
  }
  beta.resize(N_ + 1);
  gamma.resize(N_ + 1);
  cs_->betas(node, beta);
  cs_->gammas(node, gamma);
}

SolutionValues NsbfSolver::eval(cplx omega, std::size_t node) const {
  const double x = cs_->grid->node(node);
  const cplx z = omega * x;
  const cplx Q = cs_->q_cum[node];
  const cplx hQ = cs_->h + 0.5 * Q;

  auto& j = bessel_buffer(N_ + 2);
  std::span<cplx> js(j.data(), N_ + 1);
  spherical_j_sequence(z, js);

  cplx cz, sz;
  cos_sin_of_product(omega, x, cz, sz);

  const bool cached = node + 1 == cs_->grid->size();
  thread_local std::vector<cplx> beta_buf, gamma_buf;
  if (!cached) coefficients_at(node, beta_buf, gamma_buf);
  const cplx* beta = cached ? beta_b_.data() : beta_buf.data();
  const cplx* gamma = cached ? gamma_b_.data() : gamma_buf.data();

  cplx c_sum = 0.0, s_sum = 0.0, cp_sum = 0.0, sp_sum = 0.0, so_sum = 0.0, spo_sum = 0.0;
  for (int n = 0; n <= N_; ++n) {
    const double sign = (n / 2) % 2 == 0 ? 1.0 : -1.0;
    if (n % 2 == 0) {
      c_sum += sign * beta[n] * js[n];
      cp_sum += sign * gamma[n] * js[n];
    } else {
      const cplx jz = x * j_over_z(js, n, z);
      s_sum += sign * beta[n] * js[n];
      sp_sum += sign * gamma[n] * js[n];
      so_sum += sign * beta[n] * jz;
      spo_sum += sign * gamma[n] * jz;
    }
  }
  SolutionValues v;
  v.c = cz + 2.0 * c_sum;
  v.s = sz + 2.0 * s_sum;
  v.s_over_omega = x * js[0] + 2.0 * so_sum;
  v.c_prime = -omega * sz + hQ * cz + 2.0 * cp_sum;
  v.s_prime = omega * cz + 0.5 * Q * sz + 2.0 * sp_sum;
  v.s_prime_over_omega = cz + 0.5 * Q * x * js[0] + 2.0 * spo_sum;
  return v;
}

SolutionValues NsbfSolver::eval_basis(cplx omega, double x) const { return eval(omega, node_of(x)); }

OmegaDerivatives NsbfSolver::omega_derivatives(cplx omega, std::size_t node) const {
  const double x = cs_->grid->node(node);
  const cplx z = omega * x;
  auto& j = bessel_buffer(N_ + 2);
  std::span<cplx> js(j.data(), N_ + 2);
  spherical_j_sequence(z, js);
  cplx cz, sz;
  cos_sin_of_product(omega, x, cz, sz);

  thread_local std::vector<cplx> beta, gamma;
  coefficients_at(node, beta, gamma);

  // d/domega j_n(omega x) = x (n j_n/z - j_{n+1}) = x (j_{n-1} - (n+1) j_n/z)
  cplx dc = 0.0, ds = 0.0;
  for (int n = 0; n <= N_; ++n) {
    const double sign = (n / 2) % 2 == 0 ? 1.0 : -1.0;
    const cplx jz = n == 0 ? cplx(0.0) : x * j_over_z(js, n, z);
    if (n % 2 == 0)
      dc += sign * beta[n] * (double(n) * jz - x * js[n + 1]);
    else
      ds += sign * beta[n] * (x * js[n - 1] - double(n + 1) * jz);
  }
  return {-x * sz + 2.0 * dc, x * cz + 2.0 * ds};
}

OmegaDerivatives NsbfSolver::eval_omega_derivatives(cplx omega, double x) const {
  return omega_derivatives(omega, node_of(x));
}

cplx NsbfSolver::eval_kernel(double x, double t) const {
  const std::size_t i = node_of(x);
  if (i == 0) throw ConfigError("kernel evaluation needs x > 0");
  if (std::abs(t) > x * (1.0 + 1e-14)) throw ConfigError("kernel evaluation needs |t| <= x");
  const auto p = legendre_sequence(std::clamp(t / x, -1.0, 1.0), N_);
  cplx sum = 0.0;
  for (int n = 0; n <= N_; ++n) sum += cs_->beta(n, i) * p[n];
  return sum / x;
}

cplx NsbfSolver::eval_kernel1(double x, double t) const {
  const std::size_t i = node_of(x);
  if (i == 0) throw ConfigError("kernel evaluation needs x > 0");
  if (std::abs(t) > x * (1.0 + 1e-14)) throw ConfigError("kernel evaluation needs |t| <= x");
  const auto p = legendre_sequence(std::clamp(t / x, -1.0, 1.0), N_);
  cplx sum = 0.0;
  for (int n = 0; n <= N_; ++n) sum += cs_->gamma(n, i) * p[n];
  return sum / x;
}

}  // namespace nsbf
