#include "nsbf/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nsbf/errors.hpp"

namespace nsbf {

namespace {

constexpr double kSeriesCutoff = 1e-4;
constexpr double kRescaleAbove = 1e250;

void ascending_series(cplx z, std::span<cplx> out) {
  // j_k(z) = z^k/(2k+1)!! * sum_m (-z^2/2)^m / (m! (2k+3)(2k+5)...(2k+2m+1)), four terms.
  const cplx w = -0.5 * z * z;
  cplx lead = 1.0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (k > 0) lead *= z / static_cast<double>(2 * k + 1);
    cplx term = 1.0, sum = 1.0;
    for (int m = 1; m <= 3; ++m) {
      term *= w / (static_cast<double>(m) * static_cast<double>(2 * k + 2 * m + 1));
      sum += term;
    }
    out[k] = lead * sum;
  }
}

}  // namespace

void spherical_j_sequence(cplx z, std::span<cplx> out) {
  if (out.empty()) return;
  const int n_max = static_cast<int>(out.size()) - 1;
  const double az = std::abs(z);
  if (az == 0.0) {
    std::fill(out.begin(), out.end(), cplx(0.0));
    out[0] = 1.0;
    return;
  }
  if (az <= kSeriesCutoff) {
    ascending_series(z, out);
    return;
  }
  if (std::abs(z.imag()) > 700.0)
    throw NumericalError("spherical Bessel: |Im z| = " + std::to_string(std::abs(z.imag())) +
                         " overflows double precision; rescale the problem");

  const double m = std::max(static_cast<double>(n_max), az);
  const int start = static_cast<int>(std::ceil(m + 20.0 + 2.5 * std::sqrt(m)));

  // Downward recurrence j_{k-1} = (2k+1)/z j_k - j_{k+1}.
  const cplx inv_z = 1.0 / z;
  cplx above = 0.0, cur = 1e-30;
  for (int k = start; k > n_max; --k) {
    const cplx below = static_cast<double>(2 * k + 1) * inv_z * cur - above;
    above = cur;
    cur = below;
    if (std::abs(cur) > kRescaleAbove) {
      cur /= kRescaleAbove;
      above /= kRescaleAbove;
    }
  }
  // cur now holds j_{n_max}, above holds j_{n_max+1} (unnormalised).
  out[n_max] = cur;
  for (int k = n_max; k > 0; --k) {
    const cplx below = static_cast<double>(2 * k + 1) * inv_z * out[k] - above;
    above = out[k];
    out[k - 1] = below;
    if (std::abs(below) > kRescaleAbove) {
      for (int i = k - 1; i <= n_max; ++i) out[i] /= kRescaleAbove;
      above /= kRescaleAbove;
    }
  }

  const cplx s = std::sin(z), c = std::cos(z);
  const cplx j0 = s * inv_z;
  const cplx j1 = (s * inv_z - c) * inv_z;
  cplx scale;
  if (std::abs(j0) >= std::abs(j1) || n_max == 0) {
    scale = j0 / out[0];
  } else {
    scale = j1 / out[1];
  }
  for (auto& v : out) v *= scale;
  out[0] = j0;
}

BesselSequence spherical_j_sequence(cplx z, int n_max) {
  if (n_max < 0) n_max = 0;
  BesselSequence seq{z, std::vector<cplx>(static_cast<std::size_t>(n_max) + 1)};
  spherical_j_sequence(z, std::span<cplx>(seq.values));
  return seq;
}

std::vector<double> legendre_sequence(double t, int n_max) {
  std::vector<double> p(static_cast<std::size_t>(std::max(n_max, 0)) + 1);
  p[0] = 1.0;
  if (n_max >= 1) p[1] = t;
  for (int k = 1; k < n_max; ++k)
    p[k + 1] = ((2.0 * k + 1.0) * t * p[k] - k * p[k - 1]) / (k + 1.0);
  return p;
}

}  // namespace nsbf
