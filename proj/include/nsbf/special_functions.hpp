#pragma once

#include <complex>
#include <span>
#include <vector>

namespace nsbf {

using cplx = std::complex<double>;

// j_0(z)..j_{n_max}(z) for complex z.
struct BesselSequence {
  cplx z;
  std::vector<cplx> values;
};

// Small |z| (<= 1e-4): ascending series. Otherwise Miller's downward
// recurrence, started above max(n_max, |z|), normalised against j_0 or j_1
// (whichever is larger, so zeros of sin z/z are harmless).
// Throws NumericalError if |Im z| is beyond the exponent range.
BesselSequence spherical_j_sequence(cplx z, int n_max);

// Allocation-free form used in hot loops; out.size() - 1 is n_max.
void spherical_j_sequence(cplx z, std::span<cplx> out);

// j_k(z)/z for k >= 1, with the z = 0 limit (1/3 for k = 1, else 0).
inline cplx j_over_z(const std::span<const cplx> j, int k, cplx z) {
  if (z == cplx(0.0)) return k == 1 ? cplx(1.0 / 3.0) : cplx(0.0);
  return j[k] / z;
}

// P_0(t)..P_{n_max}(t) by Bonnet's recurrence.
std::vector<double> legendre_sequence(double t, int n_max);

}  // namespace nsbf
