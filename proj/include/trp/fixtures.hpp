#ifndef TRP_FIXTURES_HPP
#define TRP_FIXTURES_HPP

// Closed-form points at the ends of the H interval: Y - Z with a repeated
// eigenvalue, and Y + Z in the matching normal form.

#include <cstdint>
#include <random>

#include "trp/mat3.hpp"
#include "trp/orbits.hpp"
#include "trp/random.hpp"
#include "trp/spectral.hpp"

namespace trp {

/// L(z) = i a diag(-2, 1, 1) z + S with S anti-hermitian, traceless and
/// s_23 = s_32 = 0; the remaining entries of S are drawn from the seed.
inline LaxMatrix boundary_normal_form(double a, std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Complex3x3 s;
  const double d1 = g(rng), d2 = g(rng);
  s(0, 0) = kI * d1;
  s(1, 1) = kI * d2;
  s(2, 2) = -kI * (d1 + d2);
  for (int k = 1; k < 3; ++k) {
    const double re = g(rng), im = g(rng);
    s(0, k) = cplx(re, im);
    s(k, 0) = -std::conj(s(0, k));
  }
  return {AntiHermitian3::unchecked(Complex3x3::i_diag({-2.0 * a, a, a})), AntiHermitian3::unchecked(s)};
}

inline Spectrum3 spectrum_label(const Complex3x3& anti) {
  Real3 v = spectrum_of(anti);
  const double mean = (v[0] + v[1] + v[2]) / 3.0;
  for (auto& x : v) x -= mean;
  return Spectrum3(v);
}

/// The reduced point with Y - Z = A and Y + Z = S; its orbit labels are read
/// off from the matrices themselves.
inline ReducedPoint point_from_lax(const LaxMatrix& L, std::uint64_t seed = 0) {
  const Complex3x3 y = 0.5 * (L.B.mat() + L.A.mat());
  const Complex3x3 z = 0.5 * (L.B.mat() - L.A.mat());
  ReducedPoint p{AntiHermitian3::unchecked(y), AntiHermitian3::unchecked(z),
                 OrbitSpec{spectrum_label(-(y + z)), spectrum_label(y), spectrum_label(z)}, 0.0, seed};
  p.moment_residual = moment_residual(y, z, p.spec.lambda);
  return p;
}

inline ReducedPoint boundary_point(double a, std::uint64_t rng_seed) {
  return point_from_lax(boundary_normal_form(a, rng_seed), rng_seed);
}

}  // namespace trp

#endif  // TRP_FIXTURES_HPP
