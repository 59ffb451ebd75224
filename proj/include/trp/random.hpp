#ifndef TRP_RANDOM_HPP
#define TRP_RANDOM_HPP

#include <cstdint>
#include <random>

#include "trp/mat3.hpp"

namespace trp {

/// SplitMix64 finalizer; derives independent child seeds from (seed, index).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

/// Haar-distributed unitary: Gram-Schmidt on a complex Ginibre matrix.
inline Complex3x3 haar_unitary(Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Complex3x3 g;
  for (auto& x : g.e) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    x = cplx(re, im);
  }
  return reunitarize(g);
}

/// Haar unitary rescaled by a cube root of its determinant, so det = 1.
inline Complex3x3 haar_special_unitary(Rng& rng) {
  Complex3x3 u = haar_unitary(rng);
  const double phase = std::arg(det(u)) / 3.0;
  return std::polar(1.0, -phase) * u;
}

}  // namespace trp

#endif  // TRP_RANDOM_HPP
