#ifndef TRP_SMALL_LINALG_HPP
#define TRP_SMALL_LINALG_HPP

// Dense real solvers for the handful of tiny systems the library needs
// (Levenberg-Marquardt normal equations, gauge projections).

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>

namespace trp::linalg {

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
using Mat = std::array<std::array<double, N>, N>;

/// Solves S x = b for symmetric positive definite S by Cholesky.
/// Returns nullopt when a pivot is not positive.
template <std::size_t N>
std::optional<Vec<N>> solve_spd(Mat<N> s, Vec<N> b) {
  for (std::size_t j = 0; j < N; ++j) {
    double d = s[j][j];
    for (std::size_t k = 0; k < j; ++k) d -= s[j][k] * s[j][k];
    if (!(d > 0.0)) return std::nullopt;
    const double l = std::sqrt(d);
    s[j][j] = l;
    for (std::size_t i = j + 1; i < N; ++i) {
      double v = s[i][j];
      for (std::size_t k = 0; k < j; ++k) v -= s[i][k] * s[j][k];
      s[i][j] = v / l;
    }
  }
  for (std::size_t i = 0; i < N; ++i) {
    double v = b[i];
    for (std::size_t k = 0; k < i; ++k) v -= s[i][k] * b[k];
    b[i] = v / s[i][i];
  }
  for (std::size_t i = N; i-- > 0;) {
    double v = b[i];
    for (std::size_t k = i + 1; k < N; ++k) v -= s[k][i] * b[k];
    b[i] = v / s[i][i];
  }
  return b;
}

template <std::size_t N>
double dot(const Vec<N>& a, const Vec<N>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < N; ++i) s += a[i] * b[i];
  return s;
}

template <std::size_t N>
double norm(const Vec<N>& a) {
  return std::sqrt(dot(a, a));
}

}  // namespace trp::linalg

#endif  // TRP_SMALL_LINALG_HPP
