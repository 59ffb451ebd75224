#ifndef TRP_DIVISOR_HPP
#define TRP_DIVISOR_HPP

// Divisor point of the spectral curve from the vanishing of one column of the
// cofactor matrix of L(z) - eta, computed in the frame where Y - Z is
// diagonal, and the Darboux pair (z0, zeta0) with zeta0 = eta0 / z0 (z0^2 - 1).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>

#include "trp/error.hpp"
#include "trp/mat3.hpp"
#include "trp/orbits.hpp"
#include "trp/spectral.hpp"

namespace trp {

struct DivisorPoint {
  cplx z0;
  cplx eta0;
  cplx zeta0;
  int column_used = 1;  // 1-based
  double rho_residual = 0.0;
  double cofactor_residual = 0.0;

  /// 1 + |z0|^3 + |eta0|^3, the natural size of rho and cofactors at the point.
  double scale() const { return 1.0 + std::pow(std::abs(z0), 3) + std::pow(std::abs(eta0), 3); }
};

/// Cofactor (adjugate) matrix: M adj(M) = det(M) I.
inline Complex3x3 adjugate(const Complex3x3& m) {
  Complex3x3 r;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      // adj(M)_{ij} = cofactor of M_{ji}
      const int r0 = (j + 1) % 3, r1 = (j + 2) % 3;
      const int c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      r(i, j) = m(r0, c0) * m(r1, c1) - m(r0, c1) * m(r1, c0);
    }
  }
  return r;
}

inline cplx darboux_zeta(cplx z0, cplx eta0) { return eta0 / (z0 * (z0 * z0 - 1.0)); }

namespace detail {

inline std::array<int, 2> others(int k) {
  return k == 0 ? std::array<int, 2>{1, 2} : k == 1 ? std::array<int, 2>{0, 2} : std::array<int, 2>{0, 1};
}

}  // namespace detail

/// (z, eta) solving the two off-diagonal cofactor equations of column k
/// (0-based) for L(z) = i diag(alpha_hat) z + S:
///   adj_pk = -s_pk (alpha_q z - eta + s_qq) + s_qk s_pq = 0
///   adj_qk = -s_qk (alpha_p z - eta + s_pp) + s_pk s_qp = 0.
struct CofactorSolution {
  cplx z0, eta0;
};

inline CofactorSolution solve_cofactor_column(const Real3& alpha_hat, const Complex3x3& s, int k) {
  const auto [p, q] = detail::others(k);
  const cplx ap = kI * alpha_hat[p], aq = kI * alpha_hat[q];
  const cplx spk = s(p, k), sqk = s(q, k);
  // Rows: [-s_pk a_q, s_pk] and [-s_qk a_p, s_qk] acting on (z, eta).
  const cplx m00 = -spk * aq, m01 = spk, m10 = -sqk * ap, m11 = sqk;
  const cplx r0 = spk * s(q, q) - sqk * s(p, q);
  const cplx r1 = sqk * s(p, p) - spk * s(q, p);
  const cplx d = m00 * m11 - m01 * m10;  // s_pk s_qk (a_p - a_q)
  return {(r0 * m11 - m01 * r1) / d, (m00 * r1 - m10 * r0) / d};
}

/// Derivative of the cofactor solution along the direction ds of S.
inline CofactorSolution cofactor_column_derivative(const Real3& alpha_hat, const Complex3x3& s,
                                                   const Complex3x3& ds, int k,
                                                   const CofactorSolution& x) {
  const auto [p, q] = detail::others(k);
  const cplx ap = kI * alpha_hat[p], aq = kI * alpha_hat[q];
  const cplx spk = s(p, k), sqk = s(q, k);
  const cplx m00 = -spk * aq, m01 = spk, m10 = -sqk * ap, m11 = sqk;
  const cplx dr0 = ds(p, k) * s(q, q) + spk * ds(q, q) - ds(q, k) * s(p, q) - sqk * ds(p, q);
  const cplx dr1 = ds(q, k) * s(p, p) + sqk * ds(p, p) - ds(p, k) * s(q, p) - spk * ds(q, p);
  const cplx dm00 = -ds(p, k) * aq, dm01 = ds(p, k), dm10 = -ds(q, k) * ap, dm11 = ds(q, k);
  const cplx b0 = dr0 - (dm00 * x.z0 + dm01 * x.eta0);
  const cplx b1 = dr1 - (dm10 * x.z0 + dm11 * x.eta0);
  const cplx d = m00 * m11 - m01 * m10;
  return {(b0 * m11 - m01 * b1) / d, (m00 * b1 - m10 * b0) / d};
}

/// The first-column closed form
///   z0 = (s21 s32 / s31 - s22 - s31 s23 / s21 + s33) / (alpha_2 - alpha_3).
inline cplx z0_closed_form(const GaugedLax& g) {
  const auto& s = g.S;
  const cplx num = s(1, 0) * s(2, 1) / s(2, 0) - s(1, 1) - s(2, 0) * s(1, 2) / s(1, 0) + s(2, 2);
  return num / (kI * (g.alpha_hat[1] - g.alpha_hat[2]));
}

/// Pivot threshold for a usable cofactor column: 1e-8 ||S||_F.
inline double pivot_tolerance(const Complex3x3& s) { return 1e-8 * frobenius_norm(s); }

inline bool column_usable(const Complex3x3& s, int k) {
  const auto [p, q] = detail::others(k);
  const double tol = pivot_tolerance(s);
  return std::abs(s(p, k)) > tol && std::abs(s(q, k)) > tol;
}

/// First usable column in the order 1, 2, 3 (0-based result).
inline int choose_column(const Complex3x3& s) {
  for (int k = 0; k < 3; ++k)
    if (column_usable(s, k)) return k;
  throw Error(ErrorKind::DivisorUndefined, "no cofactor column has usable pivots");
}

/// Builds the DivisorPoint for a fixed column, with its residuals. The
/// residuals are evaluated in the gauged frame, where they are identical to
/// the original frame's up to rounding.
inline DivisorPoint divisor_in_column(const GaugedLax& g, const SpectralData& sd, int k) {
  const auto x = solve_cofactor_column(g.alpha_hat, g.S, k);
  DivisorPoint d;
  d.z0 = x.z0;
  d.eta0 = x.eta0;
  d.zeta0 = darboux_zeta(x.z0, x.eta0);
  d.column_used = k + 1;
  d.rho_residual = std::abs(eval_rho(sd, x.z0, x.eta0));
  Complex3x3 m = x.z0 * Complex3x3::i_diag(g.alpha_hat) + g.S;
  for (int i = 0; i < 3; ++i) m(i, i) -= x.eta0;
  const Complex3x3 adj = adjugate(m);
  for (int i = 0; i < 3; ++i) d.cofactor_residual = std::max(d.cofactor_residual, std::abs(adj(i, k)));
  return d;
}

inline DivisorPoint divisor_point(const ReducedPoint& p) {
  const GaugedLax g = gauge_diagonalize_A(p);
  const int k = choose_column(g.S);
  return divisor_in_column(g, charpoly(p), k);
}

/// Chordal distance on the Riemann sphere.
inline double chordal(cplx a, cplx b) {
  if (std::isinf(std::abs(a)) && std::isinf(std::abs(b))) return 0.0;
  if (std::isinf(std::abs(a))) return 2.0 / std::sqrt(1.0 + std::norm(b));
  if (std::isinf(std::abs(b))) return 2.0 / std::sqrt(1.0 + std::norm(a));
  return 2.0 * std::abs(a - b) / std::sqrt((1.0 + std::norm(a)) * (1.0 + std::norm(b)));
}

/// Stereographic image of w on the sphere of radius 1, and its derivative
/// along the tangent dw.
inline std::array<double, 3> sphere_point(cplx w) {
  if (std::isinf(std::abs(w))) return {0.0, 0.0, 1.0};
  const double n = std::norm(w), d = 1.0 + n;
  return {2.0 * w.real() / d, 2.0 * w.imag() / d, (n - 1.0) / d};
}

inline std::array<double, 3> sphere_tangent(cplx w, cplx dw) {
  const double n = std::norm(w), d = 1.0 + n;
  const double dn = 2.0 * (w.real() * dw.real() + w.imag() * dw.imag());
  return {2.0 * dw.real() / d - 2.0 * w.real() * dn / (d * d),
          2.0 * dw.imag() / d - 2.0 * w.imag() * dn / (d * d), 2.0 * dn / (d * d)};
}

}  // namespace trp

#endif  // TRP_DIVISOR_HPP
