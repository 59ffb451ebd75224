#ifndef TRP_SPECTRAL_HPP
#define TRP_SPECTRAL_HPP

// Lax matrix L(z) = (Y - Z) z + (Y + Z), the coefficients of its
// characteristic polynomial, the discriminant sextic of the real cubic and
// the reality diagnostics of the spectral curve.
//
// Polynomial coefficient arrays are stored in ascending powers of z.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "trp/mat3.hpp"
#include "trp/orbits.hpp"

namespace trp {

struct LaxMatrix {
  AntiHermitian3 A;  // Y - Z
  AntiHermitian3 B;  // Y + Z

  Complex3x3 operator()(cplx z) const { return z * A.mat() + B.mat(); }
};

inline LaxMatrix lax_matrix(const ReducedPoint& p) {
  return {AntiHermitian3::unchecked(p.Y.mat() - p.Z.mat()),
          AntiHermitian3::unchecked(p.Y.mat() + p.Z.mat())};
}

template <std::size_t N>
cplx horner(const std::array<cplx, N>& c, cplx z) {
  cplx v = 0.0;
  for (std::size_t k = N; k-- > 0;) v = v * z + c[k];
  return v;
}

template <std::size_t N>
double horner(const std::array<double, N>& c, double z) {
  double v = 0.0;
  for (std::size_t k = N; k-- > 0;) v = v * z + c[k];
  return v;
}

/// Real coefficients evaluated at a complex argument.
template <std::size_t N>
cplx horner_c(const std::array<double, N>& c, cplx z) {
  cplx v = 0.0;
  for (std::size_t k = N; k-- > 0;) v = v * z + c[k];
  return v;
}

template <typename T, std::size_t N, std::size_t M>
std::array<T, N + M - 1> poly_mul(const std::array<T, N>& a, const std::array<T, M>& b) {
  std::array<T, N + M - 1> r{};
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < M; ++j) r[i + j] += a[i] * b[j];
  return r;
}

/// Hitchin-map data of one point:
///   rho(z, eta) = (i H z (z^2 - 1) + Q0(z)) + Q1(z) eta - eta^3,
/// and the discriminant of the real cubic x^3 + Q1 x + (H z (z^2 - 1) - i Q0)
/// obtained from eta = i x.
struct SpectralData {
  double H = 0.0;
  std::array<cplx, 3> Q0{};
  std::array<double, 3> Q1{};
  std::array<double, 7> disc{};
  double c = 0.0;
  double H_bound = 0.0;

  // Residuals of quantities that are real or imaginary in exact arithmetic.
  double H_real_residual = 0.0;     // |Re det A|
  double Q1_imag_residual = 0.0;    // max |Im Q1_k|
  double detL_real_residual = 0.0;  // max |Re| over det L(z) coefficients
  double disc_imag_residual = 0.0;  // max |Im| over the complex sextic
  std::array<cplx, 4> detL{};       // det L(z), for identity checks
};

/// Coefficients of det(A z + B), from multilinearity in the columns.
inline std::array<cplx, 4> det_pencil(const Complex3x3& a, const Complex3x3& b) {
  std::array<cplx, 4> c{};
  for (unsigned mask = 0; mask < 8; ++mask) {
    Complex3x3 m;
    for (int col = 0; col < 3; ++col) {
      const Complex3x3& src = (mask >> col) & 1u ? a : b;
      for (int row = 0; row < 3; ++row) m(row, col) = src(row, col);
    }
    c[std::popcount(mask)] += det(m);
  }
  return c;
}

inline SpectralData charpoly(const LaxMatrix& L) {
  const Complex3x3& a = L.A.mat();
  const Complex3x3& b = L.B.mat();
  SpectralData sd;
  sd.detL = det_pencil(a, b);

  const cplx det_a = sd.detL[3];
  sd.H = std::imag(det_a);  // H = -i det A
  sd.H_real_residual = std::abs(std::real(det_a));

  const std::array<cplx, 3> q1c{0.5 * trace(b * b), trace(a * b), 0.5 * trace(a * a)};
  for (int k = 0; k < 3; ++k) {
    sd.Q1[k] = std::real(q1c[k]);
    sd.Q1_imag_residual = std::max(sd.Q1_imag_residual, std::abs(std::imag(q1c[k])));
  }
  for (const auto& x : sd.detL)
    sd.detL_real_residual = std::max(sd.detL_real_residual, std::abs(std::real(x)));

  const cplx iH = kI * sd.H;
  sd.Q0 = {sd.detL[0], sd.detL[1] + iH, sd.detL[2]};

  // Constant term of the real cubic: H z (z^2 - 1) - i Q0(z).
  const std::array<cplx, 4> qc{-kI * sd.Q0[0], -sd.H - kI * sd.Q0[1], -kI * sd.Q0[2], sd.H};
  const std::array<cplx, 3> p{q1c[0], q1c[1], q1c[2]};
  const auto p3 = poly_mul(poly_mul(p, p), p);
  const auto q2 = poly_mul(qc, qc);
  for (int k = 0; k < 7; ++k) {
    const cplx d = -4.0 * p3[k] - 27.0 * q2[k];
    sd.disc[k] = std::real(d);
    sd.disc_imag_residual = std::max(sd.disc_imag_residual, std::abs(std::imag(d)));
  }
  sd.c = -4.0 * sd.Q1[2] * sd.Q1[2] * sd.Q1[2];
  sd.H_bound = std::sqrt(std::max(sd.c, 0.0) / 27.0);
  return sd;
}

inline SpectralData charpoly(const ReducedPoint& p) { return charpoly(lax_matrix(p)); }

inline cplx q0_at(const SpectralData& sd, cplx z) { return horner(sd.Q0, z); }
inline cplx q1_at(const SpectralData& sd, cplx z) { return horner_c(sd.Q1, z); }

inline cplx eval_rho(const SpectralData& sd, cplx z, cplx eta) {
  return kI * sd.H * z * (z * z - 1.0) + q0_at(sd, z) + q1_at(sd, z) * eta - eta * eta * eta;
}

/// d rho / d eta = Q1(z) - 3 eta^2.
inline cplx rho_eta(const SpectralData& sd, cplx z, cplx eta) {
  return q1_at(sd, z) - 3.0 * eta * eta;
}

/// d rho / d z at fixed eta.
inline cplx rho_z(const SpectralData& sd, cplx z, cplx eta) {
  const cplx dq0 = sd.Q0[1] + 2.0 * sd.Q0[2] * z;
  const cplx dq1 = sd.Q1[1] + 2.0 * sd.Q1[2] * z;
  return kI * sd.H * (3.0 * z * z - 1.0) + dq0 + dq1 * eta;
}

/// Real roots x1 >= x2 >= x3 of x^3 + Q1(z) x + (H z (z^2 - 1) - i Q0(z)) at
/// real z; these are the eigenvalues of -i L(z).
inline Real3 real_branches(const SpectralData& sd, double z) {
  const double p = horner(sd.Q1, z);
  const double q = sd.H * z * (z * z - 1.0) + std::imag(q0_at(sd, z));  // -i Q0 is real
  Real3 x{};
  if (p < 0.0) {
    const double m = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
    const double th = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) x[k] = m * std::cos(th - 2.0 * std::numbers::pi * k / 3.0);
  } else {
    x.fill(-std::cbrt(q));
  }
  // One Newton polish where the root is simple.
  const double len = std::max(std::sqrt(std::abs(p)), std::cbrt(std::abs(q)));
  for (auto& r : x) {
    const double f = r * r * r + p * r + q;
    const double df = 3.0 * r * r + p;
    if (std::abs(df) > 1e-6 * len * len) r -= f / df;
  }
  std::sort(x.begin(), x.end(), std::greater<>());
  return x;
}

/// Minimum of the discriminant sextic on [z_lo, z_hi]: uniform grid, then
/// golden-section descent around every grid-local minimum.
inline double discriminant_min(const SpectralData& sd, double z_lo, double z_hi, int n_grid) {
  const auto f = [&](double z) { return horner(sd.disc, z); };
  std::vector<double> zs(n_grid), fs(n_grid);
  for (int i = 0; i < n_grid; ++i) {
    zs[i] = z_lo + (z_hi - z_lo) * i / (n_grid - 1);
    fs[i] = f(zs[i]);
  }
  double best = *std::min_element(fs.begin(), fs.end());
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int i = 0; i < n_grid; ++i) {
    const bool left_ok = i == 0 || fs[i] <= fs[i - 1];
    const bool right_ok = i == n_grid - 1 || fs[i] <= fs[i + 1];
    if (!(left_ok && right_ok)) continue;
    double a = zs[std::max(i - 1, 0)], b = zs[std::min(i + 1, n_grid - 1)];
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 80 && (b - a) > 1e-15 * (1.0 + std::abs(a)); ++it) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - invphi * (b - a);
        fc = f(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + invphi * (b - a);
        fd = f(d);
      }
    }
    best = std::min({best, fc, fd});
  }
  return best;
}

/// Default half-width of the window on which discriminant positivity is
/// checked: 10 (1 + Cauchy root bound of the sextic).
inline double discriminant_window(const SpectralData& sd) {
  double lead = 0.0;
  int deg = 6;
  for (; deg > 0; --deg) {
    if (std::abs(sd.disc[deg]) > 1e-12 * (1.0 + std::abs(sd.disc[0]))) {
      lead = std::abs(sd.disc[deg]);
      break;
    }
  }
  double bound = 0.0;
  if (lead > 0.0)
    for (int k = 0; k < deg; ++k) bound = std::max(bound, std::abs(sd.disc[k]) / lead);
  return 10.0 * (1.0 + std::min(bound, 1e3));
}

struct RealityReport {
  double q1_imag = 0.0;    // max |Im| over Q1 coefficients
  double detL_real = 0.0;  // max |Re| over det L(z) coefficients (Q0 and iH)

  bool ok(double tol = 1e-10) const { return q1_imag <= tol && detL_real <= tol; }
};

/// The curve is invariant under (z, eta) -> (conj z, -conj eta) exactly when
/// Q1 is real and det L(z) has imaginary coefficients.
inline RealityReport reality_check(const SpectralData& sd) {
  return {sd.Q1_imag_residual, sd.detL_real_residual};
}

}  // namespace trp

#endif  // TRP_SPECTRAL_HPP
