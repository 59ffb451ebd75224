#ifndef TRP_MAT3_HPP
#define TRP_MAT3_HPP

// Fixed-size 3x3 complex matrix algebra, a closed-form Hermitian
// eigensolver, and predicates for su(3).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <utility>

#include "trp/error.hpp"

namespace trp {

using cplx = std::complex<double>;
using Real3 = std::array<double, 3>;
using Cplx3 = std::array<cplx, 3>;

inline constexpr cplx kI{0.0, 1.0};

/// Entrywise residual tolerance for structural predicates (hermiticity,
/// unitarity, tracelessness).
inline constexpr double kTolStructural = 1e-10;

/// Row-major 3x3 complex matrix.
struct Complex3x3 {
  std::array<cplx, 9> e{};

  cplx& operator()(int r, int c) { return e[3 * r + c]; }
  const cplx& operator()(int r, int c) const { return e[3 * r + c]; }

  static Complex3x3 zero() { return {}; }

  static Complex3x3 identity() {
    Complex3x3 m;
    m(0, 0) = m(1, 1) = m(2, 2) = 1.0;
    return m;
  }

  static Complex3x3 diag(const Cplx3& d) {
    Complex3x3 m;
    for (int k = 0; k < 3; ++k) m(k, k) = d[k];
    return m;
  }

  /// i * diag(d), the standard representative of a coadjoint orbit.
  static Complex3x3 i_diag(const Real3& d) {
    Complex3x3 m;
    for (int k = 0; k < 3; ++k) m(k, k) = cplx(0.0, d[k]);
    return m;
  }

  Complex3x3& operator+=(const Complex3x3& o) {
    for (int k = 0; k < 9; ++k) e[k] += o.e[k];
    return *this;
  }
  Complex3x3& operator-=(const Complex3x3& o) {
    for (int k = 0; k < 9; ++k) e[k] -= o.e[k];
    return *this;
  }
  Complex3x3& operator*=(cplx s) {
    for (auto& x : e) x *= s;
    return *this;
  }

  bool operator==(const Complex3x3&) const = default;
};

inline Complex3x3 operator+(Complex3x3 a, const Complex3x3& b) { return a += b; }
inline Complex3x3 operator-(Complex3x3 a, const Complex3x3& b) { return a -= b; }
inline Complex3x3 operator-(Complex3x3 a) {
  for (auto& x : a.e) x = -x;
  return a;
}
inline Complex3x3 operator*(cplx s, Complex3x3 a) { return a *= s; }
inline Complex3x3 operator*(Complex3x3 a, cplx s) { return a *= s; }
inline Complex3x3 operator*(double s, Complex3x3 a) { return a *= cplx(s); }

inline Complex3x3 operator*(const Complex3x3& a, const Complex3x3& b) {
  Complex3x3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j) + a(i, 2) * b(2, j);
  return r;
}

inline Cplx3 operator*(const Complex3x3& a, const Cplx3& v) {
  Cplx3 r{};
  for (int i = 0; i < 3; ++i) r[i] = a(i, 0) * v[0] + a(i, 1) * v[1] + a(i, 2) * v[2];
  return r;
}

inline Complex3x3 adjoint(const Complex3x3& a) {
  Complex3x3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = std::conj(a(j, i));
  return r;
}

inline cplx trace(const Complex3x3& a) { return a(0, 0) + a(1, 1) + a(2, 2); }

inline cplx det(const Complex3x3& a) {
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

inline Complex3x3 commutator(const Complex3x3& a, const Complex3x3& b) { return a * b - b * a; }

inline double frobenius_norm(const Complex3x3& a) {
  double s = 0.0;
  for (const auto& x : a.e) s += std::norm(x);
  return std::sqrt(s);
}

inline double max_abs(const Complex3x3& a) {
  double m = 0.0;
  for (const auto& x : a.e) m = std::max(m, std::abs(x));
  return m;
}

/// max |M + M^dagger| entrywise.
inline double antihermitian_residual(const Complex3x3& m) {
  double r = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r = std::max(r, std::abs(m(i, j) + std::conj(m(j, i))));
  return r;
}

/// max |M - M^dagger| entrywise.
inline double hermitian_residual(const Complex3x3& m) {
  double r = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r = std::max(r, std::abs(m(i, j) - std::conj(m(j, i))));
  return r;
}

inline double unitarity_residual(const Complex3x3& u) {
  return max_abs(u * adjoint(u) - Complex3x3::identity());
}

inline bool is_su3(const Complex3x3& m) {
  return antihermitian_residual(m) <= kTolStructural && std::abs(trace(m)) <= kTolStructural;
}

/// Traceless anti-hermitian 3x3 matrix, an element of su(3).
class AntiHermitian3 {
 public:
  AntiHermitian3() = default;

  /// Validating constructor; throws InputError outside su(3).
  explicit AntiHermitian3(const Complex3x3& m) : m_(m) {
    const double scale = std::max(1.0, max_abs(m));
    if (antihermitian_residual(m) > kTolStructural * scale ||
        std::abs(trace(m)) > kTolStructural * scale)
      throw Error(ErrorKind::InputError, "matrix is not in su(3)");
  }

  /// Wraps without validation. For values produced by structure-preserving
  /// arithmetic (conjugation, flow steps) whose drift is monitored elsewhere.
  static AntiHermitian3 unchecked(const Complex3x3& m) {
    AntiHermitian3 a;
    a.m_ = m;
    return a;
  }

  const Complex3x3& mat() const { return m_; }

  bool operator==(const AntiHermitian3&) const = default;

 private:
  Complex3x3 m_{};
};

/// Three real eigenvalues, sorted descending and summing to zero.
class Spectrum3 {
 public:
  Spectrum3() = default;

  explicit Spectrum3(const Real3& v) : v_(v) {
    if (!(v[0] >= v[1] && v[1] >= v[2]))
      throw Error(ErrorKind::InputError, "spectrum must be sorted descending");
    const double scale = std::max({1.0, std::abs(v[0]), std::abs(v[2])});
    if (std::abs(v[0] + v[1] + v[2]) > kTolStructural * scale)
      throw Error(ErrorKind::InputError, "spectrum must sum to zero");
  }

  const Real3& values() const { return v_; }
  double operator[](int k) const { return v_[k]; }

  bool operator==(const Spectrum3&) const = default;

 private:
  Real3 v_{};
};

struct HermitianEigen {
  Real3 values;  // descending
  Complex3x3 vectors;  // columns are eigenvectors
};

namespace detail {

inline Cplx3 column(const Complex3x3& m, int c) { return {m(0, c), m(1, c), m(2, c)}; }

inline void set_column(Complex3x3& m, int c, const Cplx3& v) {
  for (int r = 0; r < 3; ++r) m(r, c) = v[r];
}

inline cplx dot(const Cplx3& a, const Cplx3& b) {  // a^dagger b
  return std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1] + std::conj(a[2]) * b[2];
}

inline double norm(const Cplx3& a) { return std::sqrt(std::real(dot(a, a))); }

inline Cplx3 scaled(const Cplx3& a, cplx s) { return {a[0] * s, a[1] * s, a[2] * s}; }

inline Cplx3 cross(const Cplx3& a, const Cplx3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// Unit vector orthogonal (hermitian product) to the unit vector v.
inline Cplx3 orthogonal_unit(const Cplx3& v) {
  int k = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(v[i]) < std::abs(v[k])) k = i;
  Cplx3 w{};
  w[k] = 1.0;
  const cplx p = dot(v, w);
  for (int i = 0; i < 3; ++i) w[i] -= p * v[i];
  return scaled(w, 1.0 / norm(w));
}

// Eigen-decomposition of [[a, b], [conj(b), d]] with a, d real. Returns the
// unitary whose first column belongs to the larger eigenvalue.
struct Eigen2 {
  double hi, lo;
  std::array<cplx, 4> u;  // row-major 2x2
};

inline Eigen2 eig2(double a, cplx b, double d) {
  const double half = 0.5 * (a - d);
  const double r = std::hypot(half, std::abs(b));
  const double m = 0.5 * (a + d);
  Eigen2 out{m + r, m - r, {1.0, 0.0, 0.0, 1.0}};
  if (std::abs(b) == 0.0) {
    if (a < d) out.u = {0.0, 1.0, 1.0, 0.0};
    return out;
  }
  cplx v1, v2;
  if (half >= 0.0) {
    v1 = half + r;  // e_hi - d
    v2 = std::conj(b);
  } else {
    v1 = b;
    v2 = r - half;  // e_hi - a
  }
  const double n = std::sqrt(std::norm(v1) + std::norm(v2));
  v1 /= n;
  v2 /= n;
  out.u = {v1, -std::conj(v2), v2, std::conj(v1)};
  return out;
}

// One cyclic Jacobi sweep on the hermitian matrix d, accumulating into u.
// Each rotation is chosen close to the identity so column order is kept.
inline void jacobi_sweep(Complex3x3& d, Complex3x3& u) {
  constexpr int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (const auto& pq : pairs) {
    const int p = pq[0], q = pq[1];
    if (std::abs(d(p, q)) == 0.0) continue;
    Eigen2 e = eig2(std::real(d(p, p)), d(p, q), std::real(d(q, q)));
    cplx g[2][2] = {{e.u[0], e.u[1]}, {e.u[2], e.u[3]}};
    if (std::real(d(p, p)) < std::real(d(q, q))) {
      std::swap(g[0][0], g[0][1]);
      std::swap(g[1][0], g[1][1]);
    }
    for (int c = 0; c < 2; ++c) {
      const double mag = std::abs(g[c][c]);
      if (mag > 0.0) {
        const cplx ph = std::conj(g[c][c]) / mag;
        g[0][c] *= ph;
        g[1][c] *= ph;
      }
    }
    Complex3x3 gm = Complex3x3::identity();
    gm(p, p) = g[0][0];
    gm(p, q) = g[0][1];
    gm(q, p) = g[1][0];
    gm(q, q) = g[1][1];
    d = adjoint(gm) * d * gm;
    u = u * gm;
  }
}

}  // namespace detail

/// Eigen-decomposition of a hermitian matrix: values descending, unitary
/// vectors with M = U diag(values) U^dagger.
///
/// Eigenvalues come from the trigonometric solution of the shifted
/// characteristic cubic. The eigenvector of the best-isolated eigenvalue is
/// taken from a cross product of rows of (M - e I); the remaining pair is
/// resolved exactly on its two-dimensional complement, and a Jacobi sweep
/// polishes the result. Repeated eigenvalues yield an arbitrary orthonormal
/// basis of the eigenspace.
inline HermitianEigen eig_hermitian(const Complex3x3& m) {
  const double scale = std::max(1.0, max_abs(m));
  if (hermitian_residual(m) > kTolStructural * scale)
    throw Error(ErrorKind::NotHermitian, "hermitian residual exceeds tolerance");

  Complex3x3 h;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) h(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));

  const double mean = std::real(trace(h)) / 3.0;
  Complex3x3 b = h;
  for (int k = 0; k < 3; ++k) b(k, k) -= mean;
  const double p = frobenius_norm(b) / std::sqrt(6.0);
  if (p == 0.0) return {{mean, mean, mean}, Complex3x3::identity()};

  const double r = std::clamp(0.5 * std::real(det((1.0 / p) * b)), -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  Real3 ev;
  ev[0] = 2.0 * p * std::cos(phi);
  ev[2] = 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  ev[1] = -ev[0] - ev[2];

  const int iso = (ev[0] - ev[1] >= ev[1] - ev[2]) ? 0 : 2;
  Complex3x3 n = b;
  for (int k = 0; k < 3; ++k) n(k, k) -= ev[iso];
  const Cplx3 r0{n(0, 0), n(0, 1), n(0, 2)};
  const Cplx3 r1{n(1, 0), n(1, 1), n(1, 2)};
  const Cplx3 r2{n(2, 0), n(2, 1), n(2, 2)};
  std::array<Cplx3, 3> cand{detail::cross(r0, r1), detail::cross(r0, r2), detail::cross(r1, r2)};
  int best = 0;
  for (int k = 1; k < 3; ++k)
    if (detail::norm(cand[k]) > detail::norm(cand[best])) best = k;
  // Each row of N dotted (bilinearly) with a cross product of two rows is a
  // determinant with a repeated row; N has rank two, so that is the null vector.
  const Cplx3 v = detail::scaled(cand[best], 1.0 / detail::norm(cand[best]));

  const Cplx3 w1 = detail::orthogonal_unit(v);
  Cplx3 w2 = detail::cross(v, w1);
  for (auto& x : w2) x = std::conj(x);
  w2 = detail::scaled(w2, 1.0 / detail::norm(w2));

  const Cplx3 bw1 = b * w1, bw2 = b * w2;
  const auto e2 = detail::eig2(std::real(detail::dot(w1, bw1)), detail::dot(w1, bw2),
                               std::real(detail::dot(w2, bw2)));
  Cplx3 hi, lo;
  for (int k = 0; k < 3; ++k) {
    hi[k] = e2.u[0] * w1[k] + e2.u[2] * w2[k];
    lo[k] = e2.u[1] * w1[k] + e2.u[3] * w2[k];
  }

  Complex3x3 u;
  if (iso == 0) {
    detail::set_column(u, 0, v);
    detail::set_column(u, 1, hi);
    detail::set_column(u, 2, lo);
  } else {
    detail::set_column(u, 0, hi);
    detail::set_column(u, 1, lo);
    detail::set_column(u, 2, v);
  }

  Complex3x3 d = adjoint(u) * b * u;
  detail::jacobi_sweep(d, u);

  std::array<int, 3> order{0, 1, 2};
  Real3 vals{std::real(d(0, 0)), std::real(d(1, 1)), std::real(d(2, 2))};
  std::sort(order.begin(), order.end(), [&](int a, int c) { return vals[a] > vals[c]; });
  HermitianEigen out;
  for (int k = 0; k < 3; ++k) {
    out.values[k] = vals[order[k]] + mean;
    detail::set_column(out.vectors, k, detail::column(u, order[k]));
  }
  return out;
}

/// Eigenvalues of -iM for anti-hermitian M, descending.
inline Real3 spectrum_of(const Complex3x3& anti) { return eig_hermitian(-kI * anti).values; }

/// U M U^dagger; throws NotUnitary when U is not unitary within tolerance.
inline Complex3x3 conjugate(const Complex3x3& m, const Complex3x3& u) {
  if (unitarity_residual(u) > kTolStructural)
    throw Error(ErrorKind::NotUnitary, "conjugating matrix is not unitary");
  return u * m * adjoint(u);
}

/// exp(Omega) for anti-hermitian Omega, via the eigen-decomposition of -i Omega.
inline Complex3x3 expm_antihermitian(const Complex3x3& omega) {
  const auto eg = eig_hermitian(-kI * omega);
  Cplx3 ph;
  for (int k = 0; k < 3; ++k) ph[k] = std::polar(1.0, eg.values[k]);
  return eg.vectors * Complex3x3::diag(ph) * adjoint(eg.vectors);
}

/// Re-orthonormalizes the columns of a nearly unitary matrix (Gram-Schmidt).
inline Complex3x3 reunitarize(const Complex3x3& u) {
  Complex3x3 q;
  for (int c = 0; c < 3; ++c) {
    Cplx3 v = detail::column(u, c);
    for (int k = 0; k < c; ++k) {
      const Cplx3 qk = detail::column(q, k);
      const cplx p = detail::dot(qk, v);
      for (int i = 0; i < 3; ++i) v[i] -= p * qk[i];
    }
    detail::set_column(q, c, detail::scaled(v, 1.0 / detail::norm(v)));
  }
  return q;
}

}  // namespace trp

#endif  // TRP_MAT3_HPP
