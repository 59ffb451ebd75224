#ifndef TRP_ORBITS_HPP
#define TRP_ORBITS_HPP

// Points of the triple reduced product: orbit sampling, the moment-map
// solver for X + Y + Z = 0, and gauge fixing of Y - Z.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "trp/error.hpp"
#include "trp/mat3.hpp"
#include "trp/random.hpp"
#include "trp/small_linalg.hpp"

namespace trp {

/// The three orbit labels: X lies on O(i lambda), Y on O(i mu), Z on O(i nu).
struct OrbitSpec {
  Spectrum3 lambda;
  Spectrum3 mu;
  Spectrum3 nu;

  bool operator==(const OrbitSpec&) const = default;
};

/// One representative (Y, Z) of a class in the reduced product; X = -(Y + Z).
struct ReducedPoint {
  AntiHermitian3 Y;
  AntiHermitian3 Z;
  OrbitSpec spec;
  double moment_residual = 0.0;
  std::uint64_t seed = 0;

  Complex3x3 X() const { return -(Y.mat() + Z.mat()); }

  bool operator==(const ReducedPoint&) const = default;
};

inline double spectrum_distance(const Real3& a, const Real3& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
}

/// || sorted eig(-i X) - lambda ||_2 with X = -(Y + Z).
inline double moment_residual(const Complex3x3& y, const Complex3x3& z, const Spectrum3& lambda) {
  return spectrum_distance(spectrum_of(-(y + z)), lambda.values());
}

/// Largest deviation of the three spectra from their orbit labels.
inline double orbit_membership_residual(const ReducedPoint& p) {
  const double ry = spectrum_distance(spectrum_of(p.Y.mat()), p.spec.mu.values());
  const double rz = spectrum_distance(spectrum_of(p.Z.mat()), p.spec.nu.values());
  const double rx = spectrum_distance(spectrum_of(p.X()), p.spec.lambda.values());
  return std::max({rx, ry, rz});
}

inline Complex3x3 orbit_element(const Spectrum3& s, const Complex3x3& u) {
  return u * Complex3x3::i_diag(s.values()) * adjoint(u);
}

/// U (i diag s) U^dagger for a Haar-random U drawn from the seed.
inline AntiHermitian3 sample_orbit(const Spectrum3& s, std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  return AntiHermitian3::unchecked(orbit_element(s, haar_unitary(rng)));
}

namespace detail {

// Anti-hermitian basis of u(3): i E_kk, then E_jk - E_kj and i (E_jk + E_kj).
inline const std::array<Complex3x3, 9>& u3_basis() {
  static const std::array<Complex3x3, 9> basis = [] {
    std::array<Complex3x3, 9> b{};
    for (int k = 0; k < 3; ++k) b[k](k, k) = kI;
    constexpr int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    for (int n = 0; n < 3; ++n) {
      const int j = pairs[n][0], k = pairs[n][1];
      b[3 + 2 * n](j, k) = 1.0;
      b[3 + 2 * n](k, j) = -1.0;
      b[4 + 2 * n](j, k) = kI;
      b[4 + 2 * n](k, j) = kI;
    }
    return b;
  }();
  return basis;
}

// Real coordinates of an anti-hermitian matrix whose Euclidean norm is the
// Frobenius norm of the matrix.
inline linalg::Vec<9> antiherm_coords(const Complex3x3& m) {
  const double r2 = std::sqrt(2.0);
  return {std::imag(m(0, 0)), std::imag(m(1, 1)), std::imag(m(2, 2)),
          r2 * std::real(m(0, 1)), r2 * std::imag(m(0, 1)),
          r2 * std::real(m(0, 2)), r2 * std::imag(m(0, 2)),
          r2 * std::real(m(1, 2)), r2 * std::imag(m(1, 2))};
}

inline Complex3x3 from_u3_coords(const double* c) {
  Complex3x3 m;
  const auto& b = u3_basis();
  for (int g = 0; g < 9; ++g) m += c[g] * b[g];
  return m;
}

struct MomentRun {
  std::array<Complex3x3, 3> u;  // frames for X, Y, Z
  double frob_residual = std::numeric_limits<double>::infinity();
};

// Levenberg-Marquardt on || U_X iL U_X^+ + U_Y iM U_Y^+ + U_Z iN U_Z^+ ||_F,
// with multiplicative updates U <- exp(Omega) U along u(3) directions.
inline MomentRun run_moment_descent(const OrbitSpec& spec, Rng& rng, double target) {
  const std::array<Complex3x3, 3> d{Complex3x3::i_diag(spec.lambda.values()),
                                    Complex3x3::i_diag(spec.mu.values()),
                                    Complex3x3::i_diag(spec.nu.values())};
  MomentRun run;
  for (auto& u : run.u) u = haar_unitary(rng);

  auto residual = [&](const std::array<Complex3x3, 3>& u, std::array<Complex3x3, 3>& m) {
    Complex3x3 r;
    for (int k = 0; k < 3; ++k) {
      m[k] = u[k] * d[k] * adjoint(u[k]);
      r += m[k];
    }
    return r;
  };

  std::array<Complex3x3, 3> m;
  Complex3x3 r = residual(run.u, m);
  double f = frobenius_norm(r);
  double mu = -1.0;
  const auto& basis = u3_basis();

  constexpr int kMaxIterations = 500;
  for (int it = 0; it < kMaxIterations && f > target; ++it) {
    std::array<linalg::Vec<9>, 27> cols;
    for (int k = 0; k < 3; ++k)
      for (int g = 0; g < 9; ++g) cols[9 * k + g] = antiherm_coords(commutator(basis[g], m[k]));
    const linalg::Vec<9> rv = antiherm_coords(r);

    linalg::Mat<9> jjt{};
    double trace_jjt = 0.0;
    for (int a = 0; a < 9; ++a) {
      for (int b = 0; b < 9; ++b) {
        double s = 0.0;
        for (const auto& c : cols) s += c[a] * c[b];
        jjt[a][b] = s;
      }
      trace_jjt += jjt[a][a];
    }
    double grad2 = 0.0;
    for (const auto& c : cols) grad2 += linalg::dot(c, rv) * linalg::dot(c, rv);
    const double scale = trace_jjt / 9.0 + std::numeric_limits<double>::min();
    if (std::sqrt(grad2) < 1e-12 * std::sqrt(scale)) break;  // stationary
    if (mu < 0.0) mu = 1e-6 * scale;

    bool accepted = false;
    while (!accepted) {
      linalg::Mat<9> sys = jjt;
      for (int a = 0; a < 9; ++a) sys[a][a] += mu;
      const auto w = linalg::solve_spd<9>(sys, rv);
      if (!w) {
        mu *= 4.0;
        continue;
      }
      std::array<Complex3x3, 3> trial = run.u;
      for (int k = 0; k < 3; ++k) {
        std::array<double, 9> step{};
        for (int g = 0; g < 9; ++g) step[g] = -linalg::dot(cols[9 * k + g], *w);
        trial[k] = reunitarize(expm_antihermitian(from_u3_coords(step.data())) * run.u[k]);
      }
      std::array<Complex3x3, 3> mt;
      const Complex3x3 rt = residual(trial, mt);
      const double ft = frobenius_norm(rt);
      if (ft < f) {
        run.u = trial;
        m = mt;
        r = rt;
        f = ft;
        mu = std::max(mu / 3.0, 1e-15 * scale);
        accepted = true;
      } else {
        mu *= 4.0;
        if (mu > 1e10 * scale) break;
      }
    }
    if (!accepted) break;
  }
  run.frob_residual = f;
  return run;
}

}  // namespace detail

inline constexpr int kDefaultMaxRestarts = 32;

/// Finds (Y, Z) on the mu and nu orbits with -(Y + Z) on the lambda orbit.
/// Restarts are tried in order from seeds derived from rng_seed; the first
/// one whose spectral residual is within tol is returned. Throws
/// InfeasibleError (with the best residual seen) when every restart stalls.
inline ReducedPoint solve_moment(const OrbitSpec& spec, std::uint64_t rng_seed, double tol = 1e-10,
                                 int max_restarts = kDefaultMaxRestarts) {
  double best = std::numeric_limits<double>::infinity();
  const double norm_scale =
      1.0 + std::abs(spec.lambda[0]) + std::abs(spec.lambda[2]) + std::abs(spec.mu[0]) +
      std::abs(spec.mu[2]) + std::abs(spec.nu[0]) + std::abs(spec.nu[2]);
  for (int restart = 0; restart < max_restarts; ++restart) {
    Rng rng(derive_seed(rng_seed, static_cast<std::uint64_t>(restart)));
    const auto run = detail::run_moment_descent(spec, rng, std::min(1e-3 * tol, 1e-14 * norm_scale));
    const Complex3x3 y = orbit_element(spec.mu, run.u[1]);
    const Complex3x3 z = orbit_element(spec.nu, run.u[2]);
    const double res = moment_residual(y, z, spec.lambda);
    best = std::min(best, res);
    if (res <= tol) {
      ReducedPoint p{AntiHermitian3(y), AntiHermitian3(z), spec, res, rng_seed};
      return p;
    }
  }
  throw InfeasibleError("orbit triple looks infeasible: moment map has no zero within tolerance after " +
                            std::to_string(max_restarts) + " restarts (best residual " +
                            std::to_string(best) + ")",
                        best);
}

/// Y - Z brought to diagonal form: V^dagger (Y - Z) V = i diag(alpha_hat),
/// S = V^dagger (Y + Z) V.
struct GaugedLax {
  Complex3x3 V;
  Real3 alpha_hat;  // descending
  Complex3x3 S;
};

inline constexpr double kTolGap = 1e-6;

inline double min_gap(const Real3& v) { return std::min(v[0] - v[1], v[1] - v[2]); }

inline GaugedLax gauge_diagonalize_A(const Complex3x3& y, const Complex3x3& z) {
  const auto eg = eig_hermitian(-kI * (y - z));
  if (!(min_gap(eg.values) > kTolGap))
    throw Error(ErrorKind::DegenerateA, "eigenvalues of -i(Y - Z) are not separated");
  return {eg.vectors, eg.values, adjoint(eg.vectors) * (y + z) * eg.vectors};
}

inline GaugedLax gauge_diagonalize_A(const ReducedPoint& p) {
  return gauge_diagonalize_A(p.Y.mat(), p.Z.mat());
}

/// Conjugates Y and Z by the common unitary u.
inline ReducedPoint apply_gauge(const ReducedPoint& p, const Complex3x3& u) {
  ReducedPoint q = p;
  q.Y = AntiHermitian3::unchecked(conjugate(p.Y.mat(), u));
  q.Z = AntiHermitian3::unchecked(conjugate(p.Z.mat(), u));
  return q;
}

inline ReducedPoint random_gauge(const ReducedPoint& p, std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  ReducedPoint q = apply_gauge(p, haar_special_unitary(rng));
  q.moment_residual = moment_residual(q.Y.mat(), q.Z.mat(), q.spec.lambda);
  return q;
}

}  // namespace trp

#endif  // TRP_ORBITS_HPP
