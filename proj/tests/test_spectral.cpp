#include <gtest/gtest.h>

#include <random>

#include "test_fixtures.hpp"
#include "trp/fixtures.hpp"
#include "trp/orbits.hpp"
#include "trp/spectral.hpp"

using namespace trp;
using oracle::fixture_point;

namespace {

const Spectrum3 kStd({1.0, 0.0, -1.0});
const OrbitSpec kSpec{kStd, kStd, kStd};

LaxMatrix diag_lax(const Real3& a) {
  return {AntiHermitian3(Complex3x3::i_diag(a)), AntiHermitian3(Complex3x3::zero())};
}

}  // namespace

TEST(LaxMatrix, ZeroAndAntipodalPoints) {
  ReducedPoint p;
  const LaxMatrix L0 = lax_matrix(p);
  EXPECT_EQ(max_abs(L0.A.mat()), 0.0);
  EXPECT_EQ(max_abs(L0.B.mat()), 0.0);
  p.Y = AntiHermitian3(Complex3x3::i_diag({1.0, 0.0, -1.0}));
  p.Z = AntiHermitian3(-p.Y.mat());
  const LaxMatrix L = lax_matrix(p);
  EXPECT_EQ(max_abs(L.A.mat() - Complex3x3::i_diag({2.0, 0.0, -2.0})), 0.0);
  EXPECT_EQ(max_abs(L.B.mat()), 0.0);
}

TEST(LaxMatrix, PuncturesRecoverOrbitLabels) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const ReducedPoint p = solve_moment(kSpec, s);
    const LaxMatrix L = lax_matrix(p);
    const Real3 at1 = spectrum_of(L(1.0)), atm1 = spectrum_of(L(-1.0));
    for (int k = 0; k < 3; ++k) {
      EXPECT_NEAR(at1[k] / 2.0, kStd[k], 1e-10);
      EXPECT_NEAR(atm1[k] / 2.0, kStd[k], 1e-10);
    }
  }
}

TEST(Charpoly, MatchesOracleFixtures) {
  for (const auto* f : {&oracle::kMixed, &oracle::kSeed3, &oracle::kSeed8}) {
    const SpectralData sd = charpoly(fixture_point(*f));
    EXPECT_NEAR(sd.H, f->H, 1e-13);
    for (int k = 0; k < 3; ++k) {
      EXPECT_NEAR(std::abs(sd.Q0[k] - f->Q0[k]), 0.0, 1e-13);
      EXPECT_NEAR(sd.Q1[k], f->Q1[k], 1e-13);
    }
    for (int k = 0; k < 7; ++k) EXPECT_NEAR(sd.disc[k], f->disc[k], 1e-11 * (1.0 + std::abs(f->disc[k])));
  }
}

TEST(Charpoly, MixedSpectraCasimirsAreOrbitData) {
  // Q0 and Q1 of the oracle point, recomputed on an independently solved
  // point of the same orbit triple.
  const auto& f = oracle::kMixed;
  const OrbitSpec spec{Spectrum3(f.lambda), Spectrum3(f.mu), Spectrum3(f.nu)};
  for (std::uint64_t s = 0; s < 5; ++s) {
    const SpectralData sd = charpoly(solve_moment(spec, s));
    for (int k = 0; k < 3; ++k) {
      EXPECT_NEAR(std::abs(sd.Q0[k] - f.Q0[k]), 0.0, 1e-9);
      EXPECT_NEAR(sd.Q1[k], f.Q1[k], 1e-9);
    }
  }
}

TEST(Charpoly, DiagonalClosedForms) {
  const SpectralData sd = charpoly(diag_lax({1.0, 1.0, -2.0}));
  EXPECT_NEAR(sd.H, 2.0, 1e-15);
  EXPECT_NEAR(sd.Q1[2], -3.0, 1e-15);
  EXPECT_NEAR(sd.c, 108.0, 1e-12);
  EXPECT_NEAR(sd.H_bound, 2.0, 1e-15);

  const SpectralData z = charpoly(LaxMatrix{});
  EXPECT_EQ(z.H, 0.0);
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(std::abs(z.Q0[k]), 0.0);
    EXPECT_EQ(z.Q1[k], 0.0);
  }
  EXPECT_EQ(eval_rho(z, 5.0, 2.0), cplx(-8.0));
}

TEST(Charpoly, PolynomialIdentityAgainstDirectDeterminant) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const ReducedPoint p = solve_moment(kSpec, s);
    const LaxMatrix L = lax_matrix(p);
    const SpectralData sd = charpoly(L);
    for (int k = 0; k < 20; ++k) {
      const cplx z(2.0 * g(rng), 2.0 * g(rng)), eta(g(rng), g(rng));
      Complex3x3 m = L(z);
      for (int i = 0; i < 3; ++i) m(i, i) -= eta;
      EXPECT_LE(std::abs(det(m) - eval_rho(sd, z, eta)), 1e-9 * (1.0 + std::pow(std::abs(z), 6)));
    }
  }
}

TEST(Charpoly, TraceFormRealityAndInterval) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const ReducedPoint p = solve_moment(kSpec, s);
    const SpectralData sd = charpoly(p);
    const Complex3x3 a = p.Y.mat() - p.Z.mat();
    EXPECT_LE(std::abs(-kI * trace(a * a * a) / 3.0 - sd.H), 1e-10 * (1.0 + std::abs(sd.H)));
    const double an = frobenius_norm(a);
    EXPECT_LE(sd.H_real_residual, 1e-10 * (1.0 + an * an * an));
    EXPECT_TRUE(reality_check(sd).ok());
    EXPECT_GT(-27.0 * sd.H * sd.H + sd.c, 0.0);
  }
}

TEST(Charpoly, RealityCheckFlagsPerturbedPair) {
  LaxMatrix L = lax_matrix(fixture_point(oracle::kSeed3));
  Complex3x3 b = L.B.mat();
  b(0, 1) += 1e-3;
  L.B = AntiHermitian3::unchecked(b);
  EXPECT_FALSE(reality_check(charpoly(L)).ok());
  const SpectralData z = charpoly(LaxMatrix{});
  EXPECT_EQ(reality_check(z).q1_imag, 0.0);
  EXPECT_EQ(reality_check(z).detL_real, 0.0);
}

TEST(RealBranches, OracleEigenvalues) {
  const SpectralData sd = charpoly(fixture_point(oracle::kSeed3));
  const Real3 a = real_branches(sd, -1.5), b = real_branches(sd, 0.25), c = real_branches(sd, 2.0);
  const Real3 ea{2.7863077197342467, -0.0048574332304956646, -2.7814502865037465};
  const Real3 eb{1.091700673764983, -0.0039626832347891515, -1.0877379905301943};
  const Real3 ec{3.6009090840956977, 0.0092665210051855896, -3.6101756051008858};
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(a[k], ea[k], 1e-12);
    EXPECT_NEAR(b[k], eb[k], 1e-12);
    EXPECT_NEAR(c[k], ec[k], 1e-12);
  }
}

TEST(RealBranches, TrivialCases) {
  const Real3 z = real_branches(charpoly(LaxMatrix{}), 1.0);
  for (double x : z) EXPECT_EQ(x, 0.0);
  const Real3 d = real_branches(charpoly(diag_lax({2.0, 0.0, -2.0})), 1.0);
  EXPECT_NEAR(d[0], 2.0, 1e-14);
  EXPECT_NEAR(d[1], 0.0, 1e-14);
  EXPECT_NEAR(d[2], -2.0, 1e-14);
}

TEST(RealBranches, MatchEigensolverOnRandomPairs) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> zd(-4.0, 4.0);
  for (std::uint64_t s = 0; s < 100; ++s) {
    const ReducedPoint p = solve_moment(kSpec, s);
    const LaxMatrix L = lax_matrix(p);
    const SpectralData sd = charpoly(L);
    const double z = zd(rng);
    const Real3 x = real_branches(sd, z), e = eig_hermitian(-kI * L(z)).values;
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(x[k], e[k], 1e-10) << "seed " << s << " z " << z;
    for (double xk : x) EXPECT_LE(std::abs(eval_rho(sd, z, kI * xk)), 1e-9);
  }
}

TEST(Discriminant, PositiveForInteriorPoints) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const SpectralData sd = charpoly(solve_moment(kSpec, s));
    EXPECT_GT(discriminant_min(sd, -10.0, 10.0, 2048), 0.0);
    const double w = discriminant_window(sd);
    EXPECT_GT(discriminant_min(sd, -w, w, 4001), 0.0);
  }
}

TEST(Discriminant, BoundaryNormalFormLosesTopDegreeAndStaysPositiveOnFiniteWindow) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const SpectralData sd = charpoly(boundary_normal_form(0.5 + 0.2 * static_cast<double>(s), s));
    double scale = 0.0;
    for (double c : sd.disc) scale = std::max(scale, std::abs(c));
    EXPECT_LE(std::abs(sd.disc[6]), 1e-12 * scale);
    EXPECT_NEAR(std::abs(sd.H), sd.H_bound, 1e-12 * sd.H_bound);
    EXPECT_GT(discriminant_min(sd, -10.0, 10.0, 2048), 0.0);
  }
}

TEST(Discriminant, ZeroPointIsIdenticallyZero) {
  EXPECT_EQ(discriminant_min(charpoly(LaxMatrix{}), -10.0, 10.0, 101), 0.0);
}

TEST(Boundary, RepeatedEigenvalueMeetsIntervalEnd) {
  for (const Real3& d : {Real3{1.0, 1.0, -2.0}, Real3{2.0, -1.0, -1.0}}) {
    const LaxMatrix L = diag_lax(d);
    const SpectralData sd = charpoly(L);
    const double c = -4.0 * std::pow(std::real(trace(L.A.mat() * L.A.mat())) / 2.0, 3);
    EXPECT_NEAR(std::abs(sd.H), std::sqrt(c / 27.0), 1e-12 * std::sqrt(c / 27.0));
    EXPECT_NEAR(-27.0 * sd.H * sd.H + sd.c, 0.0, 1e-12 * sd.c);
  }
  EXPECT_GT(charpoly(diag_lax({1.0, 1.0, -2.0})).H, 0.0);
  EXPECT_LT(charpoly(diag_lax({2.0, -1.0, -1.0})).H, 0.0);
}
