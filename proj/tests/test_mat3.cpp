#include <gtest/gtest.h>

#include <random>

#include "trp/mat3.hpp"
#include "trp/random.hpp"

using namespace trp;

namespace {

Complex3x3 random_hermitian(Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Complex3x3 m;
  for (auto& x : m.e) x = cplx(g(rng), g(rng));
  return 0.5 * (m + adjoint(m));
}

double reconstruction_error(const Complex3x3& m, const HermitianEigen& e) {
  const Complex3x3 d = Complex3x3::diag({e.values[0], e.values[1], e.values[2]});
  return frobenius_norm(e.vectors * d * adjoint(e.vectors) - m);
}

}  // namespace

TEST(Eigensolver, DiagonalInputIsReturnedSortedWithIdentity) {
  const auto e = eig_hermitian(Complex3x3::diag({3.0, -1.0, -2.0}));
  EXPECT_NEAR(e.values[0], 3.0, 1e-15);
  EXPECT_NEAR(e.values[1], -1.0, 1e-15);
  EXPECT_NEAR(e.values[2], -2.0, 1e-15);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(std::abs(e.vectors(k, k)), 1.0, 1e-14);
}

TEST(Eigensolver, ZeroMatrix) {
  const auto e = eig_hermitian(Complex3x3::zero());
  for (double v : e.values) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(e.vectors, Complex3x3::identity());
}

TEST(Eigensolver, RecoversConjugatedSpectrum) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Complex3x3 u = haar_unitary(rng);
    const Complex3x3 m = u * Complex3x3::diag({1.0, 0.0, -1.0}) * adjoint(u);
    const auto e = eig_hermitian(m);
    EXPECT_NEAR(e.values[0], 1.0, 1e-14);
    EXPECT_NEAR(e.values[1], 0.0, 1e-14);
    EXPECT_NEAR(e.values[2], -1.0, 1e-14);
    EXPECT_LE(reconstruction_error(m, e), 1e-12 * (1.0 + frobenius_norm(m)));
  }
}

TEST(Eigensolver, RandomHermitianPropertySweep) {
  Rng rng(5);
  for (int trial = 0; trial < 2000; ++trial) {
    const double scale = std::pow(10.0, (trial % 7) - 3);
    const Complex3x3 m = random_hermitian(rng, scale);
    const auto e = eig_hermitian(m);
    EXPECT_GE(e.values[0], e.values[1]);
    EXPECT_GE(e.values[1], e.values[2]);
    EXPECT_LE(unitarity_residual(e.vectors), kTolStructural);
    EXPECT_LE(reconstruction_error(m, e), 1e-12 * (1.0 + frobenius_norm(m)));
  }
}

TEST(Eigensolver, RepeatedAndNearlyRepeatedEigenvalues) {
  Rng rng(6);
  for (const double split : {0.0, 1e-14, 1e-10, 1e-7, 1e-4}) {
    for (int trial = 0; trial < 20; ++trial) {
      const Complex3x3 u = haar_unitary(rng);
      const Complex3x3 m = u * Complex3x3::diag({1.0 + split, 1.0, -2.0}) * adjoint(u);
      const auto e = eig_hermitian(m);
      EXPECT_LE(unitarity_residual(e.vectors), kTolStructural);
      EXPECT_LE(reconstruction_error(m, e), 1e-12 * (1.0 + frobenius_norm(m)));
      EXPECT_NEAR(e.values[2], -2.0, 1e-13);
    }
  }
}

TEST(Eigensolver, RejectsNonHermitian) {
  Complex3x3 m = Complex3x3::identity();
  m(0, 1) = 1.0;
  try {
    eig_hermitian(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotHermitian);
  }
}

TEST(Predicates, IsSu3) {
  EXPECT_TRUE(is_su3(Complex3x3::i_diag({1.0, 1.0, -2.0})));
  EXPECT_FALSE(is_su3(Complex3x3::diag({1.0, 0.0, -1.0})));
  EXPECT_FALSE(is_su3(Complex3x3::i_diag({1.0, 1.0, 1.0})));
}

TEST(Predicates, AntiHermitianConstructorValidates) {
  EXPECT_NO_THROW(AntiHermitian3(Complex3x3::i_diag({2.0, -1.0, -1.0})));
  EXPECT_THROW(AntiHermitian3(Complex3x3::diag({1.0, 0.0, -1.0})), Error);
  EXPECT_THROW(AntiHermitian3(Complex3x3::i_diag({1.0, 0.0, 0.0})), Error);
}

TEST(Predicates, SpectrumValidates) {
  EXPECT_NO_THROW(Spectrum3({1.0, 0.0, -1.0}));
  EXPECT_THROW(Spectrum3({0.0, 1.0, -1.0}), Error);
  EXPECT_THROW(Spectrum3({1.0, 0.0, -0.5}), Error);
}

TEST(Conjugation, IdentityAndZero) {
  const Complex3x3 m = Complex3x3::i_diag({1.0, 0.0, -1.0});
  EXPECT_EQ(conjugate(m, Complex3x3::identity()), m);
  Rng rng(1);
  EXPECT_LE(max_abs(conjugate(Complex3x3::zero(), haar_unitary(rng))), 0.0);
}

TEST(Conjugation, PreservesSpectrumAndRoundTrips) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const Complex3x3 u = haar_unitary(rng);
    const Complex3x3 m = Complex3x3::i_diag({1.0, 0.0, -1.0});
    const Complex3x3 c = conjugate(m, u);
    EXPECT_TRUE(is_su3(c));
    const Real3 s = spectrum_of(c);
    EXPECT_NEAR(s[0], 1.0, 1e-14);
    EXPECT_NEAR(s[1], 0.0, 1e-14);
    EXPECT_NEAR(s[2], -1.0, 1e-14);
    EXPECT_LE(frobenius_norm(conjugate(c, adjoint(u)) - m), 1e-13 * frobenius_norm(m));
  }
}

TEST(Conjugation, RejectsNonUnitary) {
  try {
    conjugate(Complex3x3::identity(), 2.0 * Complex3x3::identity());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotUnitary);
  }
}

TEST(Exponential, AntiHermitianGivesSpecialUnitaryWhenTraceless) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    Complex3x3 h = random_hermitian(rng);
    const cplx tr = trace(h) / 3.0;
    for (int k = 0; k < 3; ++k) h(k, k) -= tr;
    const Complex3x3 u = expm_antihermitian(kI * h);
    EXPECT_LE(unitarity_residual(u), 1e-13);
    EXPECT_NEAR(std::abs(det(u) - 1.0), 0.0, 1e-13);
  }
  const Complex3x3 d = expm_antihermitian(Complex3x3::i_diag({0.5, 0.25, -0.75}));
  EXPECT_NEAR(std::abs(d(0, 0) - std::polar(1.0, 0.5)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(d(2, 2) - std::polar(1.0, -0.75)), 0.0, 1e-15);
}

TEST(Haar, SpecialUnitaryHasUnitDeterminantAndIsDeterministic) {
  Rng a(99), b(99);
  const Complex3x3 u = haar_special_unitary(a);
  EXPECT_EQ(u, haar_special_unitary(b));
  EXPECT_NEAR(std::abs(det(u) - 1.0), 0.0, 1e-14);
  EXPECT_LE(unitarity_residual(u), 1e-14);
}

TEST(Algebra, DeterminantAndTraceOfKnownMatrices) {
  const Complex3x3 a = Complex3x3::i_diag({1.0, 1.0, -2.0});
  EXPECT_NEAR(std::abs(det(a) - cplx(0.0, 2.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(trace(a * a) + 6.0), 0.0, 1e-15);
  Complex3x3 m;
  m.e = {1.0, 2.0, 3.0, 0.0, 1.0, 4.0, 5.0, 6.0, 0.0};
  EXPECT_NEAR(std::abs(det(m) - 1.0), 0.0, 1e-14);
}
