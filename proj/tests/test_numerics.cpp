#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "crpca/numerics.hpp"
#include "crpca/random.hpp"

namespace crpca {
namespace {

const Complex kJ(0.0, 1.0);

CMatrix random_complex(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  return draw_normal_matrix(rows, cols, rng, Field::complex);
}

TEST(Vec, StacksColumns) {
  CMatrix m(2, 2);
  m << 1.0, 3.0, 2.0, 4.0;
  const CVector v = vec(m);
  ASSERT_EQ(v.size(), 4);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(v(i), Complex(i + 1.0, 0.0));
}

TEST(Vec, RoundTripIsBitExact) {
  const CMatrix m = random_complex(3, 2, 11);
  EXPECT_TRUE(unvec(vec(m), 3, 2) == m);
}

TEST(Vec, OneByOne) {
  CMatrix m(1, 1);
  m(0, 0) = 5.0;
  const CVector v = vec(m);
  ASSERT_EQ(v.size(), 1);
  EXPECT_EQ(v(0), Complex(5.0, 0.0));
}

TEST(Vec, UnvecRejectsWrongLength) {
  EXPECT_THROW(unvec(CVector::Zero(5), 2, 3), std::invalid_argument);
}

TEST(SoftThreshold, ShrinksMagnitudeKeepsPhase) {
  const Complex x = 2.0 * std::exp(kJ * (M_PI / 4));
  const Complex expect = 1.5 * std::exp(kJ * (M_PI / 4));
  EXPECT_NEAR(std::abs(soft_threshold(x, 0.5) - expect), 0.0, 1e-15);
}

TEST(SoftThreshold, BelowThresholdIsExactlyZero) {
  EXPECT_EQ(soft_threshold(0.3, 0.5), Complex(0.0, 0.0));
  EXPECT_EQ(soft_threshold(0.5, 0.5), Complex(0.0, 0.0));
}

TEST(SoftThreshold, ZeroThresholdIsIdentity) {
  const Complex x(-1.25, 0.75);
  EXPECT_EQ(soft_threshold(x, 0.0), x);
}

TEST(SoftThreshold, RejectsNegativeThreshold) {
  EXPECT_THROW(soft_threshold(1.0, -0.1), std::invalid_argument);
}

TEST(SoftThreshold, NonexpansiveAndPhasePreserving) {
  Rng rng(3);
  std::uniform_real_distribution<double> lam(0.0, 2.0);
  for (int i = 0; i < 2000; ++i) {
    const Complex x = draw_normal(rng, Field::complex) * 2.0;
    const Complex y = draw_normal(rng, Field::complex) * 2.0;
    const double l = lam(rng);
    const Complex sx = soft_threshold(x, l);
    EXPECT_LE(std::abs(sx - soft_threshold(y, l)), std::abs(x - y) + 1e-15);
    if (sx != Complex(0.0, 0.0)) {
      EXPECT_NEAR(std::arg(sx), std::arg(x), 1e-12);
    }
  }
}

TEST(SoftThresholdMap, ZeroThresholdsUnchanged) {
  const CMatrix m = random_complex(3, 4, 5);
  EXPECT_TRUE(soft_threshold_map(m, RMatrix::Zero(3, 4)) == m);
}

TEST(SoftThresholdMap, LargeThresholdsGiveZero) {
  const CMatrix m = random_complex(3, 4, 6);
  const double big = m.cwiseAbs().maxCoeff();
  EXPECT_TRUE(soft_threshold_map(m, RMatrix::Constant(3, 4, big)).isZero(0.0));
}

TEST(SoftThresholdMap, MatchesScalarEntrywise) {
  CMatrix m(2, 2);
  m << Complex(1.0, 1.0), Complex(-0.2, 0.0), Complex(0.0, -3.0), Complex(0.5, 0.5);
  RMatrix t(2, 2);
  t << 0.5, 0.1, 1.0, 2.0;
  const CMatrix out = soft_threshold_map(m, t);
  for (Index i = 0; i < 2; ++i) {
    for (Index j = 0; j < 2; ++j) {
      EXPECT_EQ(out(i, j), soft_threshold(m(i, j), t(i, j)));
    }
  }
}

TEST(SoftThresholdMap, RejectsShapeMismatch) {
  EXPECT_THROW(soft_threshold_map(CMatrix::Zero(2, 2), RMatrix::Zero(2, 3)), std::invalid_argument);
}

TEST(Svd, IdentityAndDiagonal) {
  EXPECT_TRUE(svd(CMatrix::Identity(2, 2)).singular_values.isApprox(RVector::Ones(2)));
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = 1.0;
  const RVector s = svd(d).singular_values;
  EXPECT_DOUBLE_EQ(s(0), 3.0);
  EXPECT_DOUBLE_EQ(s(1), 1.0);
}

TEST(Svd, ReconstructsRandomMatrices) {
  Rng rng(17);
  std::uniform_int_distribution<int> dim(1, 12);
  for (int trial = 0; trial < 200; ++trial) {
    const Index r = dim(rng), c = dim(rng);
    const CMatrix m = draw_normal_matrix(r, c, rng, trial % 2 ? Field::complex : Field::real);
    const SvdResult f = svd(m);
    ASSERT_EQ(f.left_vectors.rows(), r);
    ASSERT_EQ(f.left_vectors.cols(), r);
    ASSERT_EQ(f.right_vectors.cols(), c);
    const Index k = std::min(r, c);
    const CMatrix rec = f.left_vectors.leftCols(k) * f.singular_values.cast<Complex>().asDiagonal() *
                        f.right_vectors.leftCols(k).adjoint();
    EXPECT_LE((rec - m).norm() / m.norm(), 1e-10);
    for (Index i = 1; i < k; ++i) EXPECT_GE(f.singular_values(i - 1), f.singular_values(i));
    EXPECT_GE(f.singular_values.minCoeff(), 0.0);
  }
}

TEST(Svd, PhaseConventionAndDeterminism) {
  const CMatrix m = random_complex(5, 4, 23);
  const SvdResult a = thin_svd(m);
  const SvdResult b = thin_svd(m);
  EXPECT_TRUE(a.left_vectors == b.left_vectors);
  EXPECT_TRUE(a.singular_values == b.singular_values);
  EXPECT_TRUE(a.right_vectors == b.right_vectors);
  for (Index j = 0; j < a.left_vectors.cols(); ++j) {
    Index i = 0;
    while (std::abs(a.left_vectors(i, j)) <= 1e-12) ++i;
    EXPECT_EQ(a.left_vectors(i, j).imag(), 0.0);
    EXPECT_GE(a.left_vectors(i, j).real(), 0.0);
  }
}

TEST(Svd, RejectsNonFinite) {
  CMatrix m = CMatrix::Ones(2, 2);
  m(1, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(svd(m), NumericalError);
}

TEST(Svt, DiagonalExample) {
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = 1.0;
  const CMatrix out = svt(d, RVector::Constant(2, 2.0));
  CMatrix expect = CMatrix::Zero(2, 2);
  expect(0, 0) = 1.0;
  EXPECT_LE((out - expect).norm(), 1e-14);
}

TEST(Svt, ZeroMatrixStaysZero) {
  EXPECT_TRUE(svt(CMatrix::Zero(3, 2), RVector::Constant(2, 0.7)).isZero(0.0));
}

TEST(Svt, ZeroThresholdsReproduceInput) {
  const CMatrix m = random_complex(4, 6, 29);
  EXPECT_LE((svt(m, RVector::Zero(4)) - m).norm() / m.norm(), 1e-10);
}

TEST(Svt, RejectsWrongThresholdLength) {
  EXPECT_THROW(svt(CMatrix::Zero(3, 2), RVector::Zero(3)), std::invalid_argument);
}

TEST(Svt, RankEqualsCountAboveThreshold) {
  Rng rng(31);
  std::uniform_int_distribution<int> dim(2, 10);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const CMatrix m = draw_normal_matrix(dim(rng), dim(rng), rng, Field::complex);
    const RVector sigma = thin_svd(m).singular_values;
    const double tau = frac(rng) * sigma(0);
    Index above = 0;
    for (Index i = 0; i < sigma.size(); ++i) above += sigma(i) > tau ? 1 : 0;
    const CMatrix out = svt(m, RVector::Constant(sigma.size(), tau));
    EXPECT_EQ(numerical_rank(out, 1e-10, false), above);
  }
}

TEST(Decay, KnownValues) {
  EXPECT_DOUBLE_EQ(decay({DecayKind::log_det, 1.0}, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(decay({DecayKind::log_det, 1.0}, 1.0), 0.5);
  EXPECT_NEAR(decay({DecayKind::exponential, 1.0}, 1.0), 0.36788, 1e-5);
  EXPECT_DOUBLE_EQ(decay({DecayKind::constant, 0.3}, 7.0), 1.0);
}

TEST(Decay, PositiveAndNonIncreasing) {
  Rng rng(37);
  std::uniform_real_distribution<double> x(0.0, 20.0);
  std::uniform_real_distribution<double> g(0.05, 5.0);
  for (int i = 0; i < 2000; ++i) {
    double a = x(rng), b = x(rng);
    if (a > b) std::swap(a, b);
    for (auto kind : {DecayKind::log_det, DecayKind::exponential}) {
      const DecaySpec spec{kind, g(rng)};
      EXPECT_GE(decay(spec, a), decay(spec, b));
      EXPECT_GT(decay(spec, a), 0.0);
    }
  }
}

TEST(Decay, RejectsBadArguments) {
  EXPECT_THROW(decay({DecayKind::log_det, 0.0}, 1.0), std::invalid_argument);
  EXPECT_THROW(decay({DecayKind::log_det, 1.0}, -1.0), std::invalid_argument);
}

TEST(Decay, ParsesAliases) {
  EXPECT_EQ(parse_decay_kind("log"), DecayKind::log_det);
  EXPECT_EQ(parse_decay_kind("exp"), DecayKind::exponential);
  EXPECT_EQ(parse_decay_kind("const"), DecayKind::constant);
  EXPECT_THROW(parse_decay_kind("cubic"), std::invalid_argument);
}

}  // namespace
}  // namespace crpca
