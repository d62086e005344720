#include <gtest/gtest.h>

#include <random>

#include "nlcs/error.hpp"
#include "nlcs/shrinkage.hpp"
#include "oracles.hpp"

using namespace nlcs;

namespace {

Eigen::Index numerical_rank(const Matrix& x) {
  const Vector s = oracle::reference_singular_values(x);
  return (s.array() > 1e-9).count();
}

}  // namespace

TEST(Decompose, FactorsAreOrthonormal) {
  std::mt19937_64 gen(1);
  for (auto [r, c] : {std::pair{8, 5}, std::pair{5, 8}, std::pair{64, 60}, std::pair{1, 4}, std::pair{7, 7}}) {
    const Matrix x = oracle::random_matrix(gen, r, c, 30.0);
    const SpectralDecomposition d = decompose(x);
    const Eigen::Index k = std::min(r, c);
    EXPECT_LT((d.u.transpose() * d.u - Matrix::Identity(k, k)).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((d.v.transpose() * d.v - Matrix::Identity(k, k)).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((d.compose(d.sigma) - x).cwiseAbs().maxCoeff(), 1e-8 * x.cwiseAbs().maxCoeff());
    EXPECT_LT((d.sigma - oracle::reference_singular_values(x)).cwiseAbs().maxCoeff(), 1e-8 * d.sigma(0));
    for (Eigen::Index j = 1; j < k; ++j) EXPECT_GE(d.sigma(j - 1), d.sigma(j));
  }
}

TEST(Decompose, RankDeficientCompletesBasis) {
  std::mt19937_64 gen(2);
  const Matrix x = oracle::random_matrix(gen, 10, 2) * oracle::random_matrix(gen, 2, 6);
  const SpectralDecomposition d = decompose(x);
  EXPECT_EQ(d.rank(), 2);
  for (Eigen::Index j = 2; j < 6; ++j) EXPECT_EQ(d.sigma(j), 0.0);
  EXPECT_LT((d.u.transpose() * d.u - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-8);
  const SpectralDecomposition z = decompose(Matrix::Zero(4, 3));
  EXPECT_EQ(z.rank(), 0);
  EXPECT_LT((z.u.transpose() * z.u - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SoftThreshold, Definition) {
  const Vector a = (Vector(3) << 3, -0.5, 1).finished();
  EXPECT_EQ(soft_threshold(a, 1.0), (Vector(3) << 2, 0, 0).finished());
  EXPECT_EQ(soft_threshold(a, 0.0), a);
  EXPECT_EQ(soft_threshold(-4.0, 1.5), -2.5);
}

TEST(SoftThreshold, GridSearchOracle) {
  std::mt19937_64 gen(3);
  const Vector a = oracle::random_vector(gen, 40, 3.0);
  const double t = 0.8;
  const Vector got = soft_threshold(a, t);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double ai = a(i);
    const double best = oracle::convex_argmin(
        [&](double x) { return oracle::soft_objective_slope(x, ai, t, 0.0); }, -15.0, 15.0);
    EXPECT_NEAR(got(i), best, 1e-12);
    const double coarse = oracle::argmin_1d([&](double x) { return 0.5 * (x - ai) * (x - ai) + t * std::abs(x); },
                                            -15.0, 15.0);
    EXPECT_NEAR(got(i), coarse, 1e-6);
  }
}

TEST(HardThreshold, Definition) {
  const Vector a = (Vector(3) << 3, 0.1, -2).finished();
  EXPECT_EQ(hard_threshold(a, 1.0), (Vector(3) << 3, 0, -2).finished());
  EXPECT_EQ(hard_threshold(a, 0.0), a);
}

TEST(HardThreshold, TwoCandidateOracle) {
  std::mt19937_64 gen(4);
  const Vector a = oracle::random_vector(gen, 60, 2.0);
  const double t = 1.3;
  const Vector got = hard_threshold(a, t);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double keep = t * t / 2;          // cost of x = a
    const double zero = 0.5 * a(i) * a(i);  // cost of x = 0
    EXPECT_EQ(got(i), zero > keep ? a(i) : 0.0);
  }
}

TEST(Svt, DiagonalCase) {
  Matrix x = Matrix::Zero(2, 2);
  x(0, 0) = 3;
  x(1, 1) = 1;
  const Matrix out = svt(x, 1.0);
  EXPECT_NEAR(out(0, 0), 2.0, 1e-12);
  EXPECT_NEAR(out(1, 1), 0.0, 1e-12);
  EXPECT_NEAR(out(0, 1), 0.0, 1e-12);
}

TEST(Svt, ZeroThresholdIsIdentity) {
  std::mt19937_64 gen(5);
  const Matrix x = oracle::random_matrix(gen, 6, 4);
  EXPECT_EQ(svt(x, 0.0), x);
}

TEST(Svt, LocalOptimalityProbe) {
  std::mt19937_64 gen(6);
  const Matrix x = oracle::random_matrix(gen, 5, 4);
  const double t = 0.7;
  const Matrix z = svt(x, t);
  auto objective = [&](const Matrix& m) { return 0.5 * (m - x).squaredNorm() + t * oracle::nuclear(m); };
  const double f = objective(z);
  for (int k = 0; k < 200; ++k) {
    const Matrix p = z + oracle::random_matrix(gen, 5, 4, 1e-3 * (1 + k % 10));
    EXPECT_LE(f, objective(p) + 1e-12);
  }
}

TEST(Svt, MatchesIndependentSpectralOracle) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = oracle::random_matrix(gen, 8, 6, 5.0);
    const Matrix expected = oracle::spectral_map(x, [](const Vector& s) { return Vector((s.array() - 4.0).max(0.0)); });
    EXPECT_LT((svt(x, 4.0) - expected).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Wnnm, ConstantWeightsEqualSvt) {
  std::mt19937_64 gen(8);
  const Matrix x = oracle::random_matrix(gen, 7, 5, 3.0);
  EXPECT_LT((wnnm_shrink(x, Vector::Constant(5, 1.7)) - svt(x, 1.7)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Wnnm, PerValueShrink) {
  Matrix x = Matrix::Zero(2, 2);
  x(0, 0) = 4;
  x(1, 1) = 2;
  const Matrix out = wnnm_shrink(x, (Vector(2) << 1, 3).finished());
  EXPECT_NEAR(out(0, 0), 3.0, 1e-12);
  EXPECT_NEAR(out(1, 1), 0.0, 1e-12);
}

TEST(Wnnm, ContractViolations) {
  const Matrix x = Matrix::Identity(3, 3);
  EXPECT_THROW(wnnm_shrink(x, (Vector(3) << 2, 1, 3).finished()), ContractError);
  EXPECT_THROW(wnnm_shrink(x, (Vector(3) << -1, 1, 3).finished()), ContractError);
  EXPECT_THROW(wnnm_shrink(x, (Vector(2) << 1, 2).finished()), ContractError);
}

TEST(Wnnm, ShrinkIsIdempotentOnShrunkMatrix) {
  std::mt19937_64 gen(9);
  const Matrix x = oracle::random_matrix(gen, 6, 6, 4.0);
  // Weights fixed from the input spectrum; a second pass with weights that vanish on
  // the surviving values and exceed the zeroed ones leaves the result in place.
  const Vector w = wnnm_weights(singular_values(x), 10.0, 1e-8);
  const Matrix once = wnnm_shrink(x, w);
  const Vector s1 = singular_values(once);
  Vector w2 = Vector::Zero(s1.size());
  for (Eigen::Index j = 0; j < s1.size(); ++j)
    if (s1(j) <= 1e-9 * s1(0)) w2(j) = w(j);
  const Matrix twice = wnnm_shrink(once, w2);
  EXPECT_LT((twice - once).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Wnnm, WeightsFormula) {
  const Vector w = wnnm_weights((Vector(2) << 4, 2).finished(), 1.0, 1e-12);
  EXPECT_NEAR(w(0), 0.25, 1e-12);
  EXPECT_NEAR(w(1), 0.5, 1e-12);
  EXPECT_EQ(wnnm_weights((Vector(2) << 4, 2).finished(), 0.0, 1e-8), Vector::Zero(2));
  EXPECT_THROW(wnnm_weights((Vector(2) << 4, 2).finished(), 1.0, 0.0), ContractError);
  EXPECT_THROW(wnnm_weights((Vector(2) << 4, 2).finished(), -1.0, 1.0), ContractError);
}

TEST(Wnnm, WeightsMonotone) {
  std::mt19937_64 gen(10);
  for (int trial = 0; trial < 100; ++trial) {
    Vector s = oracle::random_vector(gen, 8, 10.0).cwiseAbs();
    std::sort(s.data(), s.data() + s.size(), std::greater<>());
    const Vector w = wnnm_weights(s, 3.0, 1e-6);
    for (Eigen::Index j = 1; j < w.size(); ++j) EXPECT_LE(w(j - 1), w(j));
  }
}

TEST(TruncateRank, Extremes) {
  std::mt19937_64 gen(11);
  const Matrix x = oracle::random_matrix(gen, 5, 4);
  EXPECT_LT((truncate_rank(x, 4) - x).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(truncate_rank(x, 0), Matrix::Zero(5, 4));
  EXPECT_THROW(truncate_rank(x, 5), ContractError);
}

TEST(TruncateRank, EckartYoungOnIntegerMatrices) {
  std::mt19937_64 gen(12);
  std::uniform_int_distribution<int> d(-9, 9);
  for (int trial = 0; trial < 30; ++trial) {
    Matrix x(3, 3);
    for (int i = 0; i < 9; ++i) x(i / 3, i % 3) = d(gen);
    const Vector s = oracle::reference_singular_values(x);
    for (int r = 0; r <= 3; ++r) {
      const Matrix t = truncate_rank(x, r);
      const double err2 = (t - x).squaredNorm();
      EXPECT_NEAR(err2, s.tail(3 - r).squaredNorm(), 1e-9 * std::max(1.0, s(0) * s(0)));
      EXPECT_LE(numerical_rank(t), r);
    }
  }
}

TEST(RankResidual, Reductions) {
  std::mt19937_64 gen(13);
  const Matrix x = oracle::random_matrix(gen, 6, 5, 3.0);
  EXPECT_LT((rank_residual_shrink(x, singular_values(x), 2.0) - x).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((rank_residual_shrink(x, Vector::Zero(5), 2.0) - svt(x, 2.0)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_THROW(rank_residual_shrink(x, Vector::Constant(5, -1.0), 1.0), ContractError);
}

TEST(RankResidual, GridSearchPerValue) {
  std::mt19937_64 gen(14);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix x = oracle::random_matrix(gen, 4, 4, 3.0);
    const Vector sigma = oracle::reference_singular_values(x);
    const Vector psi = oracle::random_vector(gen, 4, 3.0).cwiseAbs();
    const double t = 1.1;
    const Vector got = rank_residual_values(sigma, psi, t);
    for (int j = 0; j < 4; ++j) {
      const double best = oracle::convex_argmin(
          [&](double s) { return oracle::soft_objective_slope(s, sigma(j), t, psi(j)); }, 0.0, 30.0);
      EXPECT_NEAR(got(j), best, 1e-10);
    }
    const Matrix out = rank_residual_shrink(x, psi, t);
    EXPECT_LT((oracle::reference_singular_values(out) -
               [&] { Vector v = got; std::sort(v.data(), v.data() + 4, std::greater<>()); return v; }())
                  .cwiseAbs()
                  .maxCoeff(),
              1e-8);
  }
}

TEST(SpectralOperators, NuclearNormDoesNotGrow) {
  std::mt19937_64 gen(15);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = oracle::random_matrix(gen, 8, 6, 2.0);
    const double n = oracle::nuclear(x);
    EXPECT_LE(oracle::nuclear(svt(x, 1.0)), n + 1e-9);
    EXPECT_LE(oracle::nuclear(wnnm_shrink(x, wnnm_weights(singular_values(x), 4.0, 1e-8))), n + 1e-9);
    EXPECT_LE(oracle::nuclear(rank_residual_shrink(x, Vector::Zero(6), 1.0)), n + 1e-9);
  }
}

TEST(SpectralOperators, SvtRankCount) {
  std::mt19937_64 gen(16);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = oracle::random_matrix(gen, 7, 6, 2.0);
    const Vector s = oracle::reference_singular_values(x);
    const double t = s(3) + 0.5 * (s(2) - s(3));
    EXPECT_EQ(numerical_rank(svt(x, t)), (s.array() > t).count());
  }
}

TEST(SpectralOperators, UnitaryInvariance) {
  std::mt19937_64 gen(17);
  const Matrix x = oracle::random_matrix(gen, 6, 5, 2.0);
  const Matrix p = oracle::random_orthogonal(gen, 6);
  const Matrix q = oracle::random_orthogonal(gen, 5);
  const Matrix y = p * x * q;
  EXPECT_LT((svt(y, 1.2) - p * svt(x, 1.2) * q).cwiseAbs().maxCoeff(), 1e-8);
  const Vector w = wnnm_weights(singular_values(x), 3.0, 1e-8);
  EXPECT_LT((wnnm_shrink(y, w) - p * wnnm_shrink(x, w) * q).cwiseAbs().maxCoeff(), 1e-8);
  const Vector psi = Vector::LinSpaced(5, 3.0, 0.5);
  EXPECT_LT((rank_residual_shrink(y, psi, 0.8) - p * rank_residual_shrink(x, psi, 0.8) * q).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((truncate_rank(y, 2) - p * truncate_rank(x, 2) * q).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(NlmWeights, Examples) {
  std::mt19937_64 gen(18);
  const Vector col = oracle::random_vector(gen, 5);
  const Vector w = nlm_weights(col.replicate(1, 4), 2.0);
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(w(j), 0.25, 1e-15);
  EXPECT_EQ(nlm_weights(col, 2.0), Vector::Ones(1));
  EXPECT_THROW(nlm_weights(col, 0.0), ContractError);
}

TEST(NlmWeights, NormalizedAndOffsetInvariant) {
  std::mt19937_64 gen(19);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix x = oracle::random_matrix(gen, 16, 10, 5.0);
    const Vector w = nlm_weights(x, 400.0);
    EXPECT_NEAR(w.sum(), 1.0, 1e-12);
    EXPECT_GE(w.minCoeff(), 0.0);
    const Vector shifted = nlm_weights((x.array() + 37.0).matrix(), 400.0);
    EXPECT_LT((shifted - w).cwiseAbs().maxCoeff(), 1e-12);
    // Expected form: exp(-d^2/h) normalized.
    Vector e(10);
    for (int j = 0; j < 10; ++j) e(j) = std::exp(-(x.col(j) - x.col(0)).squaredNorm() / 400.0);
    EXPECT_LT((w - e / e.sum()).cwiseAbs().maxCoeff(), 1e-12);
  }
}
