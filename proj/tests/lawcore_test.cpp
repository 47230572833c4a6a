#include "scalelaw/lawcore.hpp"

#include <cmath>

#include "gtest/gtest.h"
#include "oracles.hpp"
#include "scalelaw/error.hpp"

namespace scalelaw {
namespace {

const ChinchillaParams kSource{24.96, 0.35, 45.02, 0.33, 2.80};
const InfoResolutionParams kSourceInfo{kSource, 0.19, 1.0, 2.61};

TEST(EvalChinchilla, UnitCase) {
  EXPECT_DOUBLE_EQ(eval_chinchilla({1, 1, 1, 1, 0}, 1.0, 1.0), 2.0);
}

TEST(EvalChinchilla, HandSubstitution) {
  const double expected = 24.96 / std::pow(1e8, 0.35) + 45.02 / std::pow(1e9, 0.33) + 2.80;
  EXPECT_NEAR(eval_chinchilla(kSource, 1e8, 1e9), expected, 1e-13);
}

TEST(EvalChinchilla, ApproachesFloor) {
  EXPECT_NEAR(eval_chinchilla(kSource, 1e300, 1e300), kSource.E, 1e-12);
}

TEST(EvalChinchilla, RejectsNonPositiveSizes) {
  EXPECT_THROW(eval_chinchilla(kSource, 0.0, 1e9), Error);
  EXPECT_THROW(eval_chinchilla(kSource, 1e8, -1.0), Error);
}

TEST(EvalInfoResolution, ReducesToChinchillaAtFullResolution) {
  testing::Draw draw(11);
  for (int i = 0; i < 200; ++i) {
    const double n = std::exp(draw.uniform(5, 25));
    const double d = std::exp(draw.uniform(5, 25));
    EXPECT_EQ(eval_inforesolution(kSourceInfo, n, d, 1.0), eval_chinchilla(kSource, n, d));
  }
}

TEST(EvalInfoResolution, MatchesLiteralFormula) {
  testing::Draw draw(12);
  for (int i = 0; i < 200; ++i) {
    const double n = std::exp(draw.uniform(5, 25));
    const double d = std::exp(draw.uniform(5, 25));
    const double rho = draw.uniform(0.01, 1.0);
    const double expected = testing::law(kSourceInfo, n, d, rho);
    EXPECT_NEAR(eval_inforesolution(kSourceInfo, n, d, rho), expected, 1e-13 * expected);
  }
}

TEST(EvalInfoResolution, CrossCorpusTableValues) {
  EXPECT_NEAR(variance_inflation(0.54, 0.19), 1.124, 0.001);
  EXPECT_NEAR(45.02 * variance_inflation(0.54, 0.19), 50.58, 0.1);
  EXPECT_NEAR(loss_shift(kSourceInfo, 0.54), 1.201, 0.002);
  EXPECT_NEAR(loss_floor(kSourceInfo, 0.54), 4.001, 0.005);
}

TEST(EvalInfoResolution, ImageNetTableValues) {
  const InfoResolutionParams p{{20.03, 0.31, 34.87, 0.28, 2.29}, 0.15, 1.0, 2.70};
  EXPECT_NEAR(variance_inflation(0.25, 0.15), 1.233, 0.002);
  EXPECT_NEAR(loss_shift(p, 0.25), 2.025, 0.001);
  EXPECT_NEAR(loss_floor(p, 0.25), 4.315, 0.005);
}

TEST(EvalInfoResolution, RejectsRhoOutsideUnitInterval) {
  EXPECT_THROW(eval_inforesolution(kSourceInfo, 1e8, 1e9, 0.0), Error);
  EXPECT_THROW(eval_inforesolution(kSourceInfo, 1e8, 1e9, 1.5), Error);
  EXPECT_THROW(eval_inforesolution(kSourceInfo, 1e8, 1e9, std::nan("")), Error);
}

TEST(EvalInfoResolution, StrictlyDecreasingInSizes) {
  for (double rho : {1.0, 0.7, 0.2}) {
    double prev = eval_inforesolution(kSourceInfo, 1e5, 1e9, rho);
    for (double n = 2e5; n < 1e12; n *= 2) {
      const double cur = eval_inforesolution(kSourceInfo, n, 1e9, rho);
      EXPECT_LT(cur, prev);
      prev = cur;
    }
    prev = eval_inforesolution(kSourceInfo, 1e8, 1e5, rho);
    for (double d = 2e5; d < 1e12; d *= 2) {
      const double cur = eval_inforesolution(kSourceInfo, 1e8, d, rho);
      EXPECT_LT(cur, prev);
      prev = cur;
    }
  }
}

TEST(LossFloor, Examples) {
  EXPECT_EQ(loss_floor(kSourceInfo, 1.0), kSource.E);
  const InfoResolutionParams p{{1, 0.5, 1, 0.5, 0.0}, 0.1, 0.5, 1.0};
  EXPECT_DOUBLE_EQ(loss_floor(p, 0.75), 0.5);
}

TEST(LossFloor, NonIncreasingInRhoAndBoundedByCeiling) {
  double prev = loss_floor(kSourceInfo, 1e-9);
  EXPECT_NEAR(prev, kSource.E + kSourceInfo.kappa, 1e-8);
  for (double rho = 0.01; rho <= 1.0; rho += 0.01) {
    const double cur = loss_floor(kSourceInfo, rho);
    EXPECT_LE(cur, prev);
    prev = cur;
  }
}

TEST(VarianceInflation, AtLeastOne) {
  testing::Draw draw(3);
  for (int i = 0; i < 1000; ++i) EXPECT_GE(variance_inflation(draw.uniform(1e-6, 1.0), draw.uniform(1e-3, 2.0)), 1.0);
  EXPECT_EQ(variance_inflation(1.0, 0.3), 1.0);
}

TEST(OptimalAllocation, FullResolutionIsChinchillaOptimal) {
  const auto a = optimal_allocation(kSourceInfo, 1e21, 1.0);
  EXPECT_EQ(a.n_opt, chinchilla_optimal_n(kSource, 1e21));
  EXPECT_NEAR(a.n_opt, testing::numeric_optimal_n(kSourceInfo, 1e21, 1.0), 1e-6 * a.n_opt);
}

TEST(OptimalAllocation, ShrinksWithResolution) {
  const InfoResolutionParams p{{10.0, 0.3, 20.0, 0.3, 1.0}, 0.12, 1.0, 1.0};
  const auto full = optimal_allocation(p, 1e20, 1.0);
  const auto half = optimal_allocation(p, 1e20, 0.5);
  EXPECT_NEAR(half.n_opt / full.n_opt, std::pow(0.5, 0.2), 1e-12);
  EXPECT_NEAR(half.n_opt, testing::numeric_optimal_n(p, 1e20, 0.5), 1e-3 * half.n_opt);
}

TEST(OptimalAllocation, PreservesComputeConstraint) {
  testing::Draw draw(5);
  for (int i = 0; i < 100; ++i) {
    const InfoResolutionParams p{{draw.uniform(1, 500), draw.uniform(0.1, 0.8), draw.uniform(1, 500),
                                  draw.uniform(0.1, 0.8), draw.uniform(0, 3)},
                                 draw.uniform(0.05, 0.5), 1.0, 1.0};
    const double c = std::exp(draw.uniform(std::log(1e15), std::log(1e25)));
    const auto a = optimal_allocation(p, c, draw.uniform(0.05, 1.0));
    EXPECT_NEAR(6.0 * a.n_opt * a.d_opt / c, 1.0, 1e-9);
  }
}

TEST(OptimalAllocation, RejectsBadCompute) {
  EXPECT_THROW(optimal_allocation(kSourceInfo, 0.0, 1.0), Error);
  EXPECT_THROW(optimal_allocation(kSourceInfo, 1e20, 0.0), Error);
}

TEST(Validate, RejectsInvalidParams) {
  EXPECT_THROW(validate(ChinchillaParams{-1, 0.3, 1, 0.3, 0}), Error);
  EXPECT_THROW(validate(ChinchillaParams{1, 0.0, 1, 0.3, 0}), Error);
  EXPECT_THROW(validate(ChinchillaParams{1, 0.3, 1, 0.3, -0.1}), Error);
  EXPECT_THROW(validate(InfoResolutionParams{kSource, 0.0, 1.0, 1.0}), Error);
  EXPECT_THROW(validate(InfoResolutionParams{kSource, 0.1, 1.5, 1.0}), Error);
  EXPECT_THROW(validate(InfoResolutionParams{kSource, 0.1, 1.0, 0.0}), Error);
  EXPECT_THROW(validate(RunRecord{1e6, 1e7, 1.0, 0.0}), Error);
  EXPECT_NO_THROW(validate(kSourceInfo));
}

TEST(Validate, ErrorCarriesDomainCode) {
  try {
    validate_rho(2.0);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDomain);
  }
}

}  // namespace
}  // namespace scalelaw
