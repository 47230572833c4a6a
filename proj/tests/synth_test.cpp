#include "scalelaw/synth.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "gtest/gtest.h"
#include "oracles.hpp"
#include "scalelaw/error.hpp"
#include "scalelaw/fitter.hpp"
#include "scalelaw/io.hpp"

namespace scalelaw {
namespace {

const InfoResolutionParams kSourceInfo{{24.96, 0.35, 45.02, 0.33, 2.80}, 0.19, 1.0, 2.61};

SweepSpec spec(double sigma, std::uint64_t seed) {
  SweepSpec s;
  s.params = kSourceInfo;
  s.n_values = log_space(1e6, 1e9, 5);
  s.d_values = log_space(1e7, 1e11, 5);
  s.rho_values = {1.0, 0.5};
  s.noise_sigma = sigma;
  s.seed = seed;
  return s;
}

TEST(LogSpace, EndpointsExact) {
  const auto v = log_space(1e6, 1e9, 4);
  ASSERT_EQ(v.size(), 4u);
  EXPECT_EQ(v.front(), 1e6);
  EXPECT_EQ(v.back(), 1e9);
  EXPECT_NEAR(v[1], 1e7, 1e-6);
  EXPECT_EQ(log_space(5.0, 5.0, 1), std::vector<double>{5.0});
  EXPECT_THROW(log_space(0.0, 1.0, 3), Error);
}

TEST(GenerateSweep, NoiselessMatchesLaw) {
  for (const auto& r : generate_sweep(spec(0.0, 0))) {
    const double expected = testing::law(kSourceInfo, r.n_params, r.n_data, r.rho);
    EXPECT_LE(std::abs(r.loss - expected) / expected, 1e-12);
    EXPECT_EQ(r.loss, eval_inforesolution(kSourceInfo, r.n_params, r.n_data, r.rho));
  }
}

TEST(GenerateSweep, OrderAndSize) {
  const auto records = generate_sweep(spec(0.0, 0));
  ASSERT_EQ(records.size(), 50u);
  EXPECT_EQ(records.front().rho, 1.0);
  EXPECT_EQ(records.back().rho, 0.5);
  EXPECT_EQ(records[1].n_params, records[0].n_params);
  EXPECT_GT(records[1].n_data, records[0].n_data);
}

TEST(GenerateSweep, DeterministicPerSeed) {
  std::ostringstream a, b, c;
  write_runs_csv(a, generate_sweep(spec(0.05, 42)));
  write_runs_csv(b, generate_sweep(spec(0.05, 42)));
  write_runs_csv(c, generate_sweep(spec(0.05, 43)));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(a.str(), c.str());
}

TEST(GenerateSweep, NoiseIsMultiplicativeWithRequestedScale) {
  SweepSpec s = spec(0.1, 7);
  s.n_values = log_space(1e6, 1e9, 40);
  s.d_values = log_space(1e7, 1e11, 50);
  double sum = 0.0, sum2 = 0.0;
  const auto records = generate_sweep(s);
  for (const auto& r : records) {
    const double eps = std::log(r.loss / eval_inforesolution(kSourceInfo, r.n_params, r.n_data, r.rho));
    sum += eps;
    sum2 += eps * eps;
  }
  const double n = static_cast<double>(records.size());
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(std::sqrt(sum2 / n), 0.1, 0.005);
}

TEST(GenerateSweep, RejectsInvalidSpecs) {
  auto s = spec(-0.1, 0);
  EXPECT_THROW(generate_sweep(s), Error);
  s = spec(0.0, 0);
  s.d_values.clear();
  EXPECT_THROW(generate_sweep(s), Error);
  s = spec(0.0, 0);
  s.rho_values = {1.2};
  EXPECT_THROW(generate_sweep(s), Error);
}

TEST(GenerateSweep, CleanSubsetRefitsToGenerator) {
  auto s = spec(0.0, 0);
  s.n_values = log_space(1e6, 1e9, 6);
  s.d_values = log_space(1e7, 1e11, 6);
  s.rho_values = {1.0};
  const auto p = fit_chinchilla(generate_sweep(s), FitConfig{}).chinchilla();
  EXPECT_NEAR(p.A / 24.96, 1.0, 0.01);
  EXPECT_NEAR(p.alpha / 0.35, 1.0, 0.01);
  EXPECT_NEAR(p.B / 45.02, 1.0, 0.01);
  EXPECT_NEAR(p.beta / 0.33, 1.0, 0.01);
  EXPECT_NEAR(p.E / 2.80, 1.0, 0.01);
}

TEST(MergedCorpus, BucketsSymbols) {
  const auto m = generate_merged_corpus(32, 4, 5000, 9);
  EXPECT_TRUE(m.full_coverage);
  EXPECT_EQ(m.source.vocabulary_size(), 32u);
  EXPECT_EQ(m.target.vocabulary_size(), 8u);
  EXPECT_EQ(m.source.size(), 5000u);
  EXPECT_EQ(m.target.size(), 5000u);
}

TEST(MergedCorpus, FlagsIncompleteCoverage) {
  const auto m = generate_merged_corpus(256, 16, 50, 9);
  EXPECT_FALSE(m.full_coverage);
}

TEST(MergedCorpus, Preconditions) {
  EXPECT_THROW(generate_merged_corpus(30, 4, 100, 0), Error);
  EXPECT_THROW(generate_merged_corpus(32, 4, 0, 0), Error);
}

TEST(MergedCorpus, IdentityMergeGivesSameText) {
  const auto m = generate_merged_corpus(16, 1, 1000, 4);
  EXPECT_EQ(m.source.text(), m.target.text());
}

TEST(NormalSource, MomentsAndDeterminism) {
  NormalSource a(5), b(5);
  double sum = 0, sum2 = 0;
  for (int i = 0; i < 200000; ++i) {
    const double x = a.normal();
    EXPECT_EQ(x, b.normal());
    sum += x;
    sum2 += x * x;
  }
  EXPECT_NEAR(sum / 200000, 0.0, 0.01);
  EXPECT_NEAR(sum2 / 200000, 1.0, 0.02);
}

}  // namespace
}  // namespace scalelaw
