#include "scalelaw/transfer.hpp"

#include <cmath>

#include "gtest/gtest.h"
#include "scalelaw/error.hpp"
#include "scalelaw/synth.hpp"

namespace scalelaw {
namespace {

const InfoResolutionParams kCrossCorpus{{24.96, 0.35, 45.02, 0.33, 2.80}, 0.19, 1.0, 2.61};
const InfoResolutionParams kImageNet{{20.03, 0.31, 34.87, 0.28, 2.29}, 0.15, 1.0, 2.70};

std::vector<RunRecord> source_sweep(std::vector<double> rhos) {
  SweepSpec spec;
  spec.params = kCrossCorpus;
  spec.n_values = log_space(1e6, 1e9, 6);
  spec.d_values = log_space(1e7, 1e10, 6);
  spec.rho_values = std::move(rhos);
  return generate_sweep(spec);
}

TEST(PredictTarget, CrossCorpusTable) {
  const auto r = predict_target(kCrossCorpus, 0.54, default_grid(), FitConfig{});
  EXPECT_NEAR(r.variance_inflation, 1.124, 0.001);
  EXPECT_NEAR(r.b_eff, 50.58, 0.1);
  EXPECT_NEAR(r.loss_shift, 1.201, 0.002);
  EXPECT_NEAR(r.effective_params.E, 4.001, 0.01);
  EXPECT_NEAR(r.effective_params.beta, 0.321, 0.015);
  EXPECT_TRUE(r.converged);
}

TEST(PredictTarget, ImageNetQuantizationTable) {
  const auto r = predict_target(kImageNet, 0.25, default_grid(), FitConfig{});
  EXPECT_NEAR(r.variance_inflation, 1.233, 0.002);
  EXPECT_NEAR(r.loss_shift, 2.025, 0.002);
  EXPECT_NEAR(r.effective_params.E, 4.315, 0.01);
  EXPECT_NEAR(r.effective_params.beta, 0.225, 0.015);
}

TEST(PredictTarget, FullResolutionReproducesSource) {
  const auto r = predict_target(kCrossCorpus, 1.0, default_grid(), FitConfig{});
  EXPECT_NEAR(r.effective_params.beta, 0.33, 1e-6);
  EXPECT_NEAR(r.effective_params.E, 2.80, 1e-6);
  EXPECT_NEAR(r.effective_params.B, 45.02, 1e-4);
}

TEST(PredictTarget, AlphaIsInherited) {
  for (double rho : {0.2, 0.6, 0.9}) {
    const auto r = predict_target(kCrossCorpus, rho, default_grid(), FitConfig{});
    EXPECT_EQ(r.effective_params.alpha, kCrossCorpus.base.alpha);
  }
}

TEST(PredictTarget, SurfaceIsTheLaw) {
  const auto grid = default_grid();
  const auto r = predict_target(kCrossCorpus, 0.4, grid, FitConfig{});
  ASSERT_EQ(r.predicted_surface.size(), grid.size());
  for (const auto& s : r.predicted_surface)
    EXPECT_EQ(s.loss, eval_inforesolution(kCrossCorpus, s.n_params, s.n_data, 0.4));
}

TEST(PredictTarget, GridDensityDoesNotDriveBeta) {
  const auto coarse = make_grid(log_space(1e6, 1e9, 6), log_space(1e7, 1e11, 8));
  const auto fine = make_grid(log_space(1e6, 1e9, 12), log_space(1e7, 1e11, 16));
  for (double rho : {0.25, 0.54, 0.8}) {
    const double b1 = predict_target(kCrossCorpus, rho, coarse, FitConfig{}).effective_params.beta;
    const double b2 = predict_target(kCrossCorpus, rho, fine, FitConfig{}).effective_params.beta;
    EXPECT_LT(std::abs(b1 - b2), 0.005);
  }
}

TEST(PredictTarget, MonotoneInRho) {
  double prev_e = INFINITY, prev_beta = -INFINITY;
  for (double rho = 0.1; rho <= 1.0 + 1e-12; rho += 0.05) {
    const auto r = predict_target(kImageNet, std::min(rho, 1.0), default_grid(), FitConfig{});
    EXPECT_LE(r.effective_params.E, prev_e + 1e-9);
    EXPECT_GE(r.effective_params.beta, prev_beta - 1e-9);
    prev_e = r.effective_params.E;
    prev_beta = r.effective_params.beta;
  }
}

TEST(PredictTarget, FloorMatchesClosedForm) {
  const auto grid = make_grid(log_space(1e6, 1e9, 6), log_space(1e7, 1e12, 8));
  for (double rho : {0.1, 0.3, 0.54, 0.9}) {
    const auto r = predict_target(kCrossCorpus, rho, grid, FitConfig{});
    EXPECT_NEAR(r.effective_params.E / loss_floor(kCrossCorpus, rho), 1.0, 0.02);
  }
}

TEST(PredictTarget, Preconditions) {
  EXPECT_THROW(predict_target(kCrossCorpus, 1.5, default_grid(), FitConfig{}), Error);
  const auto narrow = make_grid(log_space(1e6, 1e9, 3), log_space(1e7, 1e8, 5));
  EXPECT_THROW(predict_target(kCrossCorpus, 0.5, narrow, FitConfig{}), Error);
  const auto one_n = make_grid(std::vector<double>{1e8}, log_space(1e7, 1e11, 8));
  EXPECT_THROW(validate_grid(one_n), Error);
}

TEST(DefaultGrid, ExtendsDataAxisOneDecade) {
  const auto g = default_grid(1e6, 1e8, 1e7, 1e9);
  ASSERT_EQ(g.size(), 48u);
  EXPECT_EQ(g.front().n_data, 1e7);
  EXPECT_EQ(g.back().n_data, 1e10);
  EXPECT_EQ(g.back().n_params, 1e8);
}

TEST(RunPipeline, ExplicitRhoMatchesGroundTruthPrediction) {
  const auto records = source_sweep({1.0, 0.75, 0.5, 0.25});
  PipelineConfig config;
  config.grid = default_grid();
  const auto report = run_pipeline(records, ExplicitRho{0.5}, config);
  const auto truth = predict_target(kCrossCorpus, 0.5, *config.grid, FitConfig{});
  EXPECT_NEAR(report.effective_params.beta, truth.effective_params.beta, 1e-3);
  EXPECT_NEAR(report.effective_params.E, truth.effective_params.E, 1e-3);
  EXPECT_EQ(report.rho_source, "explicit");
  ASSERT_TRUE(report.source_fit.has_value());
}

TEST(RunPipeline, LosslessQuantizationReproducesSourceLaw) {
  const auto records = source_sweep({1.0, 0.75, 0.5, 0.25});
  const auto report = run_pipeline(records, TransformationSpec{Quantization{256, 256}}, PipelineConfig{});
  EXPECT_EQ(report.rho_target, 1.0);
  EXPECT_NEAR(report.effective_params.beta, 0.33, 1e-3);
  EXPECT_NEAR(report.effective_params.E, 2.80, 1e-3);
  EXPECT_EQ(report.rho_source, "analytic:quant");
}

TEST(RunPipeline, StageLabels) {
  try {
    run_pipeline(source_sweep({0.75, 0.5, 0.25}), ExplicitRho{0.5}, PipelineConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kStaging);
    EXPECT_EQ(e.stage(), kStageFit);
  }
  try {
    run_pipeline(source_sweep({1.0, 0.5}), ExplicitRho{0.0}, PipelineConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDomain);
    EXPECT_EQ(e.stage(), kStageRho);
  }
  PipelineConfig bad_grid;
  bad_grid.grid = make_grid(std::vector<double>{1e8}, log_space(1e7, 1e11, 8));
  try {
    run_pipeline(source_sweep({1.0, 0.5}), ExplicitRho{0.5}, bad_grid);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.stage(), kStagePredict);
  }
}

TEST(RunPipeline, CorpusRhoRequiresKappaAcknowledgment) {
  const auto records = source_sweep({1.0, 0.5});
  const auto m = generate_merged_corpus(256, 16, 20000, 1);
  const CorpusPair pair{m.source, m.target, CorpusEstimator::kVocab};
  try {
    run_pipeline(records, pair, PipelineConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kKappaTransfer);
    EXPECT_EQ(e.stage(), kStageRho);
  }
  PipelineConfig ack;
  ack.acknowledge_kappa_transfer = true;
  const auto report = run_pipeline(records, pair, ack);
  EXPECT_EQ(report.rho_target, 0.5);
  EXPECT_EQ(report.rho_source, "corpus:vocab");
  ASSERT_TRUE(report.rho_estimate.has_value());
}

}  // namespace
}  // namespace scalelaw
