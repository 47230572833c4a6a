#ifndef SCALELAW_FITTER_HPP
#define SCALELAW_FITTER_HPP

// Robust multi-start fitting of the Chinchilla and information-resolution
// laws to observed runs.
//
// The objective is sum_i Huber_delta(log L_pred(N_i, D_i, rho_i) - log L_i).
// Each seed is refined by a bounded Levenberg-Marquardt iteration (IRLS
// weights for the Huber term, projected steps for the box constraints). The
// best local optimum over all seeds wins; ties are broken by the
// lexicographically smallest parameter vector, so results do not depend on
// thread scheduling.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "scalelaw/lawcore.hpp"

namespace scalelaw {

enum class StageMode { kStaged, kJoint };

// One starting point. Scale parameters are given in log space. When
// `e_relative` is set, `e` is a fraction of the smallest observed loss.
struct InitSeed {
  double log_a = 0.0;
  double alpha = 0.3;
  double log_b = 0.0;
  double beta = 0.3;
  double e = 0.5;
  bool e_relative = true;
  double nu = 0.2;
  double mu = 1.0;
  double log_kappa = 0.0;

  static InitSeed from(const InfoResolutionParams& p);
  static InitSeed from(const ChinchillaParams& p);
};

// alpha, beta in {0.1, 0.3, 0.5, 0.8}; log A, log B in {0, 2.5, 5};
// E in {0.5, 0.9} x min loss; nu in {0.05, 0.2, 0.5}; mu in {0.5, 1};
// kappa in {0.5, 2, 5}. Full Cartesian product (5184 seeds).
std::vector<InitSeed> default_init_grid();

struct FitConfig {
  double huber_delta = 1e-3;
  std::vector<InitSeed> init_grid = default_init_grid();
  int max_iters = 500;
  double rel_tol = 1e-12;
  std::optional<double> pin_mu;
  // Holds alpha fixed. Used when refitting a predicted target surface.
  std::optional<double> pin_alpha;
  StageMode stage_mode = StageMode::kStaged;
  // Staged mode only: refine all free parameters jointly after stage 2.
  bool joint_polish = true;
  // 0 means std::thread::hardware_concurrency().
  unsigned max_threads = 0;
};

void validate(const FitConfig& config);

struct FitResult {
  std::variant<ChinchillaParams, InfoResolutionParams> params;
  double objective = 0.0;
  std::size_t n_points = 0;
  bool converged = false;
  std::vector<double> residuals;  // log-residuals, input order
  int iterations = 0;             // total local iterations on the winning path

  const ChinchillaParams& chinchilla() const;
  // Throws Error(kDomain) for a Chinchilla-form result.
  const InfoResolutionParams& inforesolution() const;
  bool is_inforesolution() const {
    return std::holds_alternative<InfoResolutionParams>(params);
  }
};

FitResult fit_chinchilla(std::span<const RunRecord> records, const FitConfig& config);
FitResult fit_inforesolution(std::span<const RunRecord> records, const FitConfig& config);

double huber(double residual, double delta);

// Per-record log L_pred - log L.
std::vector<double> log_residuals(const InfoResolutionParams& p, std::span<const RunRecord> records);

double robust_objective(const InfoResolutionParams& p, std::span<const RunRecord> records,
                        double delta);
double robust_objective(const ChinchillaParams& p, std::span<const RunRecord> records,
                        double delta);

// Replaces records sharing (N, D, rho) by one record at their mean loss.
// First-occurrence order is preserved.
std::vector<RunRecord> average_replicates(std::span<const RunRecord> records);

namespace fit_detail {

enum Index : std::size_t { kLogA, kAlpha, kLogB, kBeta, kE, kNu, kMu, kLogKappa, kNumParams };
using Theta = std::array<double, kNumParams>;

Theta to_theta(const InfoResolutionParams& p);
InfoResolutionParams from_theta(const Theta& t);

// Objective and its analytic gradient in optimizer coordinates.
double objective(const Theta& t, std::span<const RunRecord> records, double delta);
Theta gradient(const Theta& t, std::span<const RunRecord> records, double delta);

}  // namespace fit_detail

}  // namespace scalelaw

#endif  // SCALELAW_FITTER_HPP
