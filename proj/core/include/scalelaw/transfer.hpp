#ifndef SCALELAW_TRANSFER_HPP
#define SCALELAW_TRANSFER_HPP

// Cross-domain prediction: fit the information-resolution law on a source
// sweep, obtain the target's rho, evaluate the predicted target surface and
// refit a Chinchilla form to it (alpha inherited from the source) to read
// off the target's effective beta and irreducible loss.

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "scalelaw/corpus.hpp"
#include "scalelaw/fitter.hpp"
#include "scalelaw/lawcore.hpp"
#include "scalelaw/rho.hpp"

namespace scalelaw {

struct GridPoint {
  double n_params = 0.0;
  double n_data = 0.0;
};

struct SurfacePoint {
  double n_params = 0.0;
  double n_data = 0.0;
  double loss = 0.0;
};

struct TransferReport {
  InfoResolutionParams source_params;
  double rho_target = 1.0;
  std::vector<SurfacePoint> predicted_surface;
  ChinchillaParams effective_params;  // alpha equals the source alpha
  double refit_residual = 0.0;        // robust objective of the refit
  bool converged = false;

  // Closed-form pieces of the prediction at rho_target.
  double variance_inflation = 1.0;  // rho^-nu
  double b_eff = 0.0;               // B rho^-nu
  double loss_shift = 0.0;          // kappa (1 - rho)^mu
  double loss_floor = 0.0;          // E + kappa (1 - rho)^mu

  std::string rho_source = "explicit";
  std::optional<RhoEstimate> rho_estimate;
  std::optional<FitResult> source_fit;
  std::vector<std::string> diagnostics;
};

// Cartesian product, N outer.
std::vector<GridPoint> make_grid(std::span<const double> n_values, std::span<const double> d_values);

// 6 N values over [n_lo, n_hi] and 8 D values over [d_lo, 10 d_hi], log-uniform.
std::vector<GridPoint> default_grid(double n_lo, double n_hi, double d_lo, double d_hi);

// Grid used when only parameters are available (no source records).
std::vector<GridPoint> default_grid();

// Needs >= 2 distinct N and >= 4 distinct D spanning >= 2 decades.
void validate_grid(std::span<const GridPoint> grid);

TransferReport predict_target(const InfoResolutionParams& source, double rho_target,
                              std::span<const GridPoint> grid, const FitConfig& refit_config);

enum class CorpusEstimator { kVocab, kNgram, kCompress };

struct CorpusPair {
  Corpus source;
  Corpus target;
  CorpusEstimator estimator = CorpusEstimator::kCompress;
  std::size_t ngram_order = 3;
};

struct ExplicitRho {
  double rho = 1.0;
};

using RhoSource = std::variant<ExplicitRho, TransformationSpec, CorpusPair>;

struct PipelineConfig {
  FitConfig source_fit;
  FitConfig refit;
  std::optional<std::vector<GridPoint>> grid;  // default: derived from the source records
  // Reusing (nu, mu, kappa) across corpora assumes the two corpora carry
  // comparable task information; corpus-estimated rho requires opting in.
  bool acknowledge_kappa_transfer = false;
};

inline constexpr const char* kStageFit = "Step 1";
inline constexpr const char* kStageRho = "Step 2";
inline constexpr const char* kStagePredict = "Step 3-4";

// Errors are rethrown with Error::stage() set to the failing step.
TransferReport run_pipeline(std::span<const RunRecord> source_records, const RhoSource& rho_source,
                            const PipelineConfig& config);

RhoEstimate estimate_rho(const CorpusPair& pair);

}  // namespace scalelaw

#endif  // SCALELAW_TRANSFER_HPP
