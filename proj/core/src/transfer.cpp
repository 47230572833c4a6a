#include "scalelaw/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "scalelaw/error.hpp"
#include "scalelaw/synth.hpp"

namespace scalelaw {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

template <typename F>
auto in_stage(const char* stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.code(), std::string(stage) + ": " + e.what(), stage);
  }
}

}  // namespace

std::vector<GridPoint> make_grid(std::span<const double> n_values, std::span<const double> d_values) {
  std::vector<GridPoint> grid;
  grid.reserve(n_values.size() * d_values.size());
  for (double n : n_values)
    for (double d : d_values) grid.push_back({n, d});
  return grid;
}

std::vector<GridPoint> default_grid(double n_lo, double n_hi, double d_lo, double d_hi) {
  const auto ns = log_space(n_lo, n_hi, 6);
  const auto ds = log_space(d_lo, 10.0 * d_hi, 8);
  return make_grid(ns, ds);
}

std::vector<GridPoint> default_grid() { return default_grid(1e6, 1e9, 1e7, 1e10); }

void validate_grid(std::span<const GridPoint> grid) {
  std::set<double> ns;
  std::set<double> ds;
  for (const auto& g : grid) {
    if (!(g.n_params > 0.0) || !(g.n_data > 0.0))
      throw Error(ErrorCode::kDomain, "grid points must have positive N and D");
    ns.insert(g.n_params);
    ds.insert(g.n_data);
  }
  if (ns.size() < 2) throw Error(ErrorCode::kInsufficientData, "grid needs at least 2 distinct N");
  if (ds.size() < 4) throw Error(ErrorCode::kInsufficientData, "grid needs at least 4 distinct D");
  if (*ds.rbegin() / *ds.begin() < 100.0)
    throw Error(ErrorCode::kInsufficientData, "grid D values must span at least two decades");
}

TransferReport predict_target(const InfoResolutionParams& source, double rho_target,
                              std::span<const GridPoint> grid, const FitConfig& refit_config) {
  validate(source);
  validate_rho(rho_target);
  validate_grid(grid);

  TransferReport report;
  report.source_params = source;
  report.rho_target = rho_target;
  report.variance_inflation = variance_inflation(rho_target, source.nu);
  report.b_eff = source.base.B * report.variance_inflation;
  report.loss_shift = loss_shift(source, rho_target);
  report.loss_floor = loss_floor(source, rho_target);

  // Step 3: the target surface is a clean (rho = 1) sweep of the target domain.
  std::vector<RunRecord> surface;
  surface.reserve(grid.size());
  for (const auto& g : grid) {
    const double loss = eval_inforesolution(source, g.n_params, g.n_data, rho_target);
    report.predicted_surface.push_back({g.n_params, g.n_data, loss});
    surface.push_back({g.n_params, g.n_data, 1.0, loss});
  }

  // Step 4: Chinchilla refit with alpha inherited from the source.
  FitConfig config = refit_config;
  config.pin_alpha = source.base.alpha;
  const FitResult refit = fit_chinchilla(surface, config);
  report.effective_params = refit.chinchilla();
  report.refit_residual = refit.objective;
  report.converged = refit.converged;
  if (!refit.converged)
    report.diagnostics.push_back("refit did not converge after " +
                                 std::to_string(refit.iterations) + " iterations (objective " +
                                 std::to_string(refit.objective) + ")");
  return report;
}

RhoEstimate estimate_rho(const CorpusPair& pair) {
  switch (pair.estimator) {
    case CorpusEstimator::kVocab: return rho_vocab(pair.source, pair.target);
    case CorpusEstimator::kNgram: return rho_ngram(pair.source, pair.target, pair.ngram_order);
    case CorpusEstimator::kCompress: return rho_compress(pair.source, pair.target);
  }
  throw Error(ErrorCode::kDomain, "unknown corpus estimator");
}

TransferReport run_pipeline(std::span<const RunRecord> source_records, const RhoSource& rho_source,
                            const PipelineConfig& config) {
  FitResult source_fit =
      in_stage(kStageFit, [&] { return fit_inforesolution(source_records, config.source_fit); });

  std::optional<RhoEstimate> estimate;
  std::string provenance;
  const double rho = in_stage(kStageRho, [&] {
    return std::visit(
        overloaded{
            [&](const ExplicitRho& e) {
              validate_rho(e.rho);
              provenance = "explicit";
              return e.rho;
            },
            [&](const TransformationSpec& spec) {
              provenance = "analytic:" + std::string(kind_name(spec));
              return rho_analytic(spec);
            },
            [&](const CorpusPair& pair) {
              if (!config.acknowledge_kappa_transfer)
                throw Error(ErrorCode::kKappaTransfer,
                            "corpus-estimated rho reuses the source kappa across corpora; "
                            "set acknowledge_kappa_transfer to proceed");
              estimate = estimate_rho(pair);
              provenance = "corpus:" + estimate->estimator;
              return estimate->rho;
            },
        },
        rho_source);
  });

  return in_stage(kStagePredict, [&] {
    std::vector<GridPoint> grid;
    if (config.grid) {
      grid = *config.grid;
    } else {
      auto [n_lo, n_hi] = std::minmax_element(
          source_records.begin(), source_records.end(),
          [](const RunRecord& a, const RunRecord& b) { return a.n_params < b.n_params; });
      auto [d_lo, d_hi] = std::minmax_element(
          source_records.begin(), source_records.end(),
          [](const RunRecord& a, const RunRecord& b) { return a.n_data < b.n_data; });
      grid = default_grid(n_lo->n_params, n_hi->n_params, d_lo->n_data, d_hi->n_data);
    }
    TransferReport report = predict_target(source_fit.inforesolution(), rho, grid, config.refit);
    report.rho_source = provenance;
    report.rho_estimate = estimate;
    if (!source_fit.converged) report.diagnostics.push_back("source fit did not converge");
    report.source_fit = std::move(source_fit);
    return report;
  });
}

}  // namespace scalelaw
