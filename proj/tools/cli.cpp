#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>

#include "CLI11.hpp"
#include "json.hpp"
#include "scalelaw/error.hpp"
#include "scalelaw/fitter.hpp"
#include "scalelaw/io.hpp"
#include "scalelaw/lawcore.hpp"
#include "scalelaw/rho.hpp"
#include "scalelaw/synth.hpp"
#include "scalelaw/transfer.hpp"

namespace scalelaw::cli {

namespace {

using nlohmann::json;

double parse_number(std::string_view text, std::string_view what) {
  double value = 0.0;
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty())
    throw Error(ErrorCode::kParse, "cannot parse " + std::string(what) + " value '" +
                                       std::string(text) + "'");
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::vector<double> parse_axis(std::string_view key, std::string_view value) {
  const auto range = split(value, ':');
  if (range.size() == 3) {
    const double lo = parse_number(range[0], key);
    const double hi = parse_number(range[1], key);
    const double count = parse_number(range[2], key);
    if (!(count >= 1.0) || count != std::floor(count))
      throw Error(ErrorCode::kParse, "grid axis '" + std::string(key) + "' needs an integer count");
    if (!(lo > 0.0) || !(hi >= lo))
      throw Error(ErrorCode::kParse, "grid axis '" + std::string(key) + "' needs 0 < lo <= hi");
    return log_space(lo, hi, static_cast<std::size_t>(count));
  }
  if (range.size() != 1)
    throw Error(ErrorCode::kParse, "grid axis '" + std::string(key) + "' must be lo:hi:count or a list");
  std::vector<double> values;
  for (auto item : split(value, '/')) values.push_back(parse_number(item, key));
  return values;
}

unsigned thread_cap() {
  const char* env = std::getenv("SCALELAW_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  unsigned value = 0;
  const std::string_view text(env);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw Error(ErrorCode::kParse, "SCALELAW_THREADS must be a non-negative integer");
  return value;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegenerate:
    case ErrorCode::kUndefinedResolution: return kNumeric;
    default: return kUsage;
  }
}

// Parameters usable for evaluation. Chinchilla-only documents are accepted
// when every requested rho is 1, since the resolution terms then vanish.
InfoResolutionParams law_params(const ParamsDocument& doc, std::span<const double> rhos) {
  if (doc.has_resolution_terms()) return doc.inforesolution();
  if (std::all_of(rhos.begin(), rhos.end(), [](double r) { return r == 1.0; })) {
    InfoResolutionParams p;
    p.base = doc.base;
    return p;
  }
  return doc.inforesolution();  // throws naming the missing keys
}

struct FitOptions {
  std::string input;
  std::string out;
  std::string form = "info";
  std::string stage = "staged";
  std::optional<double> pin_mu;
  double huber_delta = 1e-3;
  bool average = false;
};

int cmd_fit(const FitOptions& o, std::ostream& out, std::ostream& err) {
  auto records = read_runs_file(o.input);
  if (o.average) records = average_replicates(records);

  FitConfig config;
  config.huber_delta = o.huber_delta;
  config.pin_mu = o.pin_mu;
  config.stage_mode = o.stage == "joint" ? StageMode::kJoint : StageMode::kStaged;
  config.max_threads = thread_cap();
  validate(config);

  const FitResult result =
      o.form == "chinchilla" ? fit_chinchilla(records, config) : fit_inforesolution(records, config);

  ParamsDocument doc = result.is_inforesolution() ? ParamsDocument::from(result.inforesolution())
                                                  : ParamsDocument::from(result.chinchilla());
  doc.metadata.fit_objective = result.objective;
  doc.metadata.n_points = result.n_points;
  doc.metadata.converged = result.converged;
  doc.metadata.config_digest = config_digest(config);
  doc.metadata.data_range = data_range(records);
  write_file_atomic(o.out, params_to_json(doc));

  out << "objective=" << format_double(result.objective) << " n_points=" << result.n_points
      << " converged=" << (result.converged ? "true" : "false") << "\n";
  if (!result.converged) {
    err << "error: fit did not converge after " << result.iterations << " iterations\n";
    return kNumeric;
  }
  return kOk;
}

struct AnalyticOptions {
  std::string kind;
  std::uint64_t q = 0;
  std::uint64_t vocab = 0;
  std::vector<double> eigenvalues;
  std::vector<double> correlations;
  std::size_t k = 0;
  std::optional<double> snr;
  std::optional<double> snr0;
};

int cmd_rho_analytic(const AnalyticOptions& o, std::ostream& out) {
  TransformationSpec spec;
  if (o.kind == "quant") {
    spec = Quantization{o.q, o.vocab};
  } else if (o.kind == "lowrank") {
    spec = LowRank{o.eigenvalues, o.correlations, o.k};
  } else {
    if (!o.snr || !o.snr0) throw Error(ErrorCode::kParse, "--kind noise needs --snr and --snr0");
    spec = AdditiveNoise{*o.snr, *o.snr0};
  }
  RhoEstimate estimate;
  estimate.estimator = "analytic:" + std::string(kind_name(spec));
  estimate.rho = rho_analytic(spec);
  if (auto nu = default_nu(spec)) estimate.diagnostics.push_back({"default_nu", *nu});
  out << estimate_to_json(estimate) << "\n";
  return kOk;
}

struct CorpusOptions {
  std::string source;
  std::string target;
  std::string estimator = "compress";
  std::size_t n = 3;
  std::string tokenization = "whitespace";
  bool bits = false;
};

int cmd_rho_corpus(const CorpusOptions& o, std::ostream& out, std::ostream& err) {
  const auto mode = o.tokenization == "byte" ? Tokenization::kByte : Tokenization::kWhitespace;
  CorpusPair pair{Corpus::from_file(o.source, mode), Corpus::from_file(o.target, mode)};
  pair.estimator = o.estimator == "vocab"   ? CorpusEstimator::kVocab
                   : o.estimator == "ngram" ? CorpusEstimator::kNgram
                                            : CorpusEstimator::kCompress;
  pair.ngram_order = o.n;
  const RhoEstimate estimate = estimate_rho(pair);
  if (estimate.clamped) err << "warning: raw estimate exceeded 1 and was clamped\n";
  out << estimate_to_json(estimate, o.bits) << "\n";
  return kOk;
}

struct PredictOptions {
  std::string params;
  double rho = 1.0;
  std::string grid;
  std::string out;
};

int cmd_predict(const PredictOptions& o, std::ostream& out, std::ostream& err) {
  const ParamsDocument doc = read_params_file(o.params);
  const InfoResolutionParams source = doc.inforesolution();
  validate_rho(o.rho);

  std::vector<GridPoint> grid;
  if (!o.grid.empty()) {
    const SweepGrid g = parse_grid(o.grid);
    grid = make_grid(g.n_values, g.d_values);
  } else if (const auto& r = doc.metadata.data_range) {
    grid = default_grid(r->n_min, r->n_max, r->d_min, r->d_max);
  } else {
    grid = default_grid();
  }

  FitConfig refit;
  refit.max_threads = thread_cap();
  const TransferReport report = predict_target(source, o.rho, grid, refit);
  write_file_atomic(o.out, report_to_json(report));

  out << "beta_t=" << format_double(report.effective_params.beta)
      << " E_t=" << format_double(report.effective_params.E) << "\n";
  for (const auto& d : report.diagnostics) err << "warning: " << d << "\n";
  return report.converged ? kOk : kNumeric;
}

struct OptimalOptions {
  std::string params;
  double compute = 0.0;
  double rho = 1.0;
};

int cmd_optimal(const OptimalOptions& o, std::ostream& out) {
  const ParamsDocument doc = read_params_file(o.params);
  const double rhos[] = {o.rho};
  const InfoResolutionParams p = law_params(doc, rhos);
  const ComputeAllocation a = optimal_allocation(p, o.compute, o.rho);
  const double six_nd = 6.0 * a.n_opt * a.d_opt;
  const double rel = std::abs(six_nd - a.compute) / a.compute;
  json j = {{"compute", a.compute},
            {"rho", o.rho},
            {"n_opt", a.n_opt},
            {"d_opt", a.d_opt},
            {"check", {{"six_nd", six_nd}, {"relative_error", rel}, {"ok", rel <= 1e-9}}}};
  out << j.dump() << "\n";
  return kOk;
}

struct SynthOptions {
  std::string params;
  std::string grid;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_synth(const SynthOptions& o, std::ostream& out) {
  const ParamsDocument doc = read_params_file(o.params);
  const SweepGrid g = parse_grid(o.grid);
  SweepSpec spec;
  spec.params = law_params(doc, g.rho_values);
  spec.n_values = g.n_values;
  spec.d_values = g.d_values;
  spec.rho_values = g.rho_values;
  spec.noise_sigma = o.noise;
  spec.seed = o.seed;
  const auto records = generate_sweep(spec);
  std::ostringstream csv;
  write_runs_csv(csv, records);
  write_file_atomic(o.out, csv.str());
  out << "records=" << records.size() << "\n";
  return kOk;
}

}  // namespace

SweepGrid parse_grid(const std::string& spec) {
  SweepGrid grid;
  bool has_n = false;
  bool has_d = false;
  for (auto item : split(spec, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::kParse, "grid entry '" + std::string(item) + "' must be key=value");
    const auto key = item.substr(0, eq);
    const auto values = parse_axis(key, item.substr(eq + 1));
    if (key == "n") {
      grid.n_values = values;
      has_n = true;
    } else if (key == "d") {
      grid.d_values = values;
      has_d = true;
    } else if (key == "rho") {
      grid.rho_values = values;
    } else {
      throw Error(ErrorCode::kParse, "unknown grid key '" + std::string(key) + "'");
    }
  }
  if (!has_n || !has_d) throw Error(ErrorCode::kParse, "grid needs both n= and d= entries");
  return grid;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fit scaling laws, estimate information resolution and predict target scaling."};
  app.name("scalelaw");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  const std::vector<std::string> forms{"chinchilla", "info"};
  const std::vector<std::string> stages{"staged", "joint"};

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a law to a runs CSV and write a params JSON");
  fit_cmd->add_option("--input", fit.input, "Runs CSV")->required();
  fit_cmd->add_option("--out", fit.out, "Params JSON to write")->required();
  fit_cmd->add_option("--form", fit.form, "Law form")->check(CLI::IsMember(forms))->capture_default_str();
  fit_cmd->add_option("--stage", fit.stage, "Fitting schedule")->check(CLI::IsMember(stages))->capture_default_str();
  fit_cmd->add_option("--pin-mu", fit.pin_mu, "Hold mu fixed");
  fit_cmd->add_option("--huber-delta", fit.huber_delta, "Huber threshold on log-residuals")->capture_default_str();
  fit_cmd->add_flag("--average-replicates", fit.average, "Average runs sharing (N, D, rho) first");

  auto* rho_cmd = app.add_subcommand("rho", "Information resolution of a transformation or corpus pair");
  rho_cmd->require_subcommand(1);

  AnalyticOptions analytic;
  auto* analytic_cmd = rho_cmd->add_subcommand("analytic", "Closed-form rho");
  analytic_cmd->add_option("--kind", analytic.kind)->required()->check(CLI::IsMember({"quant", "lowrank", "noise"}));
  analytic_cmd->add_option("--q", analytic.q, "Quantization levels");
  analytic_cmd->add_option("--vocab", analytic.vocab, "Source alphabet size");
  analytic_cmd->add_option("--eigenvalues", analytic.eigenvalues, "Descending eigenvalues")->delimiter(',');
  analytic_cmd->add_option("--correlations", analytic.correlations, "Per-component correlation with Y")->delimiter(',');
  analytic_cmd->add_option("--k", analytic.k, "Retained components");
  analytic_cmd->add_option("--snr", analytic.snr, "Signal-to-noise ratio");
  analytic_cmd->add_option("--snr0", analytic.snr0, "Baseline signal-to-noise ratio");

  CorpusOptions corpus;
  auto* corpus_cmd = rho_cmd->add_subcommand("corpus", "Estimate rho from a source/target corpus pair");
  corpus_cmd->add_option("--source", corpus.source)->required();
  corpus_cmd->add_option("--target", corpus.target)->required();
  corpus_cmd->add_option("--estimator", corpus.estimator)
      ->check(CLI::IsMember({"vocab", "ngram", "compress"}))
      ->capture_default_str();
  corpus_cmd->add_option("--n", corpus.n, "n-gram order")->check(CLI::PositiveNumber)->capture_default_str();
  corpus_cmd->add_option("--tokenization", corpus.tokenization)
      ->check(CLI::IsMember({"whitespace", "byte"}))
      ->capture_default_str();
  corpus_cmd->add_flag("--bits", corpus.bits, "Report entropies in bits");

  PredictOptions predict;
  auto* predict_cmd = app.add_subcommand("predict", "Predict target-domain scaling parameters");
  predict_cmd->add_option("--source-params", predict.params)->required();
  predict_cmd->add_option("--rho", predict.rho, "Target information resolution")->required();
  predict_cmd->add_option("--grid", predict.grid, "Refit grid, e.g. n=1e6:1e9:6,d=1e7:1e11:8");
  predict_cmd->add_option("--out", predict.out, "Report JSON to write")->required();

  OptimalOptions optimal;
  auto* optimal_cmd = app.add_subcommand("optimal", "Compute-optimal model and data size");
  optimal_cmd->add_option("--params", optimal.params)->required();
  optimal_cmd->add_option("--compute", optimal.compute, "FLOP budget C = 6ND")->required();
  optimal_cmd->add_option("--rho", optimal.rho)->capture_default_str();

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic runs CSV from params");
  synth_cmd->add_option("--params", synth.params)->required();
  synth_cmd->add_option("--grid", synth.grid, "e.g. n=1e4:1e9:6,d=1e5:1e11:6,rho=1/0.5")->required();
  synth_cmd->add_option("--noise", synth.noise, "Log-normal sigma")->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
  synth_cmd->add_option("--out", synth.out, "Runs CSV to write")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit, out, err);
    if (analytic_cmd->parsed()) return cmd_rho_analytic(analytic, out);
    if (corpus_cmd->parsed()) return cmd_rho_corpus(corpus, out, err);
    if (predict_cmd->parsed()) return cmd_predict(predict, out, err);
    if (optimal_cmd->parsed()) return cmd_optimal(optimal, out);
    if (synth_cmd->parsed()) return cmd_synth(synth, out);
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace scalelaw::cli
