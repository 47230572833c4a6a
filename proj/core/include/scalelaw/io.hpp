#ifndef SCALELAW_IO_HPP
#define SCALELAW_IO_HPP

// File formats shared by the library and the command-line tool.
//
//   runs CSV     header `n_params,n_tokens,rho,loss` (rho optional, default 1)
//   params JSON  {A, alpha, B, beta, E [, nu, mu, kappa], metadata{...}}
//   report JSON  TransferReport
//
// Numbers are written with 17 significant digits (CSV) or the shortest
// representation that round-trips (JSON); both parse back bit-exactly.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scalelaw/fitter.hpp"
#include "scalelaw/lawcore.hpp"
#include "scalelaw/rho.hpp"
#include "scalelaw/transfer.hpp"

namespace scalelaw {

inline constexpr std::string_view kToolVersion = "0.1.0";

// Locale-independent, 17 significant digits.
std::string format_double(double value);

// Throws Error(kParse) with a 1-based line number on malformed input.
std::vector<RunRecord> read_runs_csv(std::istream& in);
std::vector<RunRecord> read_runs_file(const std::filesystem::path& path);
void write_runs_csv(std::ostream& out, std::span<const RunRecord> records);

struct DataRange {
  double n_min = 0.0;
  double n_max = 0.0;
  double d_min = 0.0;
  double d_max = 0.0;
};

DataRange data_range(std::span<const RunRecord> records);

struct ParamsMetadata {
  std::optional<double> fit_objective;
  std::optional<std::uint64_t> n_points;
  std::optional<bool> converged;
  std::string tool_version{kToolVersion};
  std::string config_digest;
  std::optional<DataRange> data_range;
};

struct ParamsDocument {
  ChinchillaParams base;
  std::optional<double> nu;
  std::optional<double> mu;
  std::optional<double> kappa;
  ParamsMetadata metadata;

  bool has_resolution_terms() const { return nu && mu && kappa; }
  // Throws Error(kParse) naming the missing keys.
  InfoResolutionParams inforesolution() const;

  static ParamsDocument from(const InfoResolutionParams& p);
  static ParamsDocument from(const ChinchillaParams& p);
};

std::string params_to_json(const ParamsDocument& doc);
ParamsDocument params_from_json(std::string_view text);
ParamsDocument read_params_file(const std::filesystem::path& path);

std::string report_to_json(const TransferReport& report);
std::string estimate_to_json(const RhoEstimate& estimate, bool entropies_in_bits = false);

// Stable 64-bit FNV-1a digest of the settings that influence a fit.
std::string config_digest(const FitConfig& config);

// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace scalelaw

#endif  // SCALELAW_IO_HPP
