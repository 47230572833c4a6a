#ifndef SCALELAW_RHO_HPP
#define SCALELAW_RHO_HPP

// Information resolution: closed forms for parameterized transformations and
// model-free estimators from a (source, target) corpus pair.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "scalelaw/corpus.hpp"

namespace scalelaw {

// q-level quantization of a V-symbol source. The closed form log q / log V
// is an upper bound on the true ratio (tight for a uniform source).
struct Quantization {
  std::uint64_t q = 0;
  std::uint64_t vocab = 0;
};

// Projection onto the top-k principal directions. `eigenvalues` sorted
// descending; `correlations[i]` is the correlation of component i with Y.
struct LowRank {
  std::vector<double> eigenvalues;
  std::vector<double> correlations;
  std::size_t k = 0;
};

// Gaussian channel noise relative to a baseline signal-to-noise ratio.
struct AdditiveNoise {
  double snr = 0.0;
  double snr_baseline = 0.0;
};

using TransformationSpec = std::variant<Quantization, LowRank, AdditiveNoise>;

// Variance-inflation exponents with a closed-form justification.
inline constexpr double kLowRankNu = 1.0;
inline constexpr double kAdditiveNoiseNu = 1.0;
inline constexpr double kLabelNoiseNu = 2.0;

void validate(const TransformationSpec& spec);

// Quantization: log q / log V. LowRank: sum_{i<k} l_i r_i^2 / sum_i l_i r_i^2.
// AdditiveNoise: log(1 + SNR) / log(1 + SNR0). Throws Error(kDegenerate) when
// the result would be 0.
double rho_analytic(const TransformationSpec& spec);

// nu for transformation kinds that have one; nullopt for quantization.
std::optional<double> default_nu(const TransformationSpec& spec);

// rho_analytic(spec)^-nu.
double variance_inflation(const TransformationSpec& spec, double nu);

std::string_view kind_name(const TransformationSpec& spec) noexcept;

using DiagnosticValue = std::variant<std::string, double, std::int64_t, bool>;

struct Diagnostic {
  std::string key;
  DiagnosticValue value;
};

struct RhoEstimate {
  double rho = 1.0;
  std::string estimator;
  bool clamped = false;  // raw estimate exceeded 1
  std::vector<Diagnostic> diagnostics;
};

// log |V_target| / log |V_source| over distinct tokens.
RhoEstimate rho_vocab(const Corpus& source, const Corpus& target);

// Plug-in estimate of H(w_n | w_1 .. w_{n-1}) in nats, n >= 1. n-grams are
// counted cyclically (the corpus wraps around), which keeps every order on
// the same L positions; for n = 1 this is the unigram entropy.
double ngram_conditional_entropy(const Corpus& corpus, std::size_t n);

RhoEstimate rho_ngram(const Corpus& source, const Corpus& target, std::size_t n = 3);

// Raw DEFLATE (no container), maximum effort, 32 KiB window.
struct CompressionSettings {
  int level = 9;
  int window_bits = 15;
  int mem_level = 9;
  std::size_t chunk_bytes = std::size_t{64} << 20;
};

// Compressed size in bits (8 x bytes), summed over chunks of at most
// `chunk_bytes`.
std::uint64_t deflate_bits(std::string_view data, const CompressionSettings& settings = {});

// (C(target) / |target|) / (C(source) / |source|) over raw bytes.
RhoEstimate rho_compress(const Corpus& source, const Corpus& target,
                         const CompressionSettings& settings = {});

}  // namespace scalelaw

#endif  // SCALELAW_RHO_HPP
