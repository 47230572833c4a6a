#ifndef SCALELAW_SYNTH_HPP
#define SCALELAW_SYNTH_HPP

// Seeded generators for loss sweeps and merged corpora.
//
// Randomness comes from std::mt19937_64, whose output sequence is fixed by
// the C++ standard. Normal deviates use Box-Muller on 53-bit uniforms rather
// than std::normal_distribution, which is implementation-defined.

#include <cstdint>
#include <random>
#include <vector>

#include "scalelaw/corpus.hpp"
#include "scalelaw/lawcore.hpp"

namespace scalelaw {

struct SweepSpec {
  InfoResolutionParams params;
  std::vector<double> n_values;
  std::vector<double> d_values;
  std::vector<double> rho_values{1.0};
  double noise_sigma = 0.0;  // multiplicative log-normal scale
  std::uint64_t seed = 0;
};

void validate(const SweepSpec& spec);

// `count` log-uniform points from lo to hi inclusive.
std::vector<double> log_space(double lo, double hi, std::size_t count);

// Records ordered by rho, then N, then D (each as given in the spec):
// loss = eval_inforesolution(N, D, rho) * exp(eps), eps ~ Normal(0, sigma^2).
std::vector<RunRecord> generate_sweep(const SweepSpec& spec);

struct MergedCorpora {
  Corpus source;
  Corpus target;
  bool full_coverage = false;  // every source symbol occurred at least once
};

// Source: `length` symbols drawn uniformly from `vocab`. Target: each symbol
// replaced by its bucket of `merge_factor` consecutive symbols. Both are
// written as space-separated words.
MergedCorpora generate_merged_corpus(std::uint64_t vocab, std::uint64_t merge_factor,
                                     std::size_t length, std::uint64_t seed);

class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed) : engine_(seed) {}
  double uniform();  // (0, 1)
  double normal();
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace scalelaw

#endif  // SCALELAW_SYNTH_HPP
