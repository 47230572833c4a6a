#include "scalelaw/rho.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "scalelaw/error.hpp"
#include "scalelaw/lawcore.hpp"

namespace scalelaw {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kDomain, what);
}

double ratio_or_degenerate(double numerator, double denominator, const char* what) {
  if (!(denominator > 0.0)) throw Error(ErrorCode::kDegenerate, std::string(what) + ": source term is zero");
  const double r = numerator / denominator;
  if (!(r > 0.0)) throw Error(ErrorCode::kDegenerate, std::string(what) + ": information resolution is 0");
  return r;
}

// Clamps a raw estimate into (0, 1]; values above 1 are estimator noise.
RhoEstimate finish(double raw, std::string estimator, std::vector<Diagnostic> diagnostics) {
  if (!(raw > 0.0) || !std::isfinite(raw))
    throw Error(ErrorCode::kDegenerate, estimator + ": estimate is " + std::to_string(raw));
  RhoEstimate out;
  out.estimator = std::move(estimator);
  out.diagnostics = std::move(diagnostics);
  out.diagnostics.push_back({"raw_rho", raw});
  if (raw > 1.0) {
    out.rho = 1.0;
    out.clamped = true;
    out.diagnostics.push_back({"warning", std::string("estimate exceeded 1 and was clamped")});
  } else {
    out.rho = raw;
  }
  out.diagnostics.push_back({"clamped", out.clamped});
  return out;
}

}  // namespace

void validate(const TransformationSpec& spec) {
  std::visit(overloaded{
                 [](const Quantization& s) {
                   require(s.vocab >= 1, "quantization vocab must be positive");
                   require(s.q >= 1 && s.q <= s.vocab, "quantization needs 1 <= q <= V");
                 },
                 [](const LowRank& s) {
                   require(!s.eigenvalues.empty(), "low-rank spec needs eigenvalues");
                   require(s.eigenvalues.size() == s.correlations.size(),
                           "eigenvalues and correlations must have equal length");
                   require(s.k >= 1 && s.k <= s.eigenvalues.size(), "low-rank needs 1 <= k <= dim");
                   for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
                     require(std::isfinite(s.eigenvalues[i]) && s.eigenvalues[i] > 0.0,
                             "eigenvalues must be positive");
                     if (i > 0)
                       require(s.eigenvalues[i] <= s.eigenvalues[i - 1],
                               "eigenvalues must be sorted descending");
                     require(s.correlations[i] >= -1.0 && s.correlations[i] <= 1.0,
                             "correlations must lie in [-1, 1]");
                   }
                 },
                 [](const AdditiveNoise& s) {
                   require(std::isfinite(s.snr) && s.snr >= 0.0, "snr must be non-negative");
                   require(std::isfinite(s.snr_baseline) && s.snr_baseline > 0.0,
                           "snr baseline must be positive");
                   require(s.snr <= s.snr_baseline, "snr must not exceed the baseline snr");
                 },
             },
             spec);
}

double rho_analytic(const TransformationSpec& spec) {
  validate(spec);
  return std::visit(
      overloaded{
          [](const Quantization& s) {
            // log2 keeps power-of-two ratios exact.
            return ratio_or_degenerate(std::log2(static_cast<double>(s.q)),
                                       std::log2(static_cast<double>(s.vocab)), "quantization");
          },
          [](const LowRank& s) {
            double kept = 0.0;
            double total = 0.0;
            for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
              const double w = s.eigenvalues[i] * s.correlations[i] * s.correlations[i];
              total += w;
              if (i < s.k) kept = total;
            }
            return ratio_or_degenerate(kept, total, "low-rank");
          },
          [](const AdditiveNoise& s) {
            return ratio_or_degenerate(std::log2(1.0 + s.snr), std::log2(1.0 + s.snr_baseline),
                                       "additive noise");
          },
      },
      spec);
}

std::optional<double> default_nu(const TransformationSpec& spec) {
  return std::visit(overloaded{
                        [](const Quantization&) -> std::optional<double> { return std::nullopt; },
                        [](const LowRank&) -> std::optional<double> { return kLowRankNu; },
                        [](const AdditiveNoise&) -> std::optional<double> { return kAdditiveNoiseNu; },
                    },
                    spec);
}

double variance_inflation(const TransformationSpec& spec, double nu) {
  return variance_inflation(rho_analytic(spec), nu);
}

std::string_view kind_name(const TransformationSpec& spec) noexcept {
  switch (spec.index()) {
    case 0: return "quant";
    case 1: return "lowrank";
    default: return "noise";
  }
}

RhoEstimate rho_vocab(const Corpus& source, const Corpus& target) {
  const auto vs = static_cast<double>(source.vocabulary_size());
  const auto vt = static_cast<double>(target.vocabulary_size());
  if (source.vocabulary_size() < 2)
    throw Error(ErrorCode::kDegenerate, "vocab: source corpus has a single distinct token");
  if (target.vocabulary_size() < 2)
    throw Error(ErrorCode::kDegenerate, "vocab: target corpus has a single distinct token");
  std::vector<Diagnostic> diags{
      {"source_vocab", static_cast<std::int64_t>(source.vocabulary_size())},
      {"target_vocab", static_cast<std::int64_t>(target.vocabulary_size())},
      {"tokenization", std::string(to_string(source.tokenization()))},
  };
  return finish(std::log(vt) / std::log(vs), "vocab", std::move(diags));
}

double ngram_conditional_entropy(const Corpus& corpus, std::size_t n) {
  require(n >= 1, "n-gram order must be at least 1");
  const auto tokens = corpus.tokens();
  const std::size_t len = tokens.size();
  if (len < n)
    throw Error(ErrorCode::kInsufficientData, "corpus has " + std::to_string(len) +
                                                  " tokens, fewer than n = " + std::to_string(n));

  auto at = [&](std::size_t pos, std::size_t j) { return tokens[(pos + j) % len]; };
  auto compare_prefix = [&](std::size_t a, std::size_t b, std::size_t width) {
    for (std::size_t j = 0; j < width; ++j) {
      const auto ta = at(a, j);
      const auto tb = at(b, j);
      if (ta != tb) return ta < tb ? -1 : 1;
    }
    return 0;
  };

  // Sorting positions by their n-gram makes every context a contiguous run.
  std::vector<std::size_t> pos(len);
  std::iota(pos.begin(), pos.end(), std::size_t{0});
  std::sort(pos.begin(), pos.end(), [&](std::size_t a, std::size_t b) {
    const int c = compare_prefix(a, b, n);
    return c != 0 ? c < 0 : a < b;
  });

  const auto total = static_cast<double>(len);
  double h = 0.0;
  std::size_t ctx_begin = 0;
  while (ctx_begin < len) {
    std::size_t ctx_end = ctx_begin + 1;
    while (ctx_end < len && compare_prefix(pos[ctx_begin], pos[ctx_end], n - 1) == 0) ++ctx_end;
    const auto ctx_count = static_cast<double>(ctx_end - ctx_begin);
    std::size_t g = ctx_begin;
    while (g < ctx_end) {
      std::size_t g_end = g + 1;
      while (g_end < ctx_end && compare_prefix(pos[g], pos[g_end], n) == 0) ++g_end;
      const auto count = static_cast<double>(g_end - g);
      h -= count / total * std::log(count / ctx_count);
      g = g_end;
    }
    ctx_begin = ctx_end;
  }
  return std::max(h, 0.0);
}

RhoEstimate rho_ngram(const Corpus& source, const Corpus& target, std::size_t n) {
  const double hs = ngram_conditional_entropy(source, n);
  const double ht = ngram_conditional_entropy(target, n);
  if (!(hs > 0.0)) throw Error(ErrorCode::kDegenerate, "ngram: source conditional entropy is zero");
  if (!(ht > 0.0)) throw Error(ErrorCode::kDegenerate, "ngram: target conditional entropy is zero");
  std::vector<Diagnostic> diags{
      {"n", static_cast<std::int64_t>(n)},
      {"source_entropy_nats", hs},
      {"target_entropy_nats", ht},
      {"tokenization", std::string(to_string(source.tokenization()))},
  };
  return finish(ht / hs, "ngram", std::move(diags));
}

std::uint64_t deflate_bits(std::string_view data, const CompressionSettings& settings) {
  require(!data.empty(), "cannot compress empty input");
  require(settings.chunk_bytes > 0, "chunk size must be positive");

  std::uint64_t total_bytes = 0;
  std::vector<unsigned char> out;
  for (std::size_t offset = 0; offset < data.size(); offset += settings.chunk_bytes) {
    const std::size_t len = std::min(settings.chunk_bytes, data.size() - offset);
    z_stream zs{};
    // Negative window bits select raw DEFLATE without a zlib/gzip wrapper.
    if (deflateInit2(&zs, settings.level, Z_DEFLATED, -settings.window_bits, settings.mem_level,
                     Z_DEFAULT_STRATEGY) != Z_OK)
      throw Error(ErrorCode::kIo, "deflateInit2 failed");
    out.resize(deflateBound(&zs, static_cast<uLong>(len)));
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data() + offset));
    zs.avail_in = static_cast<uInt>(len);
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&zs, Z_FINISH);
    const auto produced = zs.total_out;
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) throw Error(ErrorCode::kIo, "deflate did not finish");
    total_bytes += produced;
  }
  return total_bytes * 8;
}

RhoEstimate rho_compress(const Corpus& source, const Corpus& target,
                         const CompressionSettings& settings) {
  const std::uint64_t cs = deflate_bits(source.text(), settings);
  const std::uint64_t ct = deflate_bits(target.text(), settings);
  const double source_ratio = static_cast<double>(cs) / static_cast<double>(source.raw_bytes());
  const double target_ratio = static_cast<double>(ct) / static_cast<double>(target.raw_bytes());
  std::vector<Diagnostic> diags{
      {"compressor", std::string("raw-deflate")},
      {"zlib_version", std::string(zlibVersion())},
      {"level", static_cast<std::int64_t>(settings.level)},
      {"window_bits", static_cast<std::int64_t>(settings.window_bits)},
      {"mem_level", static_cast<std::int64_t>(settings.mem_level)},
      {"chunk_bytes", static_cast<std::int64_t>(settings.chunk_bytes)},
      {"source_bytes", static_cast<std::int64_t>(source.raw_bytes())},
      {"target_bytes", static_cast<std::int64_t>(target.raw_bytes())},
      {"source_compressed_bits", static_cast<std::int64_t>(cs)},
      {"target_compressed_bits", static_cast<std::int64_t>(ct)},
  };
  return finish(target_ratio / source_ratio, "compress", std::move(diags));
}

}  // namespace scalelaw
