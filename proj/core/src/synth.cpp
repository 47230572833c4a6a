#include "scalelaw/synth.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "scalelaw/error.hpp"

namespace scalelaw {

double NormalSource::uniform() {
  // 53 random bits, offset by half a step so the value is never 0 or 1.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double NormalSource::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

void validate(const SweepSpec& spec) {
  auto positive_list = [](const std::vector<double>& v, const char* name) {
    if (v.empty()) throw Error(ErrorCode::kDomain, std::string(name) + " must not be empty");
    for (double x : v)
      if (!(x > 0.0) || !std::isfinite(x))
        throw Error(ErrorCode::kDomain, std::string(name) + " must be positive");
  };
  positive_list(spec.n_values, "n_values");
  positive_list(spec.d_values, "d_values");
  positive_list(spec.rho_values, "rho_values");
  for (double r : spec.rho_values) validate_rho(r);
  if (!(spec.noise_sigma >= 0.0) || !std::isfinite(spec.noise_sigma))
    throw Error(ErrorCode::kDomain, "noise_sigma must be non-negative");
  bool degraded = false;
  for (double r : spec.rho_values) degraded = degraded || r < 1.0;
  if (degraded)
    validate(spec.params);
  else
    validate(spec.params.base);
}

std::vector<double> log_space(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi >= lo) || count == 0)
    throw Error(ErrorCode::kDomain, "log_space needs 0 < lo <= hi and count > 0");
  if (count == 1) return {lo};
  std::vector<double> out(count);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<RunRecord> generate_sweep(const SweepSpec& spec) {
  validate(spec);
  NormalSource rng(spec.seed);
  std::vector<RunRecord> out;
  out.reserve(spec.n_values.size() * spec.d_values.size() * spec.rho_values.size());
  for (double rho : spec.rho_values) {
    for (double n : spec.n_values) {
      for (double d : spec.d_values) {
        double loss = eval_inforesolution(spec.params, n, d, rho);
        if (spec.noise_sigma > 0.0) loss *= std::exp(spec.noise_sigma * rng.normal());
        out.push_back({n, d, rho, loss});
      }
    }
  }
  return out;
}

MergedCorpora generate_merged_corpus(std::uint64_t vocab, std::uint64_t merge_factor,
                                     std::size_t length, std::uint64_t seed) {
  if (vocab < 1 || merge_factor < 1 || vocab % merge_factor != 0)
    throw Error(ErrorCode::kDomain, "merge factor must divide the vocabulary size");
  if (length == 0) throw Error(ErrorCode::kDomain, "corpus length must be positive");

  std::mt19937_64 engine(seed);
  std::vector<bool> seen(vocab, false);
  std::string source;
  std::string target;
  for (std::size_t i = 0; i < length; ++i) {
    // Rejection sampling keeps the draw exactly uniform and portable.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % vocab;
    std::uint64_t draw = engine();
    while (draw >= limit) draw = engine();
    const std::uint64_t symbol = draw % vocab;
    seen[symbol] = true;
    if (i > 0) {
      source += ' ';
      target += ' ';
    }
    source += 'w';
    source += std::to_string(symbol);
    target += 'w';
    target += std::to_string(symbol / merge_factor);
  }
  bool full = true;
  for (bool s : seen) full = full && s;
  return {Corpus::from_text(std::move(source)), Corpus::from_text(std::move(target)), full};
}

}  // namespace scalelaw
