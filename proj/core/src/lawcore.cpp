#include "scalelaw/lawcore.hpp"

#include <cmath>
#include <string>

#include "scalelaw/error.hpp"

namespace scalelaw {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kInsufficientData: return "insufficient-data";
    case ErrorCode::kMixedResolution: return "mixed-resolution";
    case ErrorCode::kStaging: return "staging";
    case ErrorCode::kInsufficientVariation: return "insufficient-variation";
    case ErrorCode::kUndefinedResolution: return "undefined-resolution";
    case ErrorCode::kDegenerate: return "degenerate";
    case ErrorCode::kKappaTransfer: return "kappa-transfer";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::kDomain, what);
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

void validate(const ChinchillaParams& p) {
  require(finite_positive(p.A), "A must be positive");
  require(finite_positive(p.alpha), "alpha must be positive");
  require(finite_positive(p.B), "B must be positive");
  require(finite_positive(p.beta), "beta must be positive");
  require(std::isfinite(p.E) && p.E >= 0.0, "E must be non-negative");
}

void validate(const InfoResolutionParams& p) {
  validate(p.base);
  require(finite_positive(p.nu), "nu must be positive");
  require(std::isfinite(p.mu) && p.mu > 0.0 && p.mu <= 1.0, "mu must lie in (0, 1]");
  require(finite_positive(p.kappa), "kappa must be positive");
}

void validate_rho(double rho) {
  require(std::isfinite(rho) && rho > 0.0 && rho <= 1.0, "rho must lie in (0, 1]");
}

void validate(const RunRecord& r) {
  require(finite_positive(r.n_params), "n_params must be positive");
  require(finite_positive(r.n_data), "n_data must be positive");
  validate_rho(r.rho);
  require(finite_positive(r.loss), "loss must be positive");
}

double eval_chinchilla(const ChinchillaParams& p, double n, double d) {
  require(finite_positive(n), "n must be positive");
  require(finite_positive(d), "d must be positive");
  return p.A / std::pow(n, p.alpha) + p.B / std::pow(d, p.beta) + p.E;
}

double variance_inflation(double rho, double nu) {
  validate_rho(rho);
  require(finite_positive(nu), "nu must be positive");
  return std::pow(rho, -nu);
}

double loss_shift(const InfoResolutionParams& p, double rho) {
  validate_rho(rho);
  return p.kappa * std::pow(1.0 - rho, p.mu);
}

double eval_inforesolution(const InfoResolutionParams& p, double n, double d, double rho) {
  require(finite_positive(n), "n must be positive");
  require(finite_positive(d), "d must be positive");
  validate_rho(rho);
  // Same summation order as eval_chinchilla so that rho = 1 is bit-identical.
  const ChinchillaParams& c = p.base;
  const double data_term = c.B / std::pow(d, c.beta) * std::pow(rho, -p.nu);
  return c.A / std::pow(n, c.alpha) + data_term + c.E + p.kappa * std::pow(1.0 - rho, p.mu);
}

double loss_floor(const InfoResolutionParams& p, double rho) {
  return p.base.E + loss_shift(p, rho);
}

double chinchilla_optimal_n(const ChinchillaParams& p, double compute) {
  validate(p);
  require(finite_positive(compute), "compute must be positive");
  const double s = p.alpha + p.beta;
  const double g = (p.alpha * p.A) / (p.beta * p.B);
  return std::pow(g, 1.0 / s) * std::pow(compute / 6.0, p.beta / s);
}

ComputeAllocation optimal_allocation(const InfoResolutionParams& p, double compute, double rho) {
  validate(p);
  validate_rho(rho);
  const double s = p.base.alpha + p.base.beta;
  const double n_opt = chinchilla_optimal_n(p.base, compute) * std::pow(rho, p.nu / s);
  return {compute, n_opt, compute / (6.0 * n_opt)};
}

}  // namespace scalelaw
