#ifndef SCALELAW_ERROR_HPP
#define SCALELAW_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace scalelaw {

enum class ErrorCode {
  kDomain,                 // argument outside its mathematical domain
  kInsufficientData,       // fewer records/tokens than the operation needs
  kMixedResolution,        // rho < 1 records passed to a Chinchilla fit
  kStaging,                // staged fit without rho = 1 records
  kInsufficientVariation,  // rho values do not identify the loss shift
  kUndefinedResolution,    // I(X;Y) = 0, rho undefined
  kDegenerate,             // estimator hit a degenerate input (zero entropy, q = 1, ...)
  kKappaTransfer,          // cross-corpus kappa reuse without acknowledgment
  kParse,                  // malformed input file
  kIo,
};

std::string_view to_string(ErrorCode code) noexcept;

// Single exception type for the library. `stage()` is non-empty when the
// error was raised inside a pipeline step and relabelled by run_pipeline.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string stage = {})
      : std::runtime_error(message), code_(code), stage_(std::move(stage)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }

 private:
  ErrorCode code_;
  std::string stage_;
};

}  // namespace scalelaw

#endif  // SCALELAW_ERROR_HPP
