#ifndef SCALELAW_TOOLS_CLI_HPP
#define SCALELAW_TOOLS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "scalelaw/transfer.hpp"

namespace scalelaw::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;    // usage, parse and precondition errors
inline constexpr int kNumeric = 2;  // non-convergence, degenerate estimates

// Runs the tool in-process. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct SweepGrid {
  std::vector<double> n_values;
  std::vector<double> d_values;
  std::vector<double> rho_values{1.0};
};

// "n=1e6:1e9:6,d=1e7:1e11:8,rho=1/0.75/0.5". Each value is either
// lo:hi:count (log-spaced, inclusive) or a '/'-separated list.
SweepGrid parse_grid(const std::string& spec);

}  // namespace scalelaw::cli

#endif  // SCALELAW_TOOLS_CLI_HPP
