#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace solhmc::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kConfigError = 2, kNumericalAbort = 3, kIoError = 4 };

struct CommandOptions {
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> seeds;
  std::optional<std::size_t> work;
  std::optional<double> burn_in;  ///< E(n) burn-in fraction for the figure commands
  bool full = false;
};

/// Trace CSV (step, accepted, delta_H, observables...) plus a sibling manifest.
int cmd_sample(const CommandOptions& opts, std::ostream& log, std::ostream& err);
/// One E(n) CSV per method in the output directory plus manifest.json.
int cmd_fig1(const CommandOptions& opts, std::ostream& log, std::ostream& err);
int cmd_fig2(const CommandOptions& opts, std::ostream& log, std::ostream& err);
int cmd_diffusion_limit(const CommandOptions& opts, std::ostream& log, std::ostream& err);
int cmd_scaling(const CommandOptions& opts, std::ostream& log, std::ostream& err);
int cmd_invariance(const CommandOptions& opts, std::ostream& log, std::ostream& err);

/// Full command-line entry point.
int run_cli(int argc, char** argv, std::ostream& log, std::ostream& err);

}  // namespace solhmc::cli
