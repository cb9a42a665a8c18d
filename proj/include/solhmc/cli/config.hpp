#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "solhmc/analysis.hpp"
#include "solhmc/sampler.hpp"

namespace solhmc::cli {

/// Config problem attributable to one key (or to the file itself).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key.empty() ? message : "[" + key + "] " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Parameters of the analysis commands ([study] section).
struct StudyConfig {
  std::vector<double> ladder = {0.2, 0.1, 0.05, 0.025};
  double t_final = 5.0;
  std::size_t trajectories = 2000;
  std::size_t sde_trajectories = 0;
  double sde_dt = 1e-3;
  std::size_t steps = 10000;
  std::size_t modes_checked = 10;
  bool include_sde = true;
  double sde_t_final = 40000.0;
  double sde_invariance_dt = 1e-2;
};

/// Fully resolved contents of a TOML config file.
///
/// Sections: [prior] length, modes, grid, sobolev_index; [target] label;
/// [sampler] preset, h, n_steps, n_steps_min, n_steps_max, iota | delta, gamma2;
/// [run] iterations, seed, thinning, observables, store_snapshots, burn_in, start; [study] ...
struct RunConfig {
  SamplerConfig sampler;
  double sobolev_index = 0.0;
  double burn_in = 0.1;
  StudyConfig study;
};

RunConfig parse_config(const std::string& toml_text, const std::string& source = "<string>");
/// Throws ConfigError naming the path when the file cannot be read.
RunConfig load_config(const std::string& path);

/// TOML text that parses back to an identical RunConfig.
std::string to_toml(const RunConfig& config);

}  // namespace solhmc::cli
