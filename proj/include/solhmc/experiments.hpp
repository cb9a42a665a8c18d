#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "solhmc/analysis.hpp"

namespace solhmc {

/// Problem size and run length of the bridge mixing experiments.
struct MixingScale {
  double length = 100.0;
  std::size_t modes = 128;
  std::size_t grid = 512;
  std::size_t seeds = 8;
  std::uint64_t seed = 2024;
  /// Integrator work n = N_d * N_M spent by every chain.
  std::size_t work = 100000;
  std::size_t checkpoints = 200;
  /// Step size shared by every method.
  double h = 0.02;
  /// Fraction of the work discarded before averaging; 0 averages from i = 1.
  double burn_in_fraction = 0.0;

  static MixingScale desk();
  static MixingScale full();
};

struct MixingMethod {
  std::string label;
  IntegratorParams integrator;
};

/// MALA, HMC (tau = 1) and N_d = 1 SOL-HMC at iota in {0.9, 0.99, 0.999}.
std::vector<MixingMethod> fig1_methods(const MixingScale& scale);
/// HMC (tau = 1) and SOL-HMC at iota = 2^{-1/2} with N_d in {10, 25, 50} and N_d ~ U{25..75}.
std::vector<MixingMethod> fig2_methods(const MixingScale& scale);

/// Runs every method for scale.seeds chains on the double-well bridge target. Seed i starts
/// every method from q = +1 on the interior with the same prior velocity draw. Row n = 0 holds
/// E of the initial path.
std::vector<MixingReport> run_mixing_experiment(const std::vector<MixingMethod>& methods,
                                                const MixingScale& scale);

/// First n at which the seed-averaged curve falls to `level`; negative if it never does.
double first_crossing(const MixingReport& report, double level);

}  // namespace solhmc
