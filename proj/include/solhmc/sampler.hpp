#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "solhmc/integrators.hpp"

namespace solhmc {

/// Everything needed to reproduce one chain.
struct SamplerConfig {
  std::string preset = "sol-hmc";
  IntegratorParams integrator;
  std::size_t iterations = 1000;
  std::uint64_t seed = 1;
  std::string target_label = "double-well";
  double length = 100.0;  ///< path interval (0, T)
  std::size_t modes = 128;
  std::size_t grid = 512;
  std::vector<std::string> observables = {"q1", "psi"};
  std::size_t thinning = 1;
  bool store_snapshots = false;
  std::string start = "prior";  ///< "prior" (q drawn from C) or "well" (path = +1)

  void validate() const;
};

/// Modes of the path equal to +1 at every interior grid point.
Vector well_state(const TargetModel& target);

/// Names accepted in SamplerConfig::observables.
const std::vector<std::string>& known_observables();

struct PresetOverrides {
  std::optional<double> h;
  std::optional<double> iota;
  std::optional<double> delta;
  std::optional<int> n_steps;
};

/// "sol-hmc", "hmc" (iota = 1, N_d = round(1/h)), "mala" (iota = 1, N_d = 1) and
/// "diffusion-limit" (delta = h = tau, Gamma_2 = I). Throws ValidationError on unknown names
/// or overrides that contradict the preset.
SamplerConfig preset(const std::string& name, const PresetOverrides& overrides = {});

/// Accept when rule(alpha, u) is true; u is the uniform draw consumed by every step.
using AcceptRule = std::function<bool(double alpha, double u)>;

struct StepResult {
  PhasePoint x;
  bool accepted = false;
  double delta_h = 0.0;
  double alpha = 1.0;
  int n_steps = 0;  ///< integrator steps spent on the proposal
  TargetEval eval;  ///< Psi and grad Psi at x.q
};

/// One SOL-HMC transition bound to a target and integrator parameters.
///
/// v' = Theta_0(v); (q*, v*) = chi^h_tau(q, v'); accept with alpha = 1 ^ exp(dH),
/// otherwise move to (q, -v'). Throws NumericalError if dH is not finite.
class SolHmcKernel {
 public:
  SolHmcKernel(const TargetModel& target, IntegratorParams params);

  StepResult step(const PhasePoint& x, Rng& rng, const TargetEval* eval_at_x = nullptr,
                  const AcceptRule& rule = {}) const;

  const IntegratorParams& params() const { return params_; }
  const TargetModel& target() const { return target_; }

 private:
  const TargetModel& target_;
  IntegratorParams params_;
  OuCoefficients ou_;
};

StepResult sol_hmc_step(const PhasePoint& x, const TargetModel& target, const IntegratorParams& params,
                        Rng& rng, const AcceptRule& rule = {});

struct StepRecord {
  bool accepted = false;
  double delta_h = 0.0;
  double alpha = 1.0;
  int n_steps = 0;
  std::vector<double> observables;
};

struct Snapshot {
  std::size_t step = 0;  ///< 1-based index of the chain state
  PhasePoint x;
};

struct ChainTrace {
  SamplerConfig config;
  std::vector<std::string> observable_names;
  std::vector<StepRecord> records;
  std::vector<Snapshot> snapshots;
  std::size_t accepted = 0;
  std::size_t work = 0;  ///< total integrator steps, rejected proposals included
  PhasePoint final_state;
  bool aborted = false;
  std::string abort_message;

  double acceptance_rate() const {
    return records.empty() ? 0.0 : static_cast<double>(accepted) / static_cast<double>(records.size());
  }
};

/// Called after every transition with the 1-based step index and the new chain state.
using ChainObserver = std::function<void(std::size_t step, const StepResult& result)>;

/// Runs config.iterations transitions. The initial state defaults to an independent draw of
/// q and v from the prior. A NumericalError stops the chain and is reported through
/// ChainTrace::aborted with the records produced so far.
ChainTrace run_chain(const TargetModel& target, const SamplerConfig& config, Rng& rng,
                     const std::optional<PhasePoint>& initial = std::nullopt,
                     const ChainObserver& observer = {});

/// Builds the prior and target described by the config.
TargetModel make_target(const SamplerConfig& config);

/// Observable evaluation on a chain state.
class ObservableSet {
 public:
  ObservableSet(const TargetModel& target, std::vector<std::string> names);
  std::vector<double> evaluate(const PhasePoint& x, const TargetEval& eval) const;
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  Vector midpoint_basis_;
};

}  // namespace solhmc
