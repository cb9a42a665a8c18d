#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "solhmc/rng.hpp"
#include "solhmc/target.hpp"

namespace solhmc {

enum class SdeScheme { OuSplitting, EulerMaruyama };

SdeScheme parse_sde_scheme(const std::string& name);
std::string to_string(SdeScheme scheme);

/// Second-order Langevin dynamics in the eigenbasis:
///   dq = (v - Gamma_1 F(q)) dt + sqrt(2 Gamma_1 C) dW_1
///   dv = (-F(q) - Gamma_2 v) dt + sqrt(2 Gamma_2 C) dW_2,  F(q) = q + C grad Psi(q).
struct SdeParams {
  Vector gamma1;  ///< empty means 0
  Vector gamma2;  ///< empty means I
  double dt = 1e-2;
  double t_final = 1.0;
  SdeScheme scheme = SdeScheme::OuSplitting;
  /// Time between recorded snapshots; 0 records only the initial and final states.
  double snapshot_interval = 0.0;

  std::size_t step_count() const;
  void validate(std::size_t modes) const;
};

/// Precomputed one-step map for a fixed target and parameter set.
///
/// OuSplitting is a Strang splitting: the linear part (rotation plus both OU frictions) is
/// integrated exactly over dt/2 per mode, around an explicit kick by C grad Psi over dt.
class SdeStepper {
 public:
  SdeStepper(const TargetModel& target, SdeParams params);

  /// Advances x by one dt. Throws NumericalError if the state becomes non-finite.
  void step(PhasePoint& x, Rng& rng) const;

  const SdeParams& params() const { return params_; }

 private:
  struct ModeMap {
    std::array<double, 4> flow;  // exp(A dt/2), row-major
    std::array<double, 3> chol;  // lower Cholesky factor of the half-step covariance
  };

  void linear_half_step(PhasePoint& x, Rng& rng) const;

  const TargetModel& target_;
  SdeParams params_;
  Vector gamma1_;
  Vector gamma2_;
  std::vector<ModeMap> modes_;
};

PhasePoint sde_step(const PhasePoint& x, const TargetModel& target, const SdeParams& params, Rng& rng);

struct SdeTrajectory {
  std::vector<double> times;
  std::vector<PhasePoint> states;
};

using SdeObserver = std::function<void(double t, const PhasePoint& x)>;

/// Integrates from x0 to params.t_final, calling observer after every step.
SdeTrajectory simulate(const PhasePoint& x0, const TargetModel& target, const SdeParams& params, Rng& rng,
                       const SdeObserver& observer = {});

/// exp(A t) for the 2x2 generator A = [[-g1, 1], [-1, -g2]], row-major.
std::array<double, 4> linear_flow(double g1, double g2, double t);

}  // namespace solhmc
