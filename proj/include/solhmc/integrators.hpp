#pragma once

#include <optional>
#include <utility>

#include "solhmc/rng.hpp"
#include "solhmc/spectral.hpp"
#include "solhmc/target.hpp"

namespace solhmc {

/// Step size, trajectory length and velocity-refresh strength of one proposal.
///
/// The refresh is the exact OU flow over time delta with friction Gamma_2 (diagonal in the
/// eigenbasis). With Gamma_2 = I it is parametrised by iota through exp(-2 delta) = 1 - iota^2,
/// iota = 1 meaning delta = infinity (full refresh).
struct IntegratorParams {
  double h = 0.02;
  int n_steps = 50;
  /// When set, N_d is drawn uniformly from [first, second] at every MCMC step.
  std::optional<std::pair<int, int>> random_steps;
  double delta = 0.0;
  /// Diagonal of Gamma_2; empty means the identity.
  Vector gamma2;

  static IntegratorParams from_iota(double h, int n_steps, double iota);
  static IntegratorParams from_delta(double h, int n_steps, double delta, Vector gamma2 = {});

  /// iota equivalent to delta when Gamma_2 = I.
  double iota() const;
  double tau() const { return h * n_steps; }
  bool identity_gamma() const { return gamma2.empty(); }

  /// Throws ValidationError on h <= 0, n_steps < 1, bad random range, delta < 0,
  /// or a Gamma_2 with wrong length / nonpositive entries.
  void validate(std::size_t modes) const;
};

/// Per-mode coefficients of v' = decay_j v_j + noise_j rho_j.
struct OuCoefficients {
  Vector decay;
  Vector noise;

  OuCoefficients(const IntegratorParams& params, const SpectralPrior& prior);
};

/// Theta_0^delta: q unchanged, v' = exp(-delta Gamma_2) v + xi with xi ~ N(0, C (I - exp(-2 delta Gamma_2))).
/// The sampled xi is written to xi_out when given.
PhasePoint theta0(const PhasePoint& x, const OuCoefficients& ou, Rng& rng, Vector* xi_out = nullptr);
PhasePoint theta0(const PhasePoint& x, const IntegratorParams& params, const SpectralPrior& prior,
                  Rng& rng, Vector* xi_out = nullptr);

/// Theta_1^t: v <- v - t C grad Psi(q).
PhasePoint theta1(const PhasePoint& x, const TargetModel& target, double t);

/// R^t: exact flow of dq/dt = v, dv/dt = -q.
PhasePoint rotate(const PhasePoint& x, double t);

struct FlowResult {
  PhasePoint x;
  /// H(input) - H(output), accumulated step by step without forming H.
  double delta_h = 0.0;
  /// Psi and grad Psi at the output position.
  TargetEval end;
};

/// chi^h = Theta_1^{h/2} o R^h o Theta_1^{h/2} with its energy difference.
FlowResult chi(const PhasePoint& x, const TargetModel& target, double h);

/// n_steps compositions of chi^h. start_eval, when supplied, must be target.evaluate(x.q).
FlowResult chi_multi(const PhasePoint& x, const TargetModel& target, double h, int n_steps,
                     const TargetEval* start_eval = nullptr);

/// H(q, v) = 1/2 <q, C^-1 q> + 1/2 <v, C^-1 v> + Psi(q). Finite-N check only.
double hamiltonian_oracle(const PhasePoint& x, const TargetModel& target);

/// Determinant of the central-difference Jacobian of chi_multi on R^{2N}. Requires N <= 8.
double jacobian_determinant(const PhasePoint& x, const TargetModel& target, double h, int n_steps);

}  // namespace solhmc
