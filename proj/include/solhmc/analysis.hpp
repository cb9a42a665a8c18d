#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "solhmc/sampler.hpp"
#include "solhmc/sde.hpp"

namespace solhmc {

// ---------------------------------------------------------------------------
// Small statistics helpers

struct MeanEstimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t count = 0;
};

/// Mean and standard error of independent samples.
MeanEstimate iid_mean(std::span<const double> xs);

/// Mean with a batch-means standard error for a correlated series.
MeanEstimate batch_mean(std::span<const double> xs, std::size_t batches = 32);

/// Least-squares slope of log(y) against log(x). Empty when fewer than two points or any
/// nonpositive value.
std::optional<double> fit_loglog_slope(std::span<const double> x, std::span<const double> y);

/// Runs fn(i) for i in [0, count) across hardware threads. fn must only touch slot i.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

// ---------------------------------------------------------------------------
// E(n) mixing statistic

/// (1/T) int_0^T |path(t)| dt by the trapezoid rule with zero endpoints.
double mean_abs_path(const SineTransform& transform, std::span<const double> q);

/// Running mean of coefficient snapshots, synthesised on the interior grid.
Vector running_mean_path(const SineTransform& transform, std::span<const Vector> snapshots);

struct MixingRow {
  double n = 0.0;  ///< integrator work N_d * N_M
  double e = 0.0;
};

/// E(n) after each snapshot whose cumulative work reaches the next checkpoint.
/// work[i] is the cumulative integrator work at snapshots[i].
std::vector<MixingRow> e_of_n(const SineTransform& transform, std::span<const Vector> snapshots,
                              std::span<const double> work, std::span<const double> checkpoints);

/// Online E(n): feed every chain state, rows are emitted at the checkpoints.
/// States reached with work <= burn_in_work are not averaged and checkpoints inside that
/// window are dropped.
class RunningMeanTracker {
 public:
  RunningMeanTracker(const SineTransform& transform, std::vector<double> checkpoints,
                     double burn_in_work = 0.0);

  void add(std::span<const double> q, double work);
  const std::vector<MixingRow>& rows() const { return rows_; }

 private:
  const SineTransform& transform_;
  std::vector<double> checkpoints_;
  double burn_in_work_;
  std::size_t averaged_ = 0;
  std::size_t next_ = 0;
  Vector sum_;
  std::vector<MixingRow> rows_;
};

struct MixingBandRow {
  double n = 0.0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct MixingReport {
  std::string label;
  std::size_t seeds = 0;
  std::vector<MixingBandRow> rows;
};

/// Pointwise mean/min/max across seeds; curves must share their n values.
MixingReport average_curves(const std::string& label, const std::vector<std::vector<MixingRow>>& curves);

// ---------------------------------------------------------------------------
// Interpolants of a chain run with delta = h = tau

/// Piecewise-linear interpolant z(t) of states x^0, x^1, ... spaced delta apart.
PhasePoint interpolant(std::span<const PhasePoint> states, double delta, double t);

// ---------------------------------------------------------------------------
// Diffusion limit

struct DiffusionLimitOptions {
  std::vector<double> ladder = {0.2, 0.1, 0.05, 0.025};
  double t_final = 5.0;
  std::size_t trajectories = 2000;
  std::size_t sde_trajectories = 0;  ///< 0 means the same as trajectories
  double sde_dt = 1e-3;
  std::optional<PhasePoint> x0;  ///< default (0, 0)
  std::uint64_t seed = 1;
};

const std::vector<std::string>& diffusion_functionals();

struct FunctionalEstimate {
  MeanEstimate chain;
  double gap = 0.0;      ///< chain mean - SDE mean
  double gap_se = 0.0;   ///< combined standard error
};

struct DiffusionLimitLevel {
  double delta = 0.0;
  std::size_t steps = 0;
  double acceptance = 0.0;
  std::vector<FunctionalEstimate> estimates;  ///< ordered as diffusion_functionals()
};

struct DiffusionLimitReport {
  std::vector<std::string> functionals;
  std::vector<DiffusionLimitLevel> levels;
  std::vector<MeanEstimate> sde;
  std::size_t trajectories = 0;
  std::size_t sde_trajectories = 0;
  double sde_dt = 0.0;
  /// Per functional: empty for a single-level ladder, otherwise whether |gap| is nonincreasing
  /// within 3 combined standard errors and the finest gap is within 3 standard errors of 0.
  std::vector<std::optional<bool>> converged;
};

/// Terminal values f(z) for every functional in diffusion_functionals().
std::vector<double> evaluate_functionals(const TargetModel& target, const PhasePoint& x);

DiffusionLimitReport diffusion_limit_study(const TargetModel& target, const DiffusionLimitOptions& options);

// ---------------------------------------------------------------------------
// Acceptance scaling

struct ScalingOptions {
  std::vector<double> ladder = {0.2, 0.1, 0.05, 0.025};
  std::size_t steps = 10000;
  double burn_in_fraction = 0.1;
  std::uint64_t seed = 1;
};

struct ScalingLevel {
  double delta = 0.0;
  MeanEstimate rejection;  ///< mean of 1 - alpha
};

struct ScalingReport {
  std::vector<ScalingLevel> levels;
  std::optional<double> slope;
};

ScalingReport acceptance_scaling_study(const TargetModel& target, const ScalingOptions& options);

// ---------------------------------------------------------------------------
// Invariance

struct ModeVariance {
  std::size_t mode = 0;  ///< 1-based
  double lambda_sq = 0.0;
  double variance = 0.0;
  double ratio = 0.0;
  double ratio_se = 0.0;
};

/// Per-mode variance of q along an SOL-HMC chain after burn-in.
std::vector<ModeVariance> chain_mode_variances(const TargetModel& target, const SamplerConfig& config,
                                               std::size_t modes, double burn_in_fraction = 0.1);

/// Per-mode variance of q along one long SDE trajectory started from a prior draw.
std::vector<ModeVariance> sde_mode_variances(const TargetModel& target, const SdeParams& params,
                                             std::size_t modes, std::uint64_t seed,
                                             double burn_in_fraction = 0.1);

}  // namespace solhmc
