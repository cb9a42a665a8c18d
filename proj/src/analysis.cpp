#include "solhmc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "solhmc/errors.hpp"

namespace solhmc {

MeanEstimate iid_mean(std::span<const double> xs) {
  MeanEstimate m;
  m.count = xs.size();
  if (xs.empty()) return m;
  double sum = 0.0;
  for (double x : xs) sum += x;
  m.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.se = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  }
  return m;
}

MeanEstimate batch_mean(std::span<const double> xs, std::size_t batches) {
  MeanEstimate m = iid_mean(xs);
  if (xs.size() < 2 * batches || batches < 2) return m;
  const std::size_t len = xs.size() / batches;
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = b * len; i < (b + 1) * len; ++i) s += xs[i];
    means[b] = s / static_cast<double>(len);
  }
  m.se = iid_mean(means).se;
  return m;
}

std::optional<double> fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::nullopt;
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(x.size());
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return std::nullopt;
  return (n * sxy - sx * sy) / denom;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < count; i += workers) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double mean_abs_path(const SineTransform& transform, std::span<const double> q) {
  const Vector path = transform.synthesize(q);
  double acc = 0.0;
  for (double u : path) acc += std::abs(u);
  // (1/T) * (T/M) * sum
  return acc / static_cast<double>(transform.grid());
}

Vector running_mean_path(const SineTransform& transform, std::span<const Vector> snapshots) {
  if (snapshots.empty()) throw ValidationError("running mean of an empty trace");
  Vector mean(transform.modes(), 0.0);
  for (const auto& s : snapshots)
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += s[j];
  for (double& m : mean) m /= static_cast<double>(snapshots.size());
  return transform.synthesize(mean);
}

std::vector<MixingRow> e_of_n(const SineTransform& transform, std::span<const Vector> snapshots,
                              std::span<const double> work, std::span<const double> checkpoints) {
  if (snapshots.empty()) throw ValidationError("E(n) of an empty trace");
  if (work.size() != snapshots.size()) throw ValidationError("e_of_n: work and snapshots differ in length");
  RunningMeanTracker tracker(transform, {checkpoints.begin(), checkpoints.end()});
  for (std::size_t i = 0; i < snapshots.size(); ++i) tracker.add(snapshots[i], work[i]);
  return tracker.rows();
}

RunningMeanTracker::RunningMeanTracker(const SineTransform& transform, std::vector<double> checkpoints,
                                       double burn_in_work)
    : transform_(transform),
      checkpoints_(std::move(checkpoints)),
      burn_in_work_(burn_in_work),
      sum_(transform.modes(), 0.0) {
  if (!std::is_sorted(checkpoints_.begin(), checkpoints_.end()))
    throw ValidationError("E(n) checkpoints must be increasing");
  std::erase_if(checkpoints_, [&](double c) { return c <= burn_in_work_; });
}

void RunningMeanTracker::add(std::span<const double> q, double work) {
  if (work > burn_in_work_) {
    for (std::size_t j = 0; j < sum_.size(); ++j) sum_[j] += q[j];
    ++averaged_;
  }
  if (next_ >= checkpoints_.size() || work < checkpoints_[next_] || averaged_ == 0) return;
  Vector mean(sum_);
  for (double& m : mean) m /= static_cast<double>(averaged_);
  const double e = mean_abs_path(transform_, mean);
  while (next_ < checkpoints_.size() && work >= checkpoints_[next_]) {
    rows_.push_back({checkpoints_[next_], e});
    ++next_;
  }
}

MixingReport average_curves(const std::string& label, const std::vector<std::vector<MixingRow>>& curves) {
  MixingReport report;
  report.label = label;
  report.seeds = curves.size();
  if (curves.empty()) return report;
  std::size_t len = curves.front().size();
  for (const auto& c : curves) len = std::min(len, c.size());
  for (std::size_t i = 0; i < len; ++i) {
    MixingBandRow row;
    row.n = curves.front()[i].n;
    row.min = row.max = curves.front()[i].e;
    double sum = 0.0;
    for (const auto& c : curves) {
      if (c[i].n != row.n) throw ValidationError("average_curves: curves have different n grids");
      sum += c[i].e;
      row.min = std::min(row.min, c[i].e);
      row.max = std::max(row.max, c[i].e);
    }
    row.mean = sum / static_cast<double>(curves.size());
    report.rows.push_back(row);
  }
  return report;
}

PhasePoint interpolant(std::span<const PhasePoint> states, double delta, double t) {
  if (states.empty()) throw ValidationError("interpolant of an empty trace");
  if (!(delta > 0.0)) throw ValidationError("interpolant: delta must be positive");
  const double t_max = delta * static_cast<double>(states.size() - 1);
  if (!(t >= 0.0) || t > t_max) throw ValidationError("interpolant: t outside [0, N_M delta]");
  std::size_t k = static_cast<std::size_t>(std::floor(t / delta));
  if (k >= states.size() - 1) return states.back();
  const double tk = static_cast<double>(k) * delta;
  if (t == tk) return states[k];
  const double a = (t - tk) / delta;
  const double b = (tk + delta - t) / delta;
  const PhasePoint& lo = states[k];
  const PhasePoint& hi = states[k + 1];
  PhasePoint out{Vector(lo.size()), Vector(lo.size())};
  for (std::size_t j = 0; j < lo.size(); ++j) {
    out.q[j] = a * hi.q[j] + b * lo.q[j];
    out.v[j] = a * hi.v[j] + b * lo.v[j];
  }
  return out;
}

const std::vector<std::string>& diffusion_functionals() {
  static const std::vector<std::string> names = {"q1", "q_norm_sq", "v_norm_sq", "psi"};
  return names;
}

std::vector<double> evaluate_functionals(const TargetModel& target, const PhasePoint& x) {
  double qq = 0.0, vv = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    qq += x.q[j] * x.q[j];
    vv += x.v[j] * x.v[j];
  }
  return {x.q[0], qq, vv, target.psi(x.q)};
}

DiffusionLimitReport diffusion_limit_study(const TargetModel& target, const DiffusionLimitOptions& options) {
  if (options.trajectories == 0) throw ValidationError("diffusion_limit_study: zero trajectories requested");
  if (options.ladder.empty()) throw ValidationError("diffusion_limit_study: empty delta ladder");
  for (std::size_t i = 0; i < options.ladder.size(); ++i) {
    if (!(options.ladder[i] > 0.0)) throw ValidationError("delta ladder entries must be positive");
    if (i > 0 && !(options.ladder[i] < options.ladder[i - 1]))
      throw ValidationError("delta ladder must be strictly decreasing");
  }
  if (!(options.t_final > 0.0)) throw ValidationError("diffusion_limit_study: t_final must be positive");

  const std::size_t n = target.size();
  const PhasePoint x0 = options.x0.value_or(PhasePoint{Vector(n, 0.0), Vector(n, 0.0)});
  const std::size_t nf = diffusion_functionals().size();
  const Rng base(options.seed);

  DiffusionLimitReport report;
  report.functionals = diffusion_functionals();
  report.trajectories = options.trajectories;
  report.sde_trajectories = options.sde_trajectories ? options.sde_trajectories : options.trajectories;
  report.sde_dt = options.sde_dt;

  // SDE reference with Gamma_1 = 0, Gamma_2 = I.
  SdeParams sde;
  sde.dt = options.sde_dt;
  sde.t_final = options.t_final;
  sde.scheme = SdeScheme::OuSplitting;
  const SdeStepper stepper(target, sde);
  const std::size_t sde_steps = sde.step_count();
  std::vector<std::vector<double>> sde_values(nf, std::vector<double>(report.sde_trajectories));
  const Rng sde_base = base.split(0);
  parallel_for(report.sde_trajectories, [&](std::size_t i) {
    Rng rng = sde_base.split(i);
    PhasePoint x = x0;
    for (std::size_t k = 0; k < sde_steps; ++k) stepper.step(x, rng);
    const auto f = evaluate_functionals(target, x);
    for (std::size_t a = 0; a < nf; ++a) sde_values[a][i] = f[a];
  });
  for (std::size_t a = 0; a < nf; ++a) report.sde.push_back(iid_mean(sde_values[a]));

  for (std::size_t level = 0; level < options.ladder.size(); ++level) {
    const double delta = options.ladder[level];
    const SolHmcKernel kernel(target, IntegratorParams::from_delta(delta, 1, delta));
    const std::size_t steps = static_cast<std::size_t>(std::llround(options.t_final / delta));
    std::vector<std::vector<double>> values(nf, std::vector<double>(options.trajectories));
    std::vector<std::size_t> accepted(options.trajectories, 0);
    const Rng level_base = base.split(level + 1);
    parallel_for(options.trajectories, [&](std::size_t i) {
      Rng rng = level_base.split(i);
      PhasePoint x = x0;
      TargetEval eval = target.evaluate(x.q);
      for (std::size_t k = 0; k < steps; ++k) {
        StepResult r = kernel.step(x, rng, &eval);
        accepted[i] += r.accepted ? 1 : 0;
        x = std::move(r.x);
        eval = std::move(r.eval);
      }
      const auto f = evaluate_functionals(target, x);
      for (std::size_t a = 0; a < nf; ++a) values[a][i] = f[a];
    });

    DiffusionLimitLevel lvl;
    lvl.delta = delta;
    lvl.steps = steps;
    std::size_t acc = 0;
    for (auto a : accepted) acc += a;
    lvl.acceptance = steps ? static_cast<double>(acc) / static_cast<double>(steps * options.trajectories) : 1.0;
    for (std::size_t a = 0; a < nf; ++a) {
      FunctionalEstimate est;
      est.chain = iid_mean(values[a]);
      est.gap = est.chain.mean - report.sde[a].mean;
      est.gap_se = std::hypot(est.chain.se, report.sde[a].se);
      lvl.estimates.push_back(est);
    }
    report.levels.push_back(std::move(lvl));
  }

  report.converged.assign(nf, std::nullopt);
  if (report.levels.size() >= 2) {
    for (std::size_t a = 0; a < nf; ++a) {
      bool ok = true;
      for (std::size_t k = 0; k + 1 < report.levels.size(); ++k) {
        const auto& coarse = report.levels[k].estimates[a];
        const auto& fine = report.levels[k + 1].estimates[a];
        if (std::abs(fine.gap) > std::abs(coarse.gap) + 3.0 * std::hypot(coarse.gap_se, fine.gap_se)) ok = false;
      }
      const auto& finest = report.levels.back().estimates[a];
      if (std::abs(finest.gap) > 3.0 * finest.gap_se) ok = false;
      report.converged[a] = ok;
    }
  }
  return report;
}

ScalingReport acceptance_scaling_study(const TargetModel& target, const ScalingOptions& options) {
  if (options.ladder.empty()) throw ValidationError("acceptance_scaling_study: empty delta ladder");
  if (options.steps == 0) throw ValidationError("acceptance_scaling_study: steps must be positive");
  if (!(options.burn_in_fraction >= 0.0 && options.burn_in_fraction < 1.0))
    throw ValidationError("burn_in_fraction must lie in [0, 1)");
  ScalingReport report;
  report.levels.resize(options.ladder.size());
  const Rng base(options.seed);
  parallel_for(options.ladder.size(), [&](std::size_t level) {
    const double delta = options.ladder[level];
    if (!(delta > 0.0)) throw ValidationError("delta ladder entries must be positive");
    const SolHmcKernel kernel(target, IntegratorParams::from_delta(delta, 1, delta));
    Rng rng = base.split(level);
    PhasePoint x{target.prior().sample(rng), target.prior().sample(rng)};
    TargetEval eval = target.evaluate(x.q);
    const auto burn = static_cast<std::size_t>(options.burn_in_fraction * static_cast<double>(options.steps));
    std::vector<double> rejection;
    rejection.reserve(options.steps);
    for (std::size_t k = 0; k < burn + options.steps; ++k) {
      StepResult r = kernel.step(x, rng, &eval);
      if (k >= burn) rejection.push_back(1.0 - r.alpha);
      x = std::move(r.x);
      eval = std::move(r.eval);
    }
    report.levels[level] = {delta, batch_mean(rejection)};
  });
  std::vector<double> xs, ys;
  for (const auto& l : report.levels) {
    xs.push_back(l.delta);
    ys.push_back(l.rejection.mean);
  }
  report.slope = fit_loglog_slope(xs, ys);
  return report;
}

namespace {

std::vector<ModeVariance> summarize_modes(const TargetModel& target,
                                          const std::vector<std::vector<double>>& series) {
  std::vector<ModeVariance> out;
  for (std::size_t j = 0; j < series.size(); ++j) {
    const auto& xs = series[j];
    const MeanEstimate first = iid_mean(xs);
    std::vector<double> sq(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - first.mean) * (xs[i] - first.mean);
    const MeanEstimate second = batch_mean(sq);
    const double l = target.prior().eigenvalue(j);
    ModeVariance mv;
    mv.mode = j + 1;
    mv.lambda_sq = l * l;
    mv.variance = second.mean;
    mv.ratio = second.mean / mv.lambda_sq;
    mv.ratio_se = second.se / mv.lambda_sq;
    out.push_back(mv);
  }
  return out;
}

}  // namespace

std::vector<ModeVariance> chain_mode_variances(const TargetModel& target, const SamplerConfig& config,
                                               std::size_t modes, double burn_in_fraction) {
  modes = std::min(modes, target.size());
  const auto burn = static_cast<std::size_t>(burn_in_fraction * static_cast<double>(config.iterations));
  std::vector<std::vector<double>> series(modes);
  for (auto& s : series) s.reserve(config.iterations - burn);
  Rng rng(config.seed);
  SamplerConfig cfg = config;
  cfg.observables.clear();
  const ChainTrace trace = run_chain(target, cfg, rng, std::nullopt, [&](std::size_t k, const StepResult& r) {
    if (k <= burn) return;
    for (std::size_t j = 0; j < modes; ++j) series[j].push_back(r.x.q[j]);
  });
  if (trace.aborted) throw NumericalError(trace.abort_message);
  return summarize_modes(target, series);
}

std::vector<ModeVariance> sde_mode_variances(const TargetModel& target, const SdeParams& params,
                                             std::size_t modes, std::uint64_t seed, double burn_in_fraction) {
  modes = std::min(modes, target.size());
  Rng rng(seed);
  const PhasePoint x0{target.prior().sample(rng), target.prior().sample(rng)};
  const std::size_t steps = params.step_count();
  const auto burn = static_cast<std::size_t>(burn_in_fraction * static_cast<double>(steps));
  std::vector<std::vector<double>> series(modes);
  for (auto& s : series) s.reserve(steps - burn);
  std::size_t k = 0;
  SdeParams p = params;
  p.snapshot_interval = 0.0;
  simulate(x0, target, p, rng, [&](double, const PhasePoint& x) {
    if (++k <= burn) return;
    for (std::size_t j = 0; j < modes; ++j) series[j].push_back(x.q[j]);
  });
  return summarize_modes(target, series);
}

}  // namespace solhmc
