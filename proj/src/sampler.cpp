#include "solhmc/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "solhmc/errors.hpp"

namespace solhmc {

const std::vector<std::string>& known_observables() {
  static const std::vector<std::string> names = {"q1", "q_norm_sq", "v_norm_sq", "psi", "path_mid"};
  return names;
}

void SamplerConfig::validate() const {
  if (modes == 0) throw ValidationError("modes must be at least 1");
  if (grid < 2 * modes) throw ValidationError("grid must be at least 2 * modes");
  if (!(length > 0.0)) throw ValidationError("length must be positive");
  if (thinning == 0) throw ValidationError("thinning must be at least 1");
  if (start != "prior" && start != "well") throw ValidationError("start must be \"prior\" or \"well\"");
  integrator.validate(modes);
  const auto& known = known_observables();
  for (const auto& name : observables)
    if (std::find(known.begin(), known.end(), name) == known.end())
      throw ValidationError("unknown observable '" + name + "'");
}

Vector well_state(const TargetModel& target) {
  return target.transform().analyze(Vector(target.transform().interior_points(), 1.0));
}

SamplerConfig preset(const std::string& name, const PresetOverrides& o) {
  SamplerConfig cfg;
  cfg.preset = name;
  if (name == "hmc" || name == "mala") {
    if (o.iota && *o.iota != 1.0) throw ValidationError(name + " preset requires iota = 1");
    if (o.delta) throw ValidationError(name + " preset does not take delta (full refresh)");
    const double h = o.h.value_or(0.02);
    int n_steps = 1;
    if (name == "hmc") {
      n_steps = o.n_steps.value_or(static_cast<int>(std::lround(1.0 / h)));
    } else if (o.n_steps && *o.n_steps != 1) {
      throw ValidationError("mala preset requires n_steps = 1");
    }
    cfg.integrator = IntegratorParams::from_iota(h, std::max(n_steps, 1), 1.0);
  } else if (name == "sol-hmc") {
    if (o.iota && o.delta) throw ValidationError("iota and delta are mutually exclusive");
    const double h = o.h.value_or(0.02);
    const int n_steps = o.n_steps.value_or(50);
    cfg.integrator = o.delta ? IntegratorParams::from_delta(h, n_steps, *o.delta)
                             : IntegratorParams::from_iota(h, n_steps, o.iota.value_or(std::sqrt(0.5)));
  } else if (name == "diffusion-limit") {
    if (o.iota || (o.n_steps && *o.n_steps != 1))
      throw ValidationError("diffusion-limit preset fixes delta = h and n_steps = 1");
    const double h = o.h.value_or(o.delta.value_or(0.05));
    if (o.delta && *o.delta != h) throw ValidationError("diffusion-limit preset requires delta = h");
    cfg.integrator = IntegratorParams::from_delta(h, 1, h);
  } else {
    throw ValidationError("unknown preset '" + name + "'");
  }
  return cfg;
}

SolHmcKernel::SolHmcKernel(const TargetModel& target, IntegratorParams params)
    : target_(target), params_(std::move(params)), ou_(params_, target.prior()) {
  params_.validate(target.size());
}

StepResult SolHmcKernel::step(const PhasePoint& x, Rng& rng, const TargetEval* eval_at_x,
                              const AcceptRule& rule) const {
  int n_steps = params_.n_steps;
  if (params_.random_steps) n_steps = rng.uniform_int(params_.random_steps->first, params_.random_steps->second);

  PhasePoint refreshed = theta0(x, ou_, rng);
  TargetEval start = eval_at_x ? *eval_at_x : target_.evaluate(x.q);
  FlowResult flow = chi_multi(refreshed, target_, params_.h, n_steps, &start);

  if (!std::isfinite(flow.delta_h) || !flow.x.finite())
    throw NumericalError("non-finite energy difference (integrator blow-up, h=" +
                         std::to_string(params_.h) + ")");

  const double alpha = flow.delta_h >= 0.0 ? 1.0 : std::exp(flow.delta_h);
  const double u = rng.uniform();
  const bool accept = rule ? rule(alpha, u) : u < alpha;

  StepResult out;
  out.delta_h = flow.delta_h;
  out.alpha = alpha;
  out.n_steps = n_steps;
  out.accepted = accept;
  if (accept) {
    out.x = std::move(flow.x);
    out.eval = std::move(flow.end);
  } else {
    for (double& v : refreshed.v) v = -v;
    out.x = std::move(refreshed);
    out.eval = std::move(start);
  }
  return out;
}

StepResult sol_hmc_step(const PhasePoint& x, const TargetModel& target, const IntegratorParams& params,
                        Rng& rng, const AcceptRule& rule) {
  return SolHmcKernel(target, params).step(x, rng, nullptr, rule);
}

TargetModel make_target(const SamplerConfig& config) {
  return make_target(config.target_label, SpectralPrior::brownian_bridge(config.length, config.modes),
                     config.grid);
}

ObservableSet::ObservableSet(const TargetModel& target, std::vector<std::string> names)
    : names_(std::move(names)), midpoint_basis_(target.size()) {
  const auto& known = known_observables();
  for (const auto& n : names_)
    if (std::find(known.begin(), known.end(), n) == known.end())
      throw ValidationError("unknown observable '" + n + "'");
  const double mid = 0.5 * target.prior().length();
  for (std::size_t j = 0; j < target.size(); ++j) midpoint_basis_[j] = target.transform().basis(j + 1, mid);
}

std::vector<double> ObservableSet::evaluate(const PhasePoint& x, const TargetEval& eval) const {
  std::vector<double> out;
  out.reserve(names_.size());
  for (const auto& name : names_) {
    if (name == "q1") {
      out.push_back(x.q[0]);
    } else if (name == "q_norm_sq") {
      double a = 0.0;
      for (double y : x.q) a += y * y;
      out.push_back(a);
    } else if (name == "v_norm_sq") {
      double a = 0.0;
      for (double y : x.v) a += y * y;
      out.push_back(a);
    } else if (name == "psi") {
      out.push_back(eval.psi);
    } else {  // path_mid
      double a = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j) a += midpoint_basis_[j] * x.q[j];
      out.push_back(a);
    }
  }
  return out;
}

ChainTrace run_chain(const TargetModel& target, const SamplerConfig& config, Rng& rng,
                     const std::optional<PhasePoint>& initial, const ChainObserver& observer) {
  config.validate();
  if (target.size() != config.modes) throw ValidationError("target size does not match config.modes");

  ChainTrace trace;
  trace.config = config;
  trace.observable_names = config.observables;
  trace.records.reserve(config.iterations);

  const SolHmcKernel kernel(target, config.integrator);
  const ObservableSet observables(target, config.observables);

  PhasePoint x;
  if (initial) {
    target.prior().check_size(initial->q, "initial q");
    target.prior().check_size(initial->v, "initial v");
    x = *initial;
  } else {
    x.q = config.start == "well" ? well_state(target) : target.prior().sample(rng);
    x.v = target.prior().sample(rng);
  }
  TargetEval eval = target.evaluate(x.q);

  for (std::size_t k = 1; k <= config.iterations; ++k) {
    StepResult r;
    try {
      r = kernel.step(x, rng, &eval);
    } catch (const NumericalError& e) {
      trace.aborted = true;
      trace.abort_message = "step " + std::to_string(k) + ": " + e.what();
      break;
    }
    trace.accepted += r.accepted ? 1 : 0;
    trace.work += static_cast<std::size_t>(r.n_steps);
    trace.records.push_back({r.accepted, r.delta_h, r.alpha, r.n_steps, observables.evaluate(r.x, r.eval)});
    if (config.store_snapshots && k % config.thinning == 0) trace.snapshots.push_back({k, r.x});
    if (observer) observer(k, r);
    x = std::move(r.x);
    eval = std::move(r.eval);
  }
  trace.final_state = std::move(x);
  return trace;
}

}  // namespace solhmc
