#include "solhmc/sde.hpp"

#include <cmath>

#include "solhmc/errors.hpp"

namespace solhmc {

SdeScheme parse_sde_scheme(const std::string& name) {
  if (name == "ou-splitting") return SdeScheme::OuSplitting;
  if (name == "euler-maruyama") return SdeScheme::EulerMaruyama;
  throw ValidationError("unknown SDE scheme '" + name + "'");
}

std::string to_string(SdeScheme scheme) {
  return scheme == SdeScheme::OuSplitting ? "ou-splitting" : "euler-maruyama";
}

std::size_t SdeParams::step_count() const {
  if (t_final <= 0.0) return 0;
  return static_cast<std::size_t>(std::llround(t_final / dt));
}

void SdeParams::validate(std::size_t modes) const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be positive");
  if (!(t_final >= 0.0) || !std::isfinite(t_final)) throw ValidationError("t_final must be nonnegative");
  if (t_final > 0.0 && dt > t_final) throw ValidationError("dt must not exceed t_final");
  if (!(snapshot_interval >= 0.0)) throw ValidationError("snapshot_interval must be nonnegative");
  for (const Vector* g : {&gamma1, &gamma2}) {
    if (g->empty()) continue;
    if (g->size() != modes) throw ValidationError("gamma vector length does not match modes");
    for (double x : *g)
      if (!(x >= 0.0) || !std::isfinite(x)) throw ValidationError("gamma entries must be finite and >= 0");
  }
}

std::array<double, 4> linear_flow(double g1, double g2, double t) {
  // A = s I + B with B^2 = mu2 I, so exp(A t) = e^{s t} (c I + k B).
  const double s = -0.5 * (g1 + g2);
  const double b11 = -g1 - s;  // = (g2 - g1) / 2
  const double mu2 = b11 * b11 - 1.0;
  double c = 1.0;
  double k = t;
  if (mu2 > 1e-12) {
    const double mu = std::sqrt(mu2);
    c = std::cosh(mu * t);
    k = std::sinh(mu * t) / mu;
  } else if (mu2 < -1e-12) {
    const double w = std::sqrt(-mu2);
    c = std::cos(w * t);
    k = std::sin(w * t) / w;
  } else {
    c = 1.0 + 0.5 * mu2 * t * t;
    k = t * (1.0 + mu2 * t * t / 6.0);
  }
  const double e = std::exp(s * t);
  return {e * (c + k * b11), e * k, -e * k, e * (c - k * b11)};
}

SdeStepper::SdeStepper(const TargetModel& target, SdeParams params)
    : target_(target), params_(std::move(params)) {
  const std::size_t n = target.size();
  params_.validate(n);
  gamma1_ = params_.gamma1.empty() ? Vector(n, 0.0) : params_.gamma1;
  gamma2_ = params_.gamma2.empty() ? Vector(n, 1.0) : params_.gamma2;
  modes_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto f = linear_flow(gamma1_[j], gamma2_[j], 0.5 * params_.dt);
    // stationary covariance is lambda^2 I, hence Sigma(t) = lambda^2 (I - E E^T)
    const double l2 = target.prior().eigenvalue(j) * target.prior().eigenvalue(j);
    const double s11 = l2 * (1.0 - (f[0] * f[0] + f[1] * f[1]));
    const double s12 = -l2 * (f[0] * f[2] + f[1] * f[3]);
    const double s22 = l2 * (1.0 - (f[2] * f[2] + f[3] * f[3]));
    const double c11 = std::sqrt(std::max(s11, 0.0));
    const double c21 = c11 > 0.0 ? s12 / c11 : 0.0;
    const double c22 = std::sqrt(std::max(s22 - c21 * c21, 0.0));
    modes_[j] = {f, {c11, c21, c22}};
  }
}

void SdeStepper::linear_half_step(PhasePoint& x, Rng& rng) const {
  for (std::size_t j = 0; j < x.size(); ++j) {
    const auto& m = modes_[j];
    const double q = x.q[j];
    const double v = x.v[j];
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    x.q[j] = m.flow[0] * q + m.flow[1] * v + m.chol[0] * z1;
    x.v[j] = m.flow[2] * q + m.flow[3] * v + m.chol[1] * z1 + m.chol[2] * z2;
  }
}

void SdeStepper::step(PhasePoint& x, Rng& rng) const {
  const double dt = params_.dt;
  const SpectralPrior& prior = target_.prior();
  if (params_.scheme == SdeScheme::OuSplitting) {
    linear_half_step(x, rng);
    if (!target_.is_gaussian()) {
      const Vector cg = target_.c_grad_psi(x.q);
      for (std::size_t j = 0; j < x.size(); ++j) {
        x.q[j] -= dt * gamma1_[j] * cg[j];
        x.v[j] -= dt * cg[j];
      }
    }
    linear_half_step(x, rng);
  } else {
    const Vector f = target_.force(x.q);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double l = prior.eigenvalue(j);
      const double q = x.q[j];
      const double v = x.v[j];
      x.q[j] = q + (v - gamma1_[j] * f[j]) * dt + l * std::sqrt(2.0 * gamma1_[j] * dt) * rng.normal();
      x.v[j] = v + (-f[j] - gamma2_[j] * v) * dt + l * std::sqrt(2.0 * gamma2_[j] * dt) * rng.normal();
    }
  }
  if (!x.finite()) throw NumericalError("SDE state became non-finite (dt=" + std::to_string(dt) + ")");
}

PhasePoint sde_step(const PhasePoint& x, const TargetModel& target, const SdeParams& params, Rng& rng) {
  PhasePoint out = x;
  SdeStepper(target, params).step(out, rng);
  return out;
}

SdeTrajectory simulate(const PhasePoint& x0, const TargetModel& target, const SdeParams& params, Rng& rng,
                       const SdeObserver& observer) {
  target.prior().check_size(x0.q, "simulate q");
  target.prior().check_size(x0.v, "simulate v");
  const SdeStepper stepper(target, params);
  const std::size_t steps = params.step_count();
  const std::size_t every =
      params.snapshot_interval > 0.0
          ? std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(params.snapshot_interval / params.dt)))
          : 0;

  SdeTrajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(x0);
  PhasePoint x = x0;
  for (std::size_t k = 1; k <= steps; ++k) {
    stepper.step(x, rng);
    const double t = static_cast<double>(k) * params.dt;
    if (observer) observer(t, x);
    if ((every > 0 && k % every == 0) || (k == steps && (every == 0 || k % every != 0))) {
      traj.times.push_back(t);
      traj.states.push_back(x);
    }
  }
  return traj;
}

}  // namespace solhmc
