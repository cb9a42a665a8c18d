#include "solhmc/integrators.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>

#include "solhmc/errors.hpp"

namespace solhmc {

IntegratorParams IntegratorParams::from_iota(double h, int n_steps, double iota) {
  if (!(iota >= 0.0 && iota <= 1.0)) throw ValidationError("iota must lie in [0, 1]");
  IntegratorParams p;
  p.h = h;
  p.n_steps = n_steps;
  p.delta = iota >= 1.0 ? std::numeric_limits<double>::infinity() : -0.5 * std::log1p(-iota * iota);
  return p;
}

IntegratorParams IntegratorParams::from_delta(double h, int n_steps, double delta, Vector gamma2) {
  IntegratorParams p;
  p.h = h;
  p.n_steps = n_steps;
  p.delta = delta;
  p.gamma2 = std::move(gamma2);
  return p;
}

double IntegratorParams::iota() const {
  if (std::isinf(delta)) return 1.0;
  return std::sqrt(-std::expm1(-2.0 * delta));
}

void IntegratorParams::validate(std::size_t modes) const {
  if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("h must be positive and finite");
  if (n_steps < 1) throw ValidationError("n_steps must be at least 1");
  if (random_steps && (random_steps->first < 1 || random_steps->second < random_steps->first))
    throw ValidationError("random n_steps range must satisfy 1 <= min <= max");
  if (!(delta >= 0.0)) throw ValidationError("delta must be nonnegative (infinity allowed)");
  if (!gamma2.empty()) {
    if (gamma2.size() != modes)
      throw ValidationError("gamma2 has " + std::to_string(gamma2.size()) + " entries, expected " +
                            std::to_string(modes));
    for (double g : gamma2)
      if (!(g > 0.0) || !std::isfinite(g))
        throw ValidationError("gamma2 entries must be positive and finite");
  }
}

OuCoefficients::OuCoefficients(const IntegratorParams& params, const SpectralPrior& prior)
    : decay(prior.size()), noise(prior.size()) {
  for (std::size_t j = 0; j < prior.size(); ++j) {
    const double g = params.gamma2.empty() ? 1.0 : params.gamma2[j];
    const double rate = params.delta * g;
    decay[j] = std::isinf(rate) ? 0.0 : std::exp(-rate);
    // 1 - exp(-2 rate) without cancellation for small rate
    const double var = std::isinf(rate) ? 1.0 : -std::expm1(-2.0 * rate);
    noise[j] = prior.eigenvalue(j) * std::sqrt(var);
  }
}

PhasePoint theta0(const PhasePoint& x, const OuCoefficients& ou, Rng& rng, Vector* xi_out) {
  PhasePoint out{x.q, Vector(x.size())};
  if (xi_out) xi_out->resize(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double xi = ou.noise[j] * rng.normal();
    out.v[j] = ou.decay[j] * x.v[j] + xi;
    if (xi_out) (*xi_out)[j] = xi;
  }
  return out;
}

PhasePoint theta0(const PhasePoint& x, const IntegratorParams& params, const SpectralPrior& prior,
                  Rng& rng, Vector* xi_out) {
  return theta0(x, OuCoefficients(params, prior), rng, xi_out);
}

PhasePoint theta1(const PhasePoint& x, const TargetModel& target, double t) {
  PhasePoint out = x;
  if (target.is_gaussian()) return out;
  const Vector cg = target.c_grad_psi(x.q);
  for (std::size_t j = 0; j < out.size(); ++j) out.v[j] -= t * cg[j];
  return out;
}

PhasePoint rotate(const PhasePoint& x, double t) {
  const double c = std::cos(t);
  const double s = std::sin(t);
  PhasePoint out{Vector(x.size()), Vector(x.size())};
  for (std::size_t j = 0; j < x.size(); ++j) {
    out.q[j] = c * x.q[j] + s * x.v[j];
    out.v[j] = -s * x.q[j] + c * x.v[j];
  }
  return out;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) acc += a[j] * b[j];
  return acc;
}

// One chi^h step in place. `eval` holds Psi and grad Psi at x.q on entry and at the new
// position on exit. Returns H(in) - H(out):
//   Psi(q) - Psi(q*) + h/2 (<g, v> + <g*, v*>) + h^2/8 (|C^1/2 g*|^2 - |C^1/2 g|^2)
double chi_step(PhasePoint& x, const TargetModel& target, double h, TargetEval& eval) {
  const SpectralPrior& prior = target.prior();
  const std::size_t n = x.size();
  const bool gaussian = target.is_gaussian();
  const double half = 0.5 * h;

  double delta_h = 0.0;
  if (!gaussian) {
    delta_h += eval.psi + half * dot(eval.grad, x.v) - 0.125 * h * h * prior.c_norm_sq(eval.grad);
    for (std::size_t j = 0; j < n; ++j) {
      const double l = prior.eigenvalue(j);
      x.v[j] -= half * l * l * eval.grad[j];
    }
  }

  const double c = std::cos(h);
  const double s = std::sin(h);
  for (std::size_t j = 0; j < n; ++j) {
    const double q = x.q[j];
    const double v = x.v[j];
    x.q[j] = c * q + s * v;
    x.v[j] = -s * q + c * v;
  }

  if (!gaussian) {
    eval = target.evaluate(x.q);
    for (std::size_t j = 0; j < n; ++j) {
      const double l = prior.eigenvalue(j);
      x.v[j] -= half * l * l * eval.grad[j];
    }
    delta_h += -eval.psi + half * dot(eval.grad, x.v) + 0.125 * h * h * prior.c_norm_sq(eval.grad);
  }
  return delta_h;
}

}  // namespace

FlowResult chi(const PhasePoint& x, const TargetModel& target, double h) {
  return chi_multi(x, target, h, 1);
}

FlowResult chi_multi(const PhasePoint& x, const TargetModel& target, double h, int n_steps,
                     const TargetEval* start_eval) {
  target.prior().check_size(x.q, "chi_multi q");
  target.prior().check_size(x.v, "chi_multi v");
  if (n_steps < 1) throw ValidationError("chi_multi: n_steps must be at least 1");
  FlowResult out{x, 0.0, start_eval ? *start_eval : target.evaluate(x.q)};
  for (int k = 0; k < n_steps; ++k) out.delta_h += chi_step(out.x, target, h, out.end);
  return out;
}

double hamiltonian_oracle(const PhasePoint& x, const TargetModel& target) {
  const SpectralPrior& prior = target.prior();
  return 0.5 * prior.precision_norm_sq(x.q) + 0.5 * prior.precision_norm_sq(x.v) + target.psi(x.q);
}

double jacobian_determinant(const PhasePoint& x, const TargetModel& target, double h, int n_steps) {
  const std::size_t n = x.size();
  if (n > 8) throw ValidationError("jacobian_determinant is limited to N <= 8");
  const std::size_t dim = 2 * n;

  auto flow = [&](const Eigen::VectorXd& z) {
    PhasePoint p{Vector(z.data(), z.data() + n), Vector(z.data() + n, z.data() + dim)};
    if (h == 0.0) return z;
    const FlowResult r = chi_multi(p, target, h, n_steps);
    Eigen::VectorXd out(dim);
    for (std::size_t j = 0; j < n; ++j) {
      out[j] = r.x.q[j];
      out[n + j] = r.x.v[j];
    }
    return out;
  };

  Eigen::VectorXd z(dim);
  for (std::size_t j = 0; j < n; ++j) {
    z[j] = x.q[j];
    z[n + j] = x.v[j];
  }
  Eigen::MatrixXd jac(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const double eps = 1e-6 * std::max(1.0, std::abs(z[i]));
    Eigen::VectorXd zp = z, zm = z;
    zp[i] += eps;
    zm[i] -= eps;
    jac.col(i) = (flow(zp) - flow(zm)) / (2.0 * eps);
  }
  return jac.determinant();
}

}  // namespace solhmc
