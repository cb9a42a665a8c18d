#include "solhmc/target.hpp"

#include "solhmc/errors.hpp"

namespace solhmc {

Potential Potential::double_well() {
  return {[](double u) {
            const double w = u * u - 1.0;
            return w * w;
          },
          [](double u) { return 4.0 * u * (u * u - 1.0); }};
}

TargetModel::TargetModel(SpectralPrior prior, Potential potential, std::size_t grid, std::string label)
    : prior_(std::move(prior)),
      potential_(std::move(potential)),
      grid_(grid),
      label_(std::move(label)),
      transform_(std::make_shared<SineTransform>(prior_.size(), grid, prior_.length())) {
  if (static_cast<bool>(potential_.value) != static_cast<bool>(potential_.derivative))
    throw ValidationError("potential needs both V and V'");
}

double TargetModel::psi(std::span<const double> q) const {
  prior_.check_size(q, "psi");
  if (is_gaussian()) return 0.0;
  const Vector path = transform_->synthesize(q);
  const double v0 = potential_.value(0.0);
  double acc = v0;  // two half-weighted endpoints, path(0) = path(T) = 0
  for (double u : path) acc += potential_.value(u);
  return 0.5 * transform_->spacing() * acc;
}

TargetEval TargetModel::evaluate(std::span<const double> q) const {
  prior_.check_size(q, "evaluate");
  TargetEval out;
  out.grad.assign(q.size(), 0.0);
  if (is_gaussian()) return out;
  Vector path = transform_->synthesize(q);
  double acc = potential_.value(0.0);
  for (double& u : path) {
    acc += potential_.value(u);
    u = 0.5 * potential_.derivative(u);
  }
  out.psi = 0.5 * transform_->spacing() * acc;
  transform_->analyze(path, out.grad);
  return out;
}

Vector TargetModel::grad_psi(std::span<const double> q) const { return evaluate(q).grad; }

Vector TargetModel::c_grad_psi(std::span<const double> q) const {
  return prior_.apply_c(grad_psi(q));
}

Vector TargetModel::force(std::span<const double> q) const {
  Vector f = c_grad_psi(q);
  for (std::size_t j = 0; j < f.size(); ++j) f[j] += q[j];
  return f;
}

std::vector<std::string> target_labels() { return {"gaussian", "double-well"}; }

TargetModel make_target(const std::string& label, SpectralPrior prior, std::size_t grid) {
  if (label == "gaussian") return TargetModel(std::move(prior), Potential::zero(), grid, label);
  if (label == "double-well")
    return TargetModel(std::move(prior), Potential::double_well(), grid, label);
  throw ValidationError("unknown target label '" + label + "'");
}

}  // namespace solhmc
