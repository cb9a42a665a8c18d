#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "solhmc/spectral.hpp"

namespace solhmc {

/// Pointwise potential V with derivative V'. A null potential means Psi == 0.
struct Potential {
  std::function<double(double)> value;
  std::function<double(double)> derivative;

  bool is_zero() const { return !value; }

  static Potential zero() { return {}; }
  /// V(u) = (u^2 - 1)^2
  static Potential double_well();
};

/// Psi and its H-gradient at a single point.
struct TargetEval {
  double psi = 0.0;
  Vector grad;  ///< coefficients of grad Psi in the eigenbasis
};

/// Change of measure Psi(q) = 1/2 int_0^T V(q(t)) dt relative to the spectral prior,
/// evaluated by the trapezoid rule on a uniform grid with zero endpoint values.
///
/// The gradient is the exact gradient of this discrete Psi: 1/2 V'(path) projected back
/// onto the sine basis with the same quadrature weights.
class TargetModel {
 public:
  TargetModel(SpectralPrior prior, Potential potential, std::size_t grid, std::string label);

  const SpectralPrior& prior() const { return prior_; }
  const SineTransform& transform() const { return *transform_; }
  const std::string& label() const { return label_; }
  std::size_t size() const { return prior_.size(); }
  std::size_t grid() const { return grid_; }
  bool is_gaussian() const { return potential_.is_zero(); }

  double psi(std::span<const double> q) const;
  Vector grad_psi(std::span<const double> q) const;
  /// Psi and grad Psi sharing one synthesis.
  TargetEval evaluate(std::span<const double> q) const;

  Vector c_grad_psi(std::span<const double> q) const;
  /// F(q) = q + C grad Psi(q)
  Vector force(std::span<const double> q) const;

 private:
  SpectralPrior prior_;
  Potential potential_;
  std::size_t grid_;
  std::string label_;
  std::shared_ptr<const SineTransform> transform_;
};

/// Registered target labels: "gaussian" and "double-well".
TargetModel make_target(const std::string& label, SpectralPrior prior, std::size_t grid);
std::vector<std::string> target_labels();

}  // namespace solhmc
