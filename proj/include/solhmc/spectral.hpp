#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "solhmc/rng.hpp"

namespace solhmc {

using Vector = std::vector<double>;

/// Eigenvalues lambda_j = T / (j pi), j = 1..N, of the unit Brownian bridge
/// covariance on (0, T) (square roots of the inverse Dirichlet Laplacian spectrum).
Vector bridge_eigenvalues(double length, std::size_t modes);

/// Truncated Gaussian reference measure N(0, C) in the eigenbasis of C.
///
/// C phi_j = lambda_j^2 phi_j. Coefficient vectors are expressed in this basis and
/// the physical realisation is the Dirichlet sine basis phi_j(t) = sqrt(2/T) sin(j pi t / T).
/// Immutable after construction.
class SpectralPrior {
 public:
  /// Throws ValidationError unless lambda is positive and strictly decreasing,
  /// kappa > 1/2 and 0 <= s < kappa - 1/2.
  SpectralPrior(double length, Vector eigenvalues, double kappa, double sobolev_index = 0.0);

  /// Brownian bridge prior on (0, length); kappa = 1.
  static SpectralPrior brownian_bridge(double length, std::size_t modes, double sobolev_index = 0.0);

  std::size_t size() const { return lambda_.size(); }
  double length() const { return length_; }
  double kappa() const { return kappa_; }
  double sobolev_index() const { return sobolev_index_; }
  std::span<const double> eigenvalues() const { return lambda_; }
  double eigenvalue(std::size_t j) const { return lambda_[j]; }

  /// q_j = lambda_j rho_j with rho_j iid standard normal.
  Vector sample(Rng& rng) const;
  /// Same map with the standard normal draws supplied by the caller.
  Vector sample_from(std::span<const double> rho) const;

  Vector apply_c(std::span<const double> w) const;
  Vector apply_c_sqrt(std::span<const double> w) const;
  /// <w, C w> without forming C w.
  double c_norm_sq(std::span<const double> w) const;
  /// <w, C^{-1} w>; only meaningful at finite N.
  double precision_norm_sq(std::span<const double> w) const;

  /// (sum_j j^{2r} w_j^2)^{1/2}
  double sobolev_norm(std::span<const double> w, double r) const;
  /// sum_j lambda_j^2 j^{2s}: trace of C in H^s.
  double trace_s() const;

  void check_size(std::span<const double> w, const char* what) const;

 private:
  double length_;
  Vector lambda_;
  double kappa_;
  double sobolev_index_;
};

/// Position/velocity coefficient vectors.
struct PhasePoint {
  Vector q;
  Vector v;

  std::size_t size() const { return q.size(); }
  bool finite() const;
  friend bool operator==(const PhasePoint&, const PhasePoint&) = default;
};

/// Synthesis/analysis between sine coefficients and values on the uniform interior
/// grid t_m = m T / M, m = 1..M-1. Backed by a type-I discrete sine transform.
/// Thread-safe after construction.
class SineTransform {
 public:
  /// Throws ValidationError if grid < 2 * modes (aliasing risk for analyze).
  SineTransform(std::size_t modes, std::size_t grid, double length);
  ~SineTransform();
  SineTransform(const SineTransform&) = delete;
  SineTransform& operator=(const SineTransform&) = delete;

  std::size_t modes() const { return modes_; }
  std::size_t grid() const { return grid_; }
  std::size_t interior_points() const { return grid_ - 1; }
  double length() const { return length_; }
  double spacing() const { return length_ / static_cast<double>(grid_); }

  /// Path values at the M-1 interior grid points.
  void synthesize(std::span<const double> q, std::span<double> path) const;
  Vector synthesize(std::span<const double> q) const;

  /// Quadrature projection (T/M) sum_m path_m phi_j(t_m).
  void analyze(std::span<const double> path, std::span<double> q) const;
  Vector analyze(std::span<const double> path) const;

  /// phi_j(t) evaluated at an arbitrary point; j is 1-based.
  double basis(std::size_t j, double t) const;

 private:
  struct Plan;
  std::size_t modes_;
  std::size_t grid_;
  double length_;
  double scale_;
  std::unique_ptr<Plan> plan_;
};

}  // namespace solhmc
