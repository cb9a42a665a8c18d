#include "solhmc/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "solhmc/errors.hpp"

namespace solhmc {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Vector bridge_eigenvalues(double length, std::size_t modes) {
  if (!(length > 0.0) || !std::isfinite(length))
    throw ValidationError("bridge length must be positive, got " + std::to_string(length));
  if (modes == 0) throw ValidationError("number of modes must be at least 1");
  Vector lambda(modes);
  for (std::size_t j = 0; j < modes; ++j)
    lambda[j] = length / (static_cast<double>(j + 1) * std::numbers::pi);
  return lambda;
}

SpectralPrior::SpectralPrior(double length, Vector eigenvalues, double kappa, double sobolev_index)
    : length_(length), lambda_(std::move(eigenvalues)), kappa_(kappa), sobolev_index_(sobolev_index) {
  if (!(length_ > 0.0) || !std::isfinite(length_))
    throw ValidationError("prior length must be positive");
  if (lambda_.empty()) throw ValidationError("prior needs at least one mode");
  for (std::size_t j = 0; j < lambda_.size(); ++j) {
    if (!(lambda_[j] > 0.0) || !std::isfinite(lambda_[j]))
      throw ValidationError("eigenvalue " + std::to_string(j + 1) + " is not positive");
    if (j > 0 && !(lambda_[j] < lambda_[j - 1]))
      throw ValidationError("eigenvalues must be strictly decreasing (mode " + std::to_string(j + 1) +
                            ")");
  }
  if (!(kappa_ > 0.5)) throw ValidationError("decay exponent kappa must exceed 1/2");
  if (!(sobolev_index_ >= 0.0) || !(sobolev_index_ < kappa_ - 0.5))
    throw ValidationError("sobolev index s must satisfy 0 <= s < kappa - 1/2");
}

SpectralPrior SpectralPrior::brownian_bridge(double length, std::size_t modes, double sobolev_index) {
  return SpectralPrior(length, bridge_eigenvalues(length, modes), 1.0, sobolev_index);
}

void SpectralPrior::check_size(std::span<const double> w, const char* what) const {
  if (w.size() != lambda_.size())
    throw ValidationError(std::string(what) + ": expected " + std::to_string(lambda_.size()) +
                          " coefficients, got " + std::to_string(w.size()));
}

Vector SpectralPrior::sample(Rng& rng) const {
  Vector q(lambda_.size());
  for (std::size_t j = 0; j < q.size(); ++j) q[j] = lambda_[j] * rng.normal();
  return q;
}

Vector SpectralPrior::sample_from(std::span<const double> rho) const {
  check_size(rho, "sample_from");
  Vector q(lambda_.size());
  for (std::size_t j = 0; j < q.size(); ++j) q[j] = lambda_[j] * rho[j];
  return q;
}

Vector SpectralPrior::apply_c(std::span<const double> w) const {
  check_size(w, "apply_c");
  Vector out(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) out[j] = lambda_[j] * lambda_[j] * w[j];
  return out;
}

Vector SpectralPrior::apply_c_sqrt(std::span<const double> w) const {
  check_size(w, "apply_c_sqrt");
  Vector out(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) out[j] = lambda_[j] * w[j];
  return out;
}

double SpectralPrior::c_norm_sq(std::span<const double> w) const {
  double acc = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double x = lambda_[j] * w[j];
    acc += x * x;
  }
  return acc;
}

double SpectralPrior::precision_norm_sq(std::span<const double> w) const {
  double acc = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double x = w[j] / lambda_[j];
    acc += x * x;
  }
  return acc;
}

double SpectralPrior::sobolev_norm(std::span<const double> w, double r) const {
  check_size(w, "sobolev_norm");
  double acc = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double x = (r == 0.0 ? 1.0 : std::pow(static_cast<double>(j + 1), r)) * w[j];
    acc += x * x;
  }
  return std::sqrt(acc);
}

double SpectralPrior::trace_s() const {
  double acc = 0.0;
  for (std::size_t j = 0; j < lambda_.size(); ++j)
    acc += lambda_[j] * lambda_[j] * std::pow(static_cast<double>(j + 1), 2.0 * sobolev_index_);
  return acc;
}

bool PhasePoint::finite() const {
  auto ok = [](const Vector& x) {
    return std::all_of(x.begin(), x.end(), [](double y) { return std::isfinite(y); });
  };
  return q.size() == v.size() && ok(q) && ok(v);
}

// RODFT00 of length n = M-1: Y_k = 2 sum_j X_j sin(pi (j+1)(k+1) / M).
struct SineTransform::Plan {
  fftw_plan plan = nullptr;
  std::size_t n = 0;
};

SineTransform::SineTransform(std::size_t modes, std::size_t grid, double length)
    : modes_(modes), grid_(grid), length_(length), plan_(std::make_unique<Plan>()) {
  if (modes == 0) throw ValidationError("sine transform needs at least one mode");
  if (grid < 2 * modes)
    throw ValidationError("grid size M=" + std::to_string(grid) + " is below 2N=" +
                          std::to_string(2 * modes) + " (aliasing risk)");
  if (!(length > 0.0)) throw ValidationError("sine transform length must be positive");
  scale_ = std::sqrt(2.0 / length);
  plan_->n = grid - 1;
  std::vector<double> in(plan_->n), out(plan_->n);
  std::lock_guard lock(planner_mutex());
  plan_->plan = fftw_plan_r2r_1d(static_cast<int>(plan_->n), in.data(), out.data(), FFTW_RODFT00,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (plan_->plan == nullptr) throw NumericalError("FFTW failed to create a DST-I plan");
}

SineTransform::~SineTransform() {
  if (plan_ && plan_->plan != nullptr) {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_->plan);
  }
}

void SineTransform::synthesize(std::span<const double> q, std::span<double> path) const {
  if (q.size() != modes_ || path.size() != plan_->n)
    throw ValidationError("synthesize: size mismatch");
  std::vector<double> in(plan_->n, 0.0);
  std::copy(q.begin(), q.end(), in.begin());
  fftw_execute_r2r(plan_->plan, in.data(), path.data());
  const double c = 0.5 * scale_;
  for (double& x : path) x *= c;
}

Vector SineTransform::synthesize(std::span<const double> q) const {
  Vector path(plan_->n);
  synthesize(q, path);
  return path;
}

void SineTransform::analyze(std::span<const double> path, std::span<double> q) const {
  if (q.size() != modes_ || path.size() != plan_->n) throw ValidationError("analyze: size mismatch");
  std::vector<double> in(path.begin(), path.end()), out(plan_->n);
  fftw_execute_r2r(plan_->plan, in.data(), out.data());
  const double c = 0.5 * scale_ * spacing();
  for (std::size_t j = 0; j < modes_; ++j) q[j] = c * out[j];
}

Vector SineTransform::analyze(std::span<const double> path) const {
  Vector q(modes_);
  analyze(path, q);
  return q;
}

double SineTransform::basis(std::size_t j, double t) const {
  return scale_ * std::sin(static_cast<double>(j) * std::numbers::pi * t / length_);
}

}  // namespace solhmc
