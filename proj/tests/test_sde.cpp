#include <doctest.h>

#include <cmath>
#include <numbers>

#include "solhmc/analysis.hpp"
#include "solhmc/errors.hpp"
#include "solhmc/sde.hpp"

using namespace solhmc;

namespace {

// exp(A t) by a long Taylor series on a scaled-and-squared matrix.
std::array<double, 4> expm_reference(double g1, double g2, double t) {
  const int squarings = 10;
  const double s = t / std::pow(2.0, squarings);
  const std::array<double, 4> a = {-g1 * s, s, -s, -g2 * s};
  std::array<double, 4> out = {1, 0, 0, 1}, term = {1, 0, 0, 1};
  for (int k = 1; k < 30; ++k) {
    term = {(term[0] * a[0] + term[1] * a[2]) / k, (term[0] * a[1] + term[1] * a[3]) / k,
            (term[2] * a[0] + term[3] * a[2]) / k, (term[2] * a[1] + term[3] * a[3]) / k};
    for (int i = 0; i < 4; ++i) out[i] += term[i];
  }
  for (int k = 0; k < squarings; ++k)
    out = {out[0] * out[0] + out[1] * out[2], out[0] * out[1] + out[1] * out[3],
           out[2] * out[0] + out[3] * out[2], out[2] * out[1] + out[3] * out[3]};
  return out;
}

}  // namespace

TEST_CASE("linear flow closed form") {
  for (auto [g1, g2] : {std::pair{0.0, 0.0}, {0.0, 1.0}, {0.3, 1.7}, {1.0, 3.0}, {2.5, 0.1}, {4.0, 0.5}}) {
    const auto f = linear_flow(g1, g2, 0.7);
    const auto r = expm_reference(g1, g2, 0.7);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(f[i] - r[i]) < 1e-12);
  }
  const auto rot = linear_flow(0.0, 0.0, std::numbers::pi / 2);
  CHECK(std::abs(rot[0]) < 1e-15);
  CHECK(rot[1] == doctest::Approx(1.0));
  CHECK(rot[2] == doctest::Approx(-1.0));
}

TEST_CASE("frictionless gaussian dynamics is a rotation") {
  const TargetModel t = make_target("gaussian", SpectralPrior::brownian_bridge(10.0, 8), 32);
  SdeParams p;
  p.gamma2 = Vector(8, 0.0);
  p.t_final = std::numbers::pi / 2;
  p.dt = p.t_final / 157;
  Rng rng(1);
  const PhasePoint x0 = {t.prior().sample(rng), t.prior().sample(rng)};
  const SdeTrajectory tr = simulate(x0, t, p, rng);
  const PhasePoint& x1 = tr.states.back();
  for (std::size_t j = 0; j < 8; ++j) {
    CHECK(x1.q[j] == doctest::Approx(x0.v[j]).epsilon(1e-10));
    CHECK(x1.v[j] == doctest::Approx(-x0.q[j]).epsilon(1e-10));
  }
}

TEST_CASE("gaussian reference measure is stationary") {
  const TargetModel t = make_target("gaussian", SpectralPrior::brownian_bridge(10.0, 4), 16);
  for (SdeScheme scheme : {SdeScheme::OuSplitting, SdeScheme::EulerMaruyama}) {
    SdeParams p;
    p.gamma1 = {0.5, 0.5, 0.5, 0.5};
    p.dt = scheme == SdeScheme::OuSplitting ? 0.1 : 0.001;
    p.t_final = 1.0;
    p.scheme = scheme;
    Rng rng(2);
    const int n = 20000;
    Vector q2(4, 0.0), v2(4, 0.0);
    for (int i = 0; i < n; ++i) {
      const PhasePoint x = simulate({t.prior().sample(rng), t.prior().sample(rng)}, t, p, rng).states.back();
      for (std::size_t j = 0; j < 4; ++j) {
        q2[j] += x.q[j] * x.q[j];
        v2[j] += x.v[j] * x.v[j];
      }
    }
    for (std::size_t j = 0; j < 4; ++j) {
      const double l2 = t.prior().eigenvalue(j) * t.prior().eigenvalue(j);
      CHECK(std::abs(q2[j] / n / l2 - 1.0) < 0.05);
      CHECK(std::abs(v2[j] / n / l2 - 1.0) < 0.05);
    }
  }
}

TEST_CASE("schemes agree weakly on the double well") {
  const TargetModel t = make_target("double-well", SpectralPrior::brownian_bridge(5.0, 8), 32);
  std::vector<std::vector<double>> finals(2);
  int s = 0;
  for (SdeScheme scheme : {SdeScheme::OuSplitting, SdeScheme::EulerMaruyama}) {
    SdeParams p;
    p.dt = 1e-3;
    p.t_final = 1.0;
    p.scheme = scheme;
    Rng rng(3 + s);
    for (int i = 0; i < 1500; ++i) {
      const PhasePoint x = simulate({Vector(8, 0.0), Vector(8, 0.0)}, t, p, rng).states.back();
      finals[s].push_back(x.q[0] * x.q[0] + x.v[0]);
    }
    ++s;
  }
  const MeanEstimate a = iid_mean(finals[0]), b = iid_mean(finals[1]);
  CHECK(std::abs(a.mean - b.mean) < 4.0 * std::hypot(a.se, b.se));
}

TEST_CASE("zero horizon returns the initial state") {
  const TargetModel t = make_target("double-well", SpectralPrior::brownian_bridge(5.0, 4), 16);
  SdeParams p;
  p.t_final = 0.0;
  Rng rng(4);
  const PhasePoint x0 = {{0.1, 0.2, 0.3, 0.4}, {1, 2, 3, 4}};
  const SdeTrajectory tr = simulate(x0, t, p, rng);
  REQUIRE(tr.states.size() == 1);
  CHECK(tr.times[0] == 0.0);
  CHECK(tr.states[0] == x0);
}

TEST_CASE("snapshot spacing") {
  const TargetModel t = make_target("gaussian", SpectralPrior::brownian_bridge(5.0, 4), 16);
  SdeParams p;
  p.dt = 0.01;
  p.t_final = 1.0;
  p.snapshot_interval = 0.25;
  Rng rng(5);
  const SdeTrajectory tr = simulate({Vector(4, 0.0), Vector(4, 0.0)}, t, p, rng);
  REQUIRE(tr.times.size() == 5);
  CHECK(tr.times[2] == doctest::Approx(0.5));
  CHECK(tr.times.back() == doctest::Approx(1.0));
}

TEST_CASE("sde parameter validation") {
  SdeParams p;
  p.dt = 0.0;
  CHECK_THROWS_AS(p.validate(4), ValidationError);
  p.dt = 0.1;
  p.gamma1 = {1.0};
  CHECK_THROWS_AS(p.validate(4), ValidationError);
  p.gamma1 = {};
  p.gamma2 = {1.0, -1.0, 1.0, 1.0};
  CHECK_THROWS_AS(p.validate(4), ValidationError);
  CHECK(parse_sde_scheme(to_string(SdeScheme::EulerMaruyama)) == SdeScheme::EulerMaruyama);
  CHECK_THROWS_AS(parse_sde_scheme("rk4"), ValidationError);
}
