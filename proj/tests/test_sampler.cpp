#include <doctest.h>

#include <cmath>
#include <numbers>

#include "solhmc/errors.hpp"
#include "solhmc/sampler.hpp"

using namespace solhmc;

namespace {

SamplerConfig small_config(const std::string& target, std::size_t modes, double length) {
  SamplerConfig c = preset("sol-hmc", {.h = 0.1, .iota = 0.5, .n_steps = 10});
  c.target_label = target;
  c.modes = modes;
  c.grid = 4 * modes;
  c.length = length;
  return c;
}

}  // namespace

TEST_CASE("gaussian target accepts every proposal") {
  const SamplerConfig c = small_config("gaussian", 32, 100.0);
  const TargetModel t = make_target(c);
  const SolHmcKernel kernel(t, c.integrator);
  Rng rng(1);
  PhasePoint x = {t.prior().sample(rng), t.prior().sample(rng)};
  double worst = 0.0;
  for (int i = 0; i < 2000; ++i) {
    StepResult r = kernel.step(x, rng);
    CHECK(r.accepted);
    worst = std::max(worst, std::abs(r.delta_h));
    x = std::move(r.x);
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("rejection flips the refreshed velocity") {
  const SamplerConfig c = small_config("double-well", 16, 10.0);
  const TargetModel t = make_target(c);
  Rng seed(2);
  const PhasePoint x = {t.prior().sample(seed), t.prior().sample(seed)};

  Rng a(9), b(9);
  const PhasePoint refreshed = theta0(x, OuCoefficients(c.integrator, t.prior()), a);
  const StepResult r = sol_hmc_step(x, t, c.integrator, b, [](double, double) { return false; });
  CHECK_FALSE(r.accepted);
  CHECK(r.x.q == x.q);
  for (std::size_t j = 0; j < 16; ++j) CHECK(r.x.v[j] == -refreshed.v[j]);
  CHECK(r.eval.psi == t.psi(x.q));
}

TEST_CASE("two rejections without refresh return to the start") {
  SamplerConfig c = small_config("double-well", 16, 10.0);
  c.integrator = IntegratorParams::from_iota(0.1, 10, 0.0);
  const TargetModel t = make_target(c);
  Rng rng(3);
  const PhasePoint x = {t.prior().sample(rng), t.prior().sample(rng)};
  const AcceptRule never = [](double, double) { return false; };
  const StepResult once = sol_hmc_step(x, t, c.integrator, rng, never);
  const StepResult twice = sol_hmc_step(once.x, t, c.integrator, rng, never);
  CHECK(twice.x == x);
}

TEST_CASE("acceptance uses the uniform draw") {
  const SamplerConfig c = small_config("double-well", 16, 10.0);
  const TargetModel t = make_target(c);
  Rng rng(4);
  const PhasePoint x = {t.prior().sample(rng), t.prior().sample(rng)};
  Rng a(5), b(5);
  double seen_alpha = -1.0, seen_u = -1.0;
  const StepResult r = sol_hmc_step(x, t, c.integrator, a, [&](double alpha, double u) {
    seen_alpha = alpha;
    seen_u = u;
    return true;
  });
  CHECK(r.accepted);
  CHECK(seen_alpha == doctest::Approx(std::min(1.0, std::exp(r.delta_h))));
  CHECK(seen_u >= 0.0);
  CHECK(seen_u < 1.0);
  const StepResult d = sol_hmc_step(x, t, c.integrator, b);
  CHECK(d.accepted == (seen_u < seen_alpha));
}

TEST_CASE("chains are reproducible from the seed") {
  SamplerConfig c = small_config("double-well", 16, 10.0);
  c.iterations = 200;
  c.observables = {"q1", "q_norm_sq", "v_norm_sq", "psi", "path_mid"};
  const TargetModel t = make_target(c);
  Rng r1(c.seed), r2(c.seed), r3(c.seed + 1);
  const ChainTrace a = run_chain(t, c, r1);
  const ChainTrace b = run_chain(t, c, r2);
  const ChainTrace d = run_chain(t, c, r3);
  REQUIRE(a.records.size() == 200);
  for (std::size_t k = 0; k < 200; ++k) {
    CHECK(a.records[k].delta_h == b.records[k].delta_h);
    CHECK(a.records[k].observables == b.records[k].observables);
  }
  CHECK(a.final_state == b.final_state);
  CHECK_FALSE(a.final_state == d.final_state);
  CHECK(a.work == 200 * 10);
}

TEST_CASE("observables on a known state") {
  const SamplerConfig c = small_config("double-well", 4, 10.0);
  const TargetModel t = make_target(c);
  const ObservableSet obs(t, {"q1", "q_norm_sq", "v_norm_sq", "psi", "path_mid"});
  const PhasePoint x = {{1.0, 2.0, 0.0, 0.0}, {0.0, 0.0, 3.0, 0.0}};
  const auto v = obs.evaluate(x, t.evaluate(x.q));
  CHECK(v[0] == 1.0);
  CHECK(v[1] == doctest::Approx(5.0));
  CHECK(v[2] == doctest::Approx(9.0));
  CHECK(v[3] == doctest::Approx(t.psi(x.q)));
  CHECK(v[4] == doctest::Approx(std::sqrt(2.0 / 10.0)));
  CHECK_THROWS_AS(ObservableSet(t, {"nope"}), ValidationError);
}

TEST_CASE("presets") {
  const auto hmc = preset("hmc");
  CHECK(hmc.integrator.n_steps == 50);
  CHECK(hmc.integrator.iota() == 1.0);
  CHECK(preset("hmc", {.h = 0.1}).integrator.n_steps == 10);
  const auto mala = preset("mala");
  CHECK(mala.integrator.n_steps == 1);
  CHECK(std::isinf(mala.integrator.delta));
  const auto sol = preset("sol-hmc");
  CHECK(sol.integrator.iota() == doctest::Approx(std::sqrt(0.5)));
  CHECK(sol.integrator.n_steps == 50);
  const auto dl = preset("diffusion-limit", {.h = 0.1});
  CHECK(dl.integrator.delta == 0.1);
  CHECK(dl.integrator.tau() == 0.1);
  CHECK_THROWS_AS(preset("sol-hmc", {.iota = 0.5, .delta = 0.1}), ValidationError);
  CHECK_THROWS_AS(preset("mala", {.n_steps = 3}), ValidationError);
  CHECK_THROWS_AS(preset("hmc", {.iota = 0.5}), ValidationError);
  CHECK_THROWS_AS(preset("nuts"), ValidationError);
}

TEST_CASE("random trajectory length stays in range") {
  SamplerConfig c = small_config("gaussian", 8, 10.0);
  c.integrator.random_steps = {{3, 6}};
  c.iterations = 500;
  const TargetModel t = make_target(c);
  Rng rng(6);
  const ChainTrace tr = run_chain(t, c, rng);
  int lo = 100, hi = 0;
  for (const auto& r : tr.records) {
    lo = std::min(lo, r.n_steps);
    hi = std::max(hi, r.n_steps);
  }
  CHECK(lo == 3);
  CHECK(hi == 6);
}

TEST_CASE("snapshots follow the thinning") {
  SamplerConfig c = small_config("gaussian", 8, 10.0);
  c.iterations = 100;
  c.thinning = 7;
  c.store_snapshots = true;
  const TargetModel t = make_target(c);
  Rng rng(7);
  const ChainTrace tr = run_chain(t, c, rng);
  REQUIRE(tr.snapshots.size() == 14);
  CHECK(tr.snapshots.front().step == 7);
  CHECK(tr.snapshots.back().step == 98);
}

TEST_CASE("unstable chain is reported as aborted") {
  SamplerConfig c = preset("sol-hmc");
  c.iterations = 50;
  const TargetModel t = make_target(c);
  Rng rng(2024);
  const ChainTrace tr = run_chain(t, c, rng);
  CHECK(tr.aborted);
  CHECK(tr.records.size() < 50);
  CHECK(tr.abort_message.find("non-finite") != std::string::npos);
}

TEST_CASE("well start keeps the bridge chain stable") {
  SamplerConfig c = preset("sol-hmc");
  c.iterations = 50;
  c.start = "well";
  const TargetModel t = make_target(c);
  Rng rng(2024);
  const ChainTrace tr = run_chain(t, c, rng);
  CHECK_FALSE(tr.aborted);
  CHECK(tr.acceptance_rate() > 0.5);
  c.start = "middle";
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("single-mode chain samples the tilted density") {
  const SpectralPrior prior(10.0, {10.0 / std::numbers::pi}, 1.0);
  const TargetModel t(prior, Potential::double_well(), 8, "double-well");
  const auto params = IntegratorParams::from_iota(0.2, 5, 0.5);

  double z = 0.0, m2 = 0.0, m4 = 0.0;
  const double lam2 = prior.eigenvalue(0) * prior.eigenvalue(0);
  for (int i = -4000; i <= 4000; ++i) {
    const double q = i * 0.0025;
    const double w = std::exp(-0.5 * q * q / lam2 - t.psi(std::vector<double>{q}));
    z += w;
    m2 += w * q * q;
    m4 += w * q * q * q * q;
  }
  m2 /= z;
  m4 /= z;

  const SolHmcKernel kernel(t, params);
  Rng rng(8);
  PhasePoint x = {{1.0}, prior.sample(rng)};
  double s2 = 0.0, s4 = 0.0;
  const int burn = 2000, n = 200000;
  for (int i = 0; i < burn + n; ++i) {
    x = kernel.step(x, rng).x;
    if (i < burn) continue;
    s2 += x.q[0] * x.q[0];
    s4 += std::pow(x.q[0], 4);
  }
  CHECK(std::abs(s2 / n / m2 - 1.0) < 0.03);
  CHECK(std::abs(s4 / n / m4 - 1.0) < 0.05);
}
