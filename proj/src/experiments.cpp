#include "solhmc/experiments.hpp"

#include <cmath>
#include <cstdio>

#include "solhmc/errors.hpp"

namespace solhmc {

MixingScale MixingScale::desk() { return {}; }

MixingScale MixingScale::full() {
  MixingScale s;
  s.modes = 512;
  s.grid = 2048;
  s.seeds = 16;
  s.work = 1000000;
  s.checkpoints = 500;
  return s;
}

namespace {

std::string iota_label(double iota) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "sol-hmc_iota%g", iota);
  return buf;
}

}  // namespace

std::vector<MixingMethod> fig1_methods(const MixingScale& scale) {
  const double h = scale.h;
  std::vector<MixingMethod> m;
  m.push_back({"mala", IntegratorParams::from_iota(h, 1, 1.0)});
  m.push_back({"hmc", IntegratorParams::from_iota(h, static_cast<int>(std::lround(1.0 / h)), 1.0)});
  for (double iota : {0.9, 0.99, 0.999}) m.push_back({iota_label(iota), IntegratorParams::from_iota(h, 1, iota)});
  return m;
}

std::vector<MixingMethod> fig2_methods(const MixingScale& scale) {
  const double h = scale.h;
  const double iota = std::sqrt(0.5);
  std::vector<MixingMethod> m;
  m.push_back({"hmc", IntegratorParams::from_iota(h, static_cast<int>(std::lround(1.0 / h)), 1.0)});
  for (int nd : {10, 25, 50}) m.push_back({"sol-hmc_nd" + std::to_string(nd), IntegratorParams::from_iota(h, nd, iota)});
  IntegratorParams random = IntegratorParams::from_iota(h, 50, iota);
  random.random_steps = {{25, 75}};
  m.push_back({"sol-hmc_nd25-75", random});
  return m;
}

std::vector<MixingReport> run_mixing_experiment(const std::vector<MixingMethod>& methods,
                                                const MixingScale& scale) {
  if (scale.seeds == 0) throw ValidationError("mixing experiment needs at least one seed");
  if (scale.work == 0 || scale.checkpoints == 0) throw ValidationError("mixing experiment needs positive work");
  const TargetModel target =
      make_target("double-well", SpectralPrior::brownian_bridge(scale.length, scale.modes), scale.grid);

  std::vector<double> checkpoints(scale.checkpoints);
  for (std::size_t c = 0; c < scale.checkpoints; ++c)
    checkpoints[c] = std::round(static_cast<double>(scale.work) * static_cast<double>(c + 1) /
                                static_cast<double>(scale.checkpoints));

  const Vector well = well_state(target);
  const Rng base(scale.seed);
  std::vector<PhasePoint> starts(scale.seeds);
  std::vector<double> e0(scale.seeds);
  for (std::size_t s = 0; s < scale.seeds; ++s) {
    Rng rng = base.split(s).split(0);
    starts[s] = {well, target.prior().sample(rng)};
    e0[s] = mean_abs_path(target.transform(), starts[s].q);
  }

  std::vector<MixingReport> reports;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    const SolHmcKernel kernel(target, methods[m].integrator);
    const double burn_work = scale.burn_in_fraction * static_cast<double>(scale.work);
    std::vector<std::vector<MixingRow>> curves(scale.seeds);
    parallel_for(scale.seeds, [&](std::size_t s) {
      Rng rng = base.split(s).split(m + 1);
      RunningMeanTracker tracker(target.transform(), checkpoints, burn_work);
      PhasePoint x = starts[s];
      TargetEval eval = target.evaluate(x.q);
      double work = 0.0;
      while (work < static_cast<double>(scale.work)) {
        StepResult r = kernel.step(x, rng, &eval);
        work += r.n_steps;
        tracker.add(r.x.q, work);
        x = std::move(r.x);
        eval = std::move(r.eval);
      }
      curves[s] = {{0.0, e0[s]}};
      curves[s].insert(curves[s].end(), tracker.rows().begin(), tracker.rows().end());
    });
    reports.push_back(average_curves(methods[m].label, curves));
  }
  return reports;
}

double first_crossing(const MixingReport& report, double level) {
  for (const auto& row : report.rows)
    if (row.mean <= level) return row.n;
  return -1.0;
}

}  // namespace solhmc
