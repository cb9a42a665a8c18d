// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers as
// arguments to run a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <span>
#include <string>

#include "solhmc/analysis.hpp"
#include "solhmc/experiments.hpp"

using namespace solhmc;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

PhasePoint draw(const TargetModel& t, Rng& rng) { return {t.prior().sample(rng), t.prior().sample(rng)}; }

double max_diff(const Vector& a, const Vector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

TargetModel short_well(std::size_t modes) {
  return make_target("double-well", SpectralPrior::brownian_bridge(10.0, modes), 4 * modes);
}

Verdict gaussian_exactness() {
  SamplerConfig c = preset("sol-hmc");
  c.target_label = "gaussian";
  c.iterations = 100000;
  c.observables.clear();
  const TargetModel t = make_target(c);
  Rng rng(1);
  double worst = 0.0;
  const ChainTrace tr = run_chain(t, c, rng, std::nullopt, [&](std::size_t, const StepResult& r) {
    worst = std::max(worst, std::abs(r.delta_h));
  });
  const bool ok = !tr.aborted && tr.accepted == c.iterations && worst < 1e-10;
  return {ok, fmt("max|dH|=%.2e acceptance=%zu/%zu", worst, tr.accepted, c.iterations)};
}

Verdict invariance() {
  SamplerConfig c = preset("sol-hmc", {.h = 0.1, .iota = 0.5, .n_steps = 10});
  c.target_label = "gaussian";
  c.iterations = 200000;
  c.seed = 3;
  const TargetModel t = make_target(c);
  const auto chain = chain_mode_variances(t, c, 10, 0.1);
  SdeParams p;
  p.dt = 1e-2;
  p.t_final = 40000.0;
  const auto sde = sde_mode_variances(t, p, 10, 4, 0.1);
  double chain_worst = 0.0, sde_worst = 0.0;
  for (const auto& r : chain) chain_worst = std::max(chain_worst, std::abs(r.ratio - 1.0));
  for (const auto& r : sde) sde_worst = std::max(sde_worst, std::abs(r.ratio - 1.0));
  return {chain_worst < 0.05 && sde_worst < 0.05,
          fmt("max|var/lambda^2-1| chain=%.4f sde=%.4f (j<=10)", chain_worst, sde_worst)};
}

Verdict integrator_contracts() {
  Rng rng(11);
  double rev = 0.0, det = 0.0, energy = 0.0, closed = 0.0;
  {
    const TargetModel t = short_well(64);
    for (int i = 0; i < 10; ++i) {
      const PhasePoint x = draw(t, rng);
      const FlowResult f = chi_multi(x, t, 0.05, 40);
      PhasePoint y = f.x;
      for (auto& v : y.v) v = -v;
      PhasePoint z = chi_multi(y, t, 0.05, 40).x;
      for (auto& v : z.v) v = -v;
      rev = std::max({rev, max_diff(z.q, x.q), max_diff(z.v, x.v)});
    }
  }
  {
    const TargetModel t = short_well(8);
    for (int i = 0; i < 5; ++i) det = std::max(det, std::abs(jacobian_determinant(draw(t, rng), t, 0.1, 10) - 1.0));
  }
  for (std::size_t n : {8u, 32u}) {
    const TargetModel t = short_well(n);
    for (int i = 0; i < 10; ++i) {
      const PhasePoint x = draw(t, rng);
      const FlowResult f = chi_multi(x, t, 0.05, 20);
      energy = std::max(energy, std::abs(f.delta_h - (hamiltonian_oracle(x, t) - hamiltonian_oracle(f.x, t))));
    }
  }
  {
    const TargetModel t = short_well(32);
    const double h = 0.1;
    for (int i = 0; i < 10; ++i) {
      const PhasePoint x = draw(t, rng);
      const Vector g0 = t.c_grad_psi(x.q);
      Vector half(32), q1(32), v1(32);
      for (std::size_t j = 0; j < 32; ++j) {
        half[j] = x.v[j] - 0.5 * h * g0[j];
        q1[j] = std::cos(h) * x.q[j] + std::sin(h) * half[j];
      }
      const Vector g1 = t.c_grad_psi(q1);
      for (std::size_t j = 0; j < 32; ++j) v1[j] = -std::sin(h) * x.q[j] + std::cos(h) * half[j] - 0.5 * h * g1[j];
      const FlowResult f = chi(x, t, h);
      closed = std::max({closed, max_diff(f.x.q, q1), max_diff(f.x.v, v1)});
    }
  }
  return {rev < 1e-10 && det < 1e-5 && energy < 1e-8 && closed < 1e-12,
          fmt("reversibility=%.1e |det-1|=%.1e dH-oracle=%.1e closed-form=%.1e", rev, det, energy, closed)};
}

Verdict energy_order() {
  const TargetModel t = short_well(64);
  Rng rng(12);
  std::vector<PhasePoint> starts;
  for (int i = 0; i < 16; ++i) starts.push_back({well_state(t), t.prior().sample(rng)});
  std::vector<double> hs, errs;
  for (int k : {10, 20, 40, 80}) {
    double sum = 0.0;
    for (const auto& x : starts) sum += std::abs(chi_multi(x, t, 1.0 / k, k).delta_h);
    hs.push_back(1.0 / k);
    errs.push_back(sum / starts.size());
  }
  const auto slope = fit_loglog_slope(hs, errs);
  return {slope && std::abs(*slope - 2.0) <= 0.2, fmt("slope=%.3f", slope.value_or(NAN))};
}

Verdict acceptance_scaling() {
  ScalingOptions o;
  o.steps = 10000;
  o.seed = 13;
  const ScalingReport r = acceptance_scaling_study(short_well(64), o);
  std::string detail = fmt("slope=%.3f;", r.slope.value_or(NAN));
  for (const auto& l : r.levels) detail += fmt(" %.3g:%.2e", l.delta, l.rejection.mean);
  return {r.slope && *r.slope >= 1.8, detail};
}

Verdict diffusion_limit() {
  DiffusionLimitOptions o;
  o.t_final = 5.0;
  o.trajectories = 2000;
  o.sde_dt = 1e-3;
  o.seed = 14;
  const DiffusionLimitReport r = diffusion_limit_study(short_well(32), o);
  bool ok = true;
  std::string detail;
  for (std::size_t a = 0; a < r.functionals.size(); ++a) {
    ok = ok && r.converged[a].value_or(false);
    const auto& fine = r.levels.back().estimates[a];
    detail += fmt("%s%s finest gap %.3g (se %.2g) %s", a ? "; " : "", r.functionals[a].c_str(), fine.gap,
                  fine.gap_se, r.converged[a].value_or(false) ? "ok" : "FAILED");
  }
  return {ok, detail};
}

Verdict figure1() {
  const MixingScale s = MixingScale::desk();
  const auto reports = run_mixing_experiment(fig1_methods(s), s);
  const MixingReport &mala = reports[0], &hmc = reports[1], &sol = reports[2];
  // Decreasing in trend: last-quartile mean below first-quartile mean.
  bool decreasing = true;
  for (const auto& r : reports) {
    double first = 0.0, last = 0.0;
    int nf = 0, nl = 0;
    for (const auto& row : r.rows) {
      if (row.n <= 0.25 * s.work) {
        first += row.mean;
        ++nf;
      } else if (row.n > 0.75 * s.work) {
        last += row.mean;
        ++nl;
      }
    }
    decreasing = decreasing && nf > 0 && nl > 0 && last / nl < first / nf;
  }
  bool ordered = true;
  for (std::size_t i = 0; i < hmc.rows.size(); ++i) {
    if (hmc.rows[i].n < 0.5 * s.work) continue;
    ordered = ordered && hmc.rows[i].mean <= sol.rows[i].mean && sol.rows[i].mean <= mala.rows[i].mean;
  }
  return {decreasing && ordered,
          fmt("decreasing=%s ordered=%s final E: hmc=%.4f sol0.9=%.4f mala=%.4f", decreasing ? "yes" : "no",
              ordered ? "yes" : "no", hmc.rows.back().mean, sol.rows.back().mean, mala.rows.back().mean)};
}

Verdict figure2() {
  const MixingScale s = MixingScale::desk();
  const auto methods = fig2_methods(s);
  const auto reports = run_mixing_experiment({methods[0], methods[2], methods[3]}, s);
  const double level = 0.1 * reports[0].rows.front().mean;
  const double hmc = first_crossing(reports[0], level);
  const double nd25 = first_crossing(reports[1], level);
  const double nd50 = first_crossing(reports[2], level);
  const auto reached = [](double n) { return n >= 0.0; };
  const bool ok = reached(hmc) && reached(nd25) && reached(nd50) && nd25 < hmc && nd50 < hmc;
  return {ok, fmt("n at E=0.1E(0): hmc=%.0f nd25=%.0f nd50=%.0f", hmc, nd25, nd50)};
}

Verdict gradient_lipschitz() {
  const TargetModel t = short_well(32);
  Rng rng(15);
  const double eps = 1e-5;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vector q = t.prior().sample(rng);
    Vector e(q.size());
    double norm = 0.0;
    for (auto& x : e) {
      x = rng.normal();
      norm += x * x;
    }
    Vector qp = q, qm = q;
    for (std::size_t j = 0; j < q.size(); ++j) {
      e[j] /= std::sqrt(norm);
      qp[j] += eps * e[j];
      qm[j] -= eps * e[j];
    }
    const Vector g = t.grad_psi(q);
    double an = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) an += g[j] * e[j];
    const double fd = (t.psi(qp) - t.psi(qm)) / (2 * eps);
    worst = std::max(worst, std::abs(fd - an) / std::max(1.0, std::abs(an)));
  }

  // The bound is 1 + lambda_1^2 sup|V''| / 2 over the sampled paths.
  std::vector<double> ratios;
  bool bounded = true;
  for (std::size_t n : {32u, 64u, 128u}) {
    const TargetModel tn = short_well(n);
    Rng r(16);
    double m = 0.0;
    for (int i = 0; i < 200; ++i) {
      // Same normals for every N.
      Vector ra(128), rb(128);
      for (auto& x : ra) x = r.normal();
      for (auto& x : rb) x = r.normal();
      const Vector a = tn.prior().sample_from(std::span(ra).first(n));
      const Vector b = tn.prior().sample_from(std::span(rb).first(n));
      const Vector fa = tn.force(a), fb = tn.force(b);
      double num = 0.0, den = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        num += (fa[j] - fb[j]) * (fa[j] - fb[j]);
        den += (a[j] - b[j]) * (a[j] - b[j]);
      }
      double u = 0.0;
      for (const Vector* q : {&a, &b})
        for (double x : tn.transform().synthesize(*q)) u = std::max(u, std::abs(x));
      const double bound = 1.0 + 0.5 * tn.prior().eigenvalue(0) * tn.prior().eigenvalue(0) * std::max(12 * u * u - 4, 4.0);
      bounded = bounded && std::sqrt(num / den) <= bound;
      m = std::max(m, std::sqrt(num / den));
    }
    ratios.push_back(m);
  }
  const bool stable = std::abs(ratios[1] / ratios[0] - 1.0) < 0.25 && std::abs(ratios[2] / ratios[1] - 1.0) < 0.25;
  return {worst < 1e-6 && bounded && stable,
          fmt("fd rel err=%.1e; max Lipschitz ratio N=32/64/128: %.3f %.3f %.3f", worst, ratios[0], ratios[1],
              ratios[2])};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"gaussian exactness", gaussian_exactness},
      {"reference-measure invariance", invariance},
      {"integrator contracts", integrator_contracts},
      {"energy-error order", energy_order},
      {"acceptance scaling", acceptance_scaling},
      {"diffusion limit", diffusion_limit},
      {"figure 1 mixing", figure1},
      {"figure 2 mixing", figure2},
      {"gradient and Lipschitz", gradient_lipschitz},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k + 1);
    if (!wanted.empty() && !wanted.contains(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %d (%s): %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", id, criteria[k].first.c_str(),
                v.detail.c_str(), secs);
    std::fflush(stdout);
    failures += v.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
