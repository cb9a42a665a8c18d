#include "solhmc/cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <ostream>

#include <CLI11.hpp>

#include "solhmc/analysis.hpp"
#include "solhmc/cli/config.hpp"
#include "solhmc/cli/output.hpp"
#include "solhmc/errors.hpp"
#include "solhmc/experiments.hpp"

namespace fs = std::filesystem;

namespace solhmc::cli {

namespace {

using Clock = std::chrono::steady_clock;

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ValidationError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const NumericalError& e) {
    err << "numerical abort: " << e.what() << "\n";
    return kNumericalAbort;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIoError;
  } catch (const fs::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIoError;
  }
}

RunConfig resolve(const CommandOptions& opts) {
  if (opts.config_path.empty()) throw ConfigError("", "--config is required");
  RunConfig cfg = load_config(opts.config_path);
  if (opts.seed) cfg.sampler.seed = *opts.seed;
  return cfg;
}

void require_out(const CommandOptions& opts) {
  if (opts.out.empty()) throw ConfigError("", "--out is required");
}

nlohmann::json integrator_json(const IntegratorParams& p) {
  nlohmann::json j{{"h", p.h}, {"n_steps", p.n_steps}, {"tau", p.tau()}};
  j["delta"] = std::isinf(p.delta) ? nlohmann::json("inf") : nlohmann::json(p.delta);
  if (p.identity_gamma()) j["iota"] = p.iota();
  else j["gamma2"] = p.gamma2;
  if (p.random_steps) j["n_steps_range"] = {p.random_steps->first, p.random_steps->second};
  return j;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void write_manifest(const fs::path& path, RunManifest manifest, Clock::time_point t0) {
  manifest.wall_clock_seconds = seconds_since(t0);
  write_atomic(path, manifest.to_json().dump(2) + "\n");
}

MixingScale figure_scale(const CommandOptions& opts) {
  MixingScale scale = opts.full ? MixingScale::full() : MixingScale::desk();
  if (opts.seeds) {
    if (*opts.seeds == 0) throw ConfigError("seeds", "--seeds must be at least 1");
    scale.seeds = *opts.seeds;
  }
  if (opts.seed) scale.seed = *opts.seed;
  if (opts.work) {
    if (*opts.work == 0) throw ConfigError("work", "--work must be positive");
    scale.work = *opts.work;
    scale.checkpoints = std::min<std::size_t>(scale.checkpoints, scale.work);
  }
  if (opts.burn_in) {
    if (!(*opts.burn_in >= 0.0 && *opts.burn_in < 1.0)) throw ConfigError("burn-in", "--burn-in must lie in [0, 1)");
    scale.burn_in_fraction = *opts.burn_in;
  }
  return scale;
}

int run_figure(const std::string& name, const std::vector<MixingMethod>& methods, const MixingScale& scale,
               const CommandOptions& opts, std::ostream& log) {
  require_out(opts);
  const auto t0 = Clock::now();
  const fs::path dir(opts.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir.string() + "'");

  log << name << ": " << methods.size() << " methods x " << scale.seeds << " seeds, work " << scale.work
      << " per chain\n";
  const std::vector<MixingReport> reports = run_mixing_experiment(methods, scale);

  RunManifest manifest;
  manifest.command = name;
  manifest.seed = scale.seed;
  manifest.resolved = {{"length", scale.length}, {"modes", scale.modes},     {"grid", scale.grid},
                       {"seeds", scale.seeds},   {"work", scale.work},       {"checkpoints", scale.checkpoints},
                       {"h", scale.h},           {"burn_in_fraction", scale.burn_in_fraction},
                       {"target", "double-well"}, {"start", "q = +1 on the interior, v from the prior"}};
  std::vector<fs::path> written;
  try {
    for (std::size_t m = 0; m < reports.size(); ++m) {
      CsvTable table({"n", "E_mean", "E_min", "E_max"});
      for (const auto& row : reports[m].rows)
        table.add_row({format_number(row.n), format_number(row.mean), format_number(row.min), format_number(row.max)});
      const fs::path file = dir / (reports[m].label + ".csv");
      write_atomic(file, table.str());
      written.push_back(file);
      manifest.outputs.push_back(file.filename().string());
      manifest.resolved["methods"][reports[m].label] = integrator_json(methods[m].integrator);
    }
    write_manifest(dir / "manifest.json", manifest, t0);
  } catch (...) {
    for (const auto& f : written) fs::remove(f, ec);
    throw;
  }
  for (const auto& r : reports)
    log << "  " << r.label << ": E(0)=" << format_number(r.rows.front().mean)
        << " E(end)=" << format_number(r.rows.back().mean) << "\n";
  return kOk;
}

}  // namespace

int cmd_sample(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = resolve(opts);
    require_out(opts);
    const auto t0 = Clock::now();
    const TargetModel target = make_target(cfg.sampler);
    Rng rng(cfg.sampler.seed);
    const ChainTrace trace = run_chain(target, cfg.sampler, rng);

    std::vector<std::string> header = {"step", "accepted", "delta_H"};
    header.insert(header.end(), trace.observable_names.begin(), trace.observable_names.end());
    CsvTable table(header);
    for (std::size_t k = 0; k < trace.records.size(); ++k) {
      if ((k + 1) % cfg.sampler.thinning != 0) continue;
      const auto& r = trace.records[k];
      std::vector<std::string> row = {std::to_string(k + 1), r.accepted ? "1" : "0", format_number(r.delta_h)};
      for (double o : r.observables) row.push_back(format_number(o));
      table.add_row(std::move(row));
    }
    const fs::path out(opts.out);
    write_atomic(out, table.str());

    RunManifest manifest;
    manifest.command = "sample";
    manifest.seed = cfg.sampler.seed;
    manifest.config_toml = to_toml(cfg);
    manifest.resolved = {{"integrator", integrator_json(cfg.sampler.integrator)},
                         {"acceptance_rate", trace.acceptance_rate()},
                         {"work", trace.work},
                         {"aborted", trace.aborted}};
    manifest.outputs.push_back(out.filename().string());

    if (cfg.sampler.store_snapshots) {
      std::vector<std::string> sh = {"step"};
      for (std::size_t j = 1; j <= cfg.sampler.modes; ++j) sh.push_back("q" + std::to_string(j));
      CsvTable snaps(sh);
      for (const auto& s : trace.snapshots) {
        std::vector<std::string> row = {std::to_string(s.step)};
        for (double q : s.x.q) row.push_back(format_number(q));
        snaps.add_row(std::move(row));
      }
      fs::path sp = out;
      sp += ".snapshots.csv";
      write_atomic(sp, snaps.str());
      manifest.outputs.push_back(sp.filename().string());
    }
    write_manifest(manifest_path_for(out), manifest, t0);

    if (trace.aborted) {
      err << "numerical abort: " << trace.abort_message << " (partial trace of " << trace.records.size()
          << " steps written)\n";
      return static_cast<int>(kNumericalAbort);
    }
    log << "sample: " << trace.records.size() << " steps, acceptance " << format_number(trace.acceptance_rate())
        << "\n";
    return static_cast<int>(kOk);
  });
}

int cmd_fig1(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const MixingScale scale = figure_scale(opts);
    return run_figure("fig1", fig1_methods(scale), scale, opts, log);
  });
}

int cmd_fig2(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const MixingScale scale = figure_scale(opts);
    return run_figure("fig2", fig2_methods(scale), scale, opts, log);
  });
}

int cmd_diffusion_limit(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = resolve(opts);
    require_out(opts);
    const auto t0 = Clock::now();
    const TargetModel target = make_target(cfg.sampler);
    DiffusionLimitOptions o;
    o.ladder = cfg.study.ladder;
    o.t_final = cfg.study.t_final;
    o.trajectories = cfg.study.trajectories;
    o.sde_trajectories = cfg.study.sde_trajectories;
    o.sde_dt = cfg.study.sde_dt;
    o.seed = cfg.sampler.seed;
    const DiffusionLimitReport report = diffusion_limit_study(target, o);

    CsvTable table({"delta", "steps", "acceptance", "functional", "chain_mean", "chain_se", "sde_mean", "sde_se",
                    "gap", "gap_se", "converged"});
    for (const auto& level : report.levels) {
      for (std::size_t a = 0; a < report.functionals.size(); ++a) {
        const auto& e = level.estimates[a];
        const auto& conv = report.converged[a];
        table.add_row({format_number(level.delta), std::to_string(level.steps), format_number(level.acceptance),
                       report.functionals[a], format_number(e.chain.mean), format_number(e.chain.se),
                       format_number(report.sde[a].mean), format_number(report.sde[a].se), format_number(e.gap),
                       format_number(e.gap_se), conv ? (*conv ? "yes" : "no") : "n/a"});
      }
    }
    const fs::path out(opts.out);
    write_atomic(out, table.str());
    RunManifest manifest;
    manifest.command = "diffusion-limit";
    manifest.seed = cfg.sampler.seed;
    manifest.config_toml = to_toml(cfg);
    manifest.resolved = {{"trajectories", report.trajectories},
                         {"sde_trajectories", report.sde_trajectories},
                         {"sde_dt", report.sde_dt},
                         {"sde_scheme", "ou-splitting"}};
    manifest.outputs.push_back(out.filename().string());
    write_manifest(manifest_path_for(out), manifest, t0);
    log << "diffusion-limit: " << report.levels.size() << " levels written to " << out.string() << "\n";
    return static_cast<int>(kOk);
  });
}

int cmd_scaling(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = resolve(opts);
    require_out(opts);
    const auto t0 = Clock::now();
    const TargetModel target = make_target(cfg.sampler);
    ScalingOptions o;
    o.ladder = cfg.study.ladder;
    o.steps = cfg.study.steps;
    o.burn_in_fraction = cfg.burn_in;
    o.seed = cfg.sampler.seed;
    const ScalingReport report = acceptance_scaling_study(target, o);

    CsvTable table({"delta", "mean_rejection", "stderr"});
    for (const auto& l : report.levels)
      table.add_row({format_number(l.delta), format_number(l.rejection.mean), format_number(l.rejection.se)});
    table.add_row({"slope", report.slope ? format_number(*report.slope) : "n/a", ""});
    const fs::path out(opts.out);
    write_atomic(out, table.str());
    RunManifest manifest;
    manifest.command = "scaling";
    manifest.seed = cfg.sampler.seed;
    manifest.config_toml = to_toml(cfg);
    manifest.resolved = {{"steps_per_level", o.steps}, {"burn_in_fraction", o.burn_in_fraction}};
    manifest.outputs.push_back(out.filename().string());
    write_manifest(manifest_path_for(out), manifest, t0);
    log << "scaling: slope " << (report.slope ? format_number(*report.slope) : "n/a") << "\n";
    return static_cast<int>(kOk);
  });
}

int cmd_invariance(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = resolve(opts);
    require_out(opts);
    const auto t0 = Clock::now();
    const TargetModel target = make_target(cfg.sampler);
    CsvTable table({"source", "mode", "lambda_sq", "variance", "ratio", "ratio_se", "within_5pct"});
    auto emit = [&](const std::string& source, const std::vector<ModeVariance>& rows) {
      for (const auto& r : rows)
        table.add_row({source, std::to_string(r.mode), format_number(r.lambda_sq), format_number(r.variance),
                       format_number(r.ratio), format_number(r.ratio_se),
                       std::abs(r.ratio - 1.0) <= 0.05 ? "1" : "0"});
    };
    emit("chain", chain_mode_variances(target, cfg.sampler, cfg.study.modes_checked, cfg.burn_in));
    if (cfg.study.include_sde) {
      SdeParams p;
      p.dt = cfg.study.sde_invariance_dt;
      p.t_final = cfg.study.sde_t_final;
      emit("sde", sde_mode_variances(target, p, cfg.study.modes_checked, cfg.sampler.seed, cfg.burn_in));
    }
    const fs::path out(opts.out);
    write_atomic(out, table.str());
    RunManifest manifest;
    manifest.command = "invariance";
    manifest.seed = cfg.sampler.seed;
    manifest.config_toml = to_toml(cfg);
    manifest.resolved = {{"integrator", integrator_json(cfg.sampler.integrator)}};
    manifest.outputs.push_back(out.filename().string());
    write_manifest(manifest_path_for(out), manifest, t0);
    log << "invariance: " << table.rows() << " rows written to " << out.string() << "\n";
    return static_cast<int>(kOk);
  });
}

int run_cli(int argc, char** argv, std::ostream& log, std::ostream& err) {
  CLI::App app{"SOL-HMC function-space sampler and bridge experiments"};
  app.require_subcommand(1);
  CommandOptions opts;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "TOML config file")->required();
    sub->add_option("--out", opts.out, "output CSV path")->required();
    sub->add_option("--seed", opts.seed, "override run.seed");
  };
  auto add_figure = [&](CLI::App* sub) {
    sub->add_option("--out", opts.out, "output directory")->required();
    sub->add_option("--seed", opts.seed, "base seed");
    sub->add_option("--seeds", opts.seeds, "number of seeds averaged per curve");
    sub->add_option("--work", opts.work, "integrator work n per chain");
    sub->add_option("--burn-in", opts.burn_in, "fraction of MCMC steps dropped before averaging E(n)");
    sub->add_flag("--full", opts.full, "larger discretisation and longer runs");
  };

  std::vector<std::pair<CLI::App*, int (*)(const CommandOptions&, std::ostream&, std::ostream&)>> commands;
  CLI::App* sample = app.add_subcommand("sample", "run one chain and write its trace");
  add_config(sample);
  commands.emplace_back(sample, &cmd_sample);
  CLI::App* fig1 = app.add_subcommand("fig1", "E(n) curves: MALA, HMC and N_d = 1 SOL-HMC");
  add_figure(fig1);
  commands.emplace_back(fig1, &cmd_fig1);
  CLI::App* fig2 = app.add_subcommand("fig2", "E(n) curves: HMC and SOL-HMC at iota = 2^-1/2");
  add_figure(fig2);
  commands.emplace_back(fig2, &cmd_fig2);
  CLI::App* dl = app.add_subcommand("diffusion-limit", "weak convergence of delta = h = tau chains to the SDE");
  add_config(dl);
  commands.emplace_back(dl, &cmd_diffusion_limit);
  CLI::App* sc = app.add_subcommand("scaling", "mean rejection 1 - alpha against delta");
  add_config(sc);
  commands.emplace_back(sc, &cmd_scaling);
  CLI::App* inv = app.add_subcommand("invariance", "per-mode variance ratios of chain and SDE");
  add_config(inv);
  commands.emplace_back(inv, &cmd_invariance);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      log << app.help();
      return kOk;
    }
    err << e.what() << "\n" << app.help();
    return kUsage;
  }
  for (const auto& [sub, fn] : commands)
    if (sub->parsed()) return fn(opts, log, err);
  return kUsage;
}

}  // namespace solhmc::cli
