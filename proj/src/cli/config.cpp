#include "solhmc/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "solhmc/errors.hpp"

namespace solhmc::cli {

namespace {

const std::set<std::string> kPrior = {"length", "modes", "grid", "sobolev_index"};
const std::set<std::string> kTarget = {"label"};
const std::set<std::string> kSampler = {"preset", "h", "n_steps", "n_steps_min", "n_steps_max",
                                        "iota", "delta", "gamma2"};
const std::set<std::string> kRun = {"iterations", "seed", "thinning", "observables", "store_snapshots", "burn_in", "start"};
const std::set<std::string> kStudy = {"ladder", "t_final", "trajectories", "sde_trajectories", "sde_dt", "steps",
                                      "modes_checked", "include_sde", "sde_t_final", "sde_invariance_dt"};

std::string key_of(const std::string& section, const std::string& key) { return section + "." + key; }

const toml::table* section(const toml::table& root, const std::string& name, const std::set<std::string>& allowed) {
  const toml::node* node = root.get(name);
  if (node == nullptr) return nullptr;
  const toml::table* tbl = node->as_table();
  if (tbl == nullptr) throw ConfigError(name, "must be a table");
  for (const auto& [k, v] : *tbl)
    if (!allowed.contains(std::string(k.str()))) throw ConfigError(key_of(name, std::string(k.str())), "unknown key");
  return tbl;
}

double get_real(const toml::table* tbl, const std::string& sec, const std::string& key, double fallback) {
  if (tbl == nullptr) return fallback;
  const toml::node* n = tbl->get(key);
  if (n == nullptr) return fallback;
  if (auto d = n->value<double>()) return *d;
  throw ConfigError(key_of(sec, key), "expected a number");
}

std::optional<double> get_opt_real(const toml::table* tbl, const std::string& sec, const std::string& key) {
  if (tbl == nullptr || tbl->get(key) == nullptr) return std::nullopt;
  return get_real(tbl, sec, key, 0.0);
}

std::int64_t get_int(const toml::table* tbl, const std::string& sec, const std::string& key, std::int64_t fallback,
                     std::int64_t min_value) {
  if (tbl == nullptr) return fallback;
  const toml::node* n = tbl->get(key);
  if (n == nullptr) return fallback;
  const auto i = n->as_integer();
  if (i == nullptr) throw ConfigError(key_of(sec, key), "expected an integer");
  if (i->get() < min_value) throw ConfigError(key_of(sec, key), "must be >= " + std::to_string(min_value));
  return i->get();
}

std::string get_string(const toml::table* tbl, const std::string& sec, const std::string& key, std::string fallback) {
  if (tbl == nullptr) return fallback;
  const toml::node* n = tbl->get(key);
  if (n == nullptr) return fallback;
  if (auto s = n->value<std::string>()) return *s;
  throw ConfigError(key_of(sec, key), "expected a string");
}

bool get_bool(const toml::table* tbl, const std::string& sec, const std::string& key, bool fallback) {
  if (tbl == nullptr) return fallback;
  const toml::node* n = tbl->get(key);
  if (n == nullptr) return fallback;
  if (auto b = n->value<bool>()) return *b;
  throw ConfigError(key_of(sec, key), "expected a boolean");
}

std::vector<double> get_real_array(const toml::table* tbl, const std::string& sec, const std::string& key,
                                   std::vector<double> fallback) {
  if (tbl == nullptr) return fallback;
  const toml::node* n = tbl->get(key);
  if (n == nullptr) return fallback;
  const toml::array* arr = n->as_array();
  if (arr == nullptr) throw ConfigError(key_of(sec, key), "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : *arr) {
    auto d = e.value<double>();
    if (!d) throw ConfigError(key_of(sec, key), "expected an array of numbers");
    out.push_back(*d);
  }
  return out;
}

std::vector<std::string> get_string_array(const toml::table* tbl, const std::string& sec, const std::string& key,
                                          std::vector<std::string> fallback) {
  if (tbl == nullptr) return fallback;
  const toml::node* n = tbl->get(key);
  if (n == nullptr) return fallback;
  const toml::array* arr = n->as_array();
  if (arr == nullptr) throw ConfigError(key_of(sec, key), "expected an array of strings");
  std::vector<std::string> out;
  for (const auto& e : *arr) {
    auto s = e.value<std::string>();
    if (!s) throw ConfigError(key_of(sec, key), "expected an array of strings");
    out.push_back(*s);
  }
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& toml_text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(toml_text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << source << ": " << e.description() << " (line " << e.source().begin.line << ")";
    throw ConfigError("", msg.str());
  }
  for (const auto& [k, v] : root) {
    const std::string name(k.str());
    if (name != "prior" && name != "target" && name != "sampler" && name != "run" && name != "study")
      throw ConfigError(name, "unknown section");
  }
  const toml::table* prior = section(root, "prior", kPrior);
  const toml::table* target = section(root, "target", kTarget);
  const toml::table* sampler = section(root, "sampler", kSampler);
  const toml::table* run = section(root, "run", kRun);
  const toml::table* study = section(root, "study", kStudy);

  PresetOverrides o;
  o.h = get_opt_real(sampler, "sampler", "h");
  o.iota = get_opt_real(sampler, "sampler", "iota");
  o.delta = get_opt_real(sampler, "sampler", "delta");
  if (o.iota && o.delta) throw ConfigError("sampler.iota", "iota and delta are mutually exclusive");
  if (sampler && sampler->get("n_steps")) o.n_steps = static_cast<int>(get_int(sampler, "sampler", "n_steps", 1, 1));
  const std::string preset_name = get_string(sampler, "sampler", "preset", "sol-hmc");

  RunConfig cfg;
  try {
    cfg.sampler = preset(preset_name, o);
  } catch (const ValidationError& e) {
    throw ConfigError("sampler.preset", e.what());
  }
  auto& s = cfg.sampler;
  const bool has_min = sampler && sampler->get("n_steps_min");
  const bool has_max = sampler && sampler->get("n_steps_max");
  if (has_min != has_max) throw ConfigError("sampler.n_steps_min", "n_steps_min and n_steps_max go together");
  if (has_min) {
    const int lo = static_cast<int>(get_int(sampler, "sampler", "n_steps_min", 1, 1));
    const int hi = static_cast<int>(get_int(sampler, "sampler", "n_steps_max", 1, 1));
    if (hi < lo) throw ConfigError("sampler.n_steps_max", "must be >= n_steps_min");
    s.integrator.random_steps = {{lo, hi}};
  }
  s.integrator.gamma2 = get_real_array(sampler, "sampler", "gamma2", {});
  if (!s.integrator.gamma2.empty() && o.iota)
    throw ConfigError("sampler.gamma2", "iota requires Gamma_2 = I; use delta with gamma2");

  s.length = get_real(prior, "prior", "length", s.length);
  s.modes = static_cast<std::size_t>(get_int(prior, "prior", "modes", static_cast<std::int64_t>(s.modes), 1));
  s.grid = static_cast<std::size_t>(get_int(prior, "prior", "grid", static_cast<std::int64_t>(4 * s.modes), 2));
  cfg.sobolev_index = get_real(prior, "prior", "sobolev_index", 0.0);
  s.target_label = get_string(target, "target", "label", s.target_label);

  s.iterations = static_cast<std::size_t>(get_int(run, "run", "iterations", static_cast<std::int64_t>(s.iterations), 0));
  if (run && run->get("seed")) {
    const toml::node* n = run->get("seed");
    if (auto i = n->as_integer()) {
      s.seed = static_cast<std::uint64_t>(i->get());
    } else if (auto str = n->value<std::string>()) {
      try {
        s.seed = std::stoull(*str);
      } catch (const std::exception&) {
        throw ConfigError("run.seed", "not an unsigned 64-bit integer");
      }
    } else {
      throw ConfigError("run.seed", "expected an integer");
    }
  }
  s.thinning = static_cast<std::size_t>(get_int(run, "run", "thinning", 1, 1));
  s.observables = get_string_array(run, "run", "observables", s.observables);
  s.store_snapshots = get_bool(run, "run", "store_snapshots", false);
  s.start = get_string(run, "run", "start", s.start);
  if (s.start != "prior" && s.start != "well") throw ConfigError("run.start", "expected \"prior\" or \"well\"");
  cfg.burn_in = get_real(run, "run", "burn_in", cfg.burn_in);
  if (!(cfg.burn_in >= 0.0 && cfg.burn_in < 1.0)) throw ConfigError("run.burn_in", "must lie in [0, 1)");

  auto& st = cfg.study;
  st.ladder = get_real_array(study, "study", "ladder", st.ladder);
  st.t_final = get_real(study, "study", "t_final", st.t_final);
  st.trajectories = static_cast<std::size_t>(get_int(study, "study", "trajectories", static_cast<std::int64_t>(st.trajectories), 0));
  st.sde_trajectories = static_cast<std::size_t>(get_int(study, "study", "sde_trajectories", 0, 0));
  st.sde_dt = get_real(study, "study", "sde_dt", st.sde_dt);
  st.steps = static_cast<std::size_t>(get_int(study, "study", "steps", static_cast<std::int64_t>(st.steps), 1));
  st.modes_checked = static_cast<std::size_t>(get_int(study, "study", "modes_checked", static_cast<std::int64_t>(st.modes_checked), 1));
  st.include_sde = get_bool(study, "study", "include_sde", st.include_sde);
  st.sde_t_final = get_real(study, "study", "sde_t_final", st.sde_t_final);
  st.sde_invariance_dt = get_real(study, "study", "sde_invariance_dt", st.sde_invariance_dt);

  // Map library validation failures back onto config keys.
  try {
    SpectralPrior::brownian_bridge(s.length, s.modes, cfg.sobolev_index);
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    throw ConfigError(what.find("sobolev") != std::string::npos ? "prior.sobolev_index"
                      : what.find("length") != std::string::npos ? "prior.length" : "prior.modes",
                      what);
  }
  if (s.grid < 2 * s.modes) throw ConfigError("prior.grid", "grid must be at least 2 * modes");
  const auto labels = target_labels();
  if (std::find(labels.begin(), labels.end(), s.target_label) == labels.end())
    throw ConfigError("target.label", "unknown target '" + s.target_label + "'");
  try {
    s.integrator.validate(s.modes);
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    throw ConfigError(what.find("gamma2") != std::string::npos ? "sampler.gamma2"
                      : what.find("delta") != std::string::npos ? "sampler.delta"
                      : what.find("n_steps") != std::string::npos ? "sampler.n_steps" : "sampler.h",
                      what);
  }
  const auto& known = known_observables();
  for (const auto& name : s.observables)
    if (std::find(known.begin(), known.end(), name) == known.end())
      throw ConfigError("run.observables", "unknown observable '" + name + "'");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

std::string to_toml(const RunConfig& config) {
  const auto& s = config.sampler;
  toml::table prior{{"length", s.length},
                    {"modes", static_cast<std::int64_t>(s.modes)},
                    {"grid", static_cast<std::int64_t>(s.grid)},
                    {"sobolev_index", config.sobolev_index}};
  toml::table target{{"label", s.target_label}};
  toml::table sampler{{"preset", s.preset}, {"h", s.integrator.h}, {"n_steps", s.integrator.n_steps}};
  if (s.integrator.random_steps) {
    sampler.insert("n_steps_min", s.integrator.random_steps->first);
    sampler.insert("n_steps_max", s.integrator.random_steps->second);
  }
  if (s.preset == "sol-hmc") {
    if (s.integrator.identity_gamma() && std::isfinite(s.integrator.delta)) {
      sampler.insert("delta", s.integrator.delta);
    } else if (s.integrator.identity_gamma()) {
      sampler.insert("iota", 1.0);
    } else {
      sampler.insert("delta", s.integrator.delta);
      toml::array g;
      for (double x : s.integrator.gamma2) g.push_back(x);
      sampler.insert("gamma2", g);
    }
  }
  toml::array obs;
  for (const auto& o : s.observables) obs.push_back(o);
  toml::table run{{"iterations", static_cast<std::int64_t>(s.iterations)},
                  {"seed", std::to_string(s.seed)},
                  {"thinning", static_cast<std::int64_t>(s.thinning)},
                  {"observables", obs},
                  {"store_snapshots", s.store_snapshots},
                  {"start", s.start},
                  {"burn_in", config.burn_in}};
  const auto& st = config.study;
  toml::array ladder;
  for (double d : st.ladder) ladder.push_back(d);
  toml::table study{{"ladder", ladder},
                    {"t_final", st.t_final},
                    {"trajectories", static_cast<std::int64_t>(st.trajectories)},
                    {"sde_trajectories", static_cast<std::int64_t>(st.sde_trajectories)},
                    {"sde_dt", st.sde_dt},
                    {"steps", static_cast<std::int64_t>(st.steps)},
                    {"modes_checked", static_cast<std::int64_t>(st.modes_checked)},
                    {"include_sde", st.include_sde},
                    {"sde_t_final", st.sde_t_final},
                    {"sde_invariance_dt", st.sde_invariance_dt}};
  toml::table root{{"prior", prior}, {"target", target}, {"sampler", sampler}, {"run", run}, {"study", study}};
  std::ostringstream out;
  out << root << "\n";
  return out.str();
}

}  // namespace solhmc::cli
