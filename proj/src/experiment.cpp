#include "ballrl/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ballrl/errors.hpp"
#include "ballrl/instance_io.hpp"
#include "ballrl/oracle.hpp"
#include "ballrl/rng.hpp"
#include "ballrl/simulator.hpp"

namespace ballrl::experiment {

namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

// Strict view of one JSON object: every key must be consumed before finish().
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) fail("expected an object");
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("config " + (path_.empty() ? std::string("root") : path_) + ": " + what);
  }
  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* get(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }
  const json& need(const std::string& key) {
    const json* v = get(key);
    if (!v) fail("missing required key '" + key + "'");
    return *v;
  }
  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) fail("unknown key '" + key + "'");
    }
  }

  double number(const json& v, const std::string& key) const {
    if (!v.is_number()) fail("'" + key + "' must be a number");
    return v.get<double>();
  }
  std::uint64_t count(const json& v, const std::string& key) const {
    if (!v.is_number_unsigned()) fail("'" + key + "' must be a nonnegative integer");
    return v.get<std::uint64_t>();
  }
  bool boolean(const json& v, const std::string& key) const {
    if (!v.is_boolean()) fail("'" + key + "' must be true or false");
    return v.get<bool>();
  }
  std::string text(const json& v, const std::string& key) const {
    if (!v.is_string()) fail("'" + key + "' must be a string");
    return v.get<std::string>();
  }
  std::pair<double, double> pair(const json& v, const std::string& key) const {
    if (!v.is_array() || v.size() != 2) fail("'" + key + "' must be a two-element array");
    return {number(v[0], key), number(v[1], key)};
  }
  template <class T, class F>
  std::vector<T> list(const json& v, const std::string& key, F&& item) const {
    if (!v.is_array()) fail("'" + key + "' must be an array");
    std::vector<T> out;
    for (const auto& x : v) out.push_back(item(x, key));
    return out;
  }

  std::optional<double> opt_number(const std::string& key) {
    const json* v = get(key);
    return v ? std::optional<double>(number(*v, key)) : std::nullopt;
  }
  std::optional<std::uint64_t> opt_count(const std::string& key) {
    const json* v = get(key);
    return v ? std::optional<std::uint64_t>(count(*v, key)) : std::nullopt;
  }
  std::optional<bool> opt_bool(const std::string& key) {
    const json* v = get(key);
    return v ? std::optional<bool>(boolean(*v, key)) : std::nullopt;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

GeneratorSpec parse_generator(const json& j) {
  Obj o(j, "instance.generate");
  GeneratorSpec spec;
  GeneratorConfig& g = spec.base;
  if (auto v = o.opt_count("d")) g.dim = *v;
  if (auto v = o.opt_count("H")) g.horizon = *v;
  if (const json* v = o.get("states_per_step")) {
    if (v->is_array()) {
      g.states_per_step.clear();
      for (const auto& x : *v) g.states_per_step.push_back(o.count(x, "states_per_step"));
    } else {
      spec.states_uniform = o.count(*v, "states_per_step");
    }
  } else {
    spec.states_uniform = 1;
  }
  if (const json* v = o.get("action_set_family")) {
    try {
      g.action_set_family = shape_kind_from_string(o.text(*v, "action_set_family"));
    } catch (const ConfigError& e) {
      o.fail(e.what());
    }
  }
  const bool has_range = o.has("radius_range");
  const bool has_fraction = o.has("radius_fraction");
  if (has_range && has_fraction) o.fail("give either 'radius_range' or 'radius_fraction', not both");
  if (const json* v = o.get("radius_range")) g.radius_range = o.pair(*v, "radius_range");
  if (const json* v = o.get("radius_fraction")) {
    auto f = o.pair(*v, "radius_fraction");
    if (!(f.first > 0.0 && f.first <= f.second && f.second <= 1.0)) {
      o.fail("'radius_fraction' must satisfy 0 < lo <= hi <= 1");
    }
    spec.radius_fraction = f;
  }
  if (const json* v = o.get("kernel")) {
    try {
      g.kernel_family = kernel_kind_from_string(o.text(*v, "kernel"));
    } catch (const ConfigError& e) {
      o.fail(e.what());
    }
  }
  g.theta_target = o.opt_number("theta_target");
  if (auto v = o.opt_count("seed")) g.seed = *v;
  if (auto v = o.opt_count("max_rejections")) g.max_rejections = *v;
  if (auto v = o.opt_bool("identical_sets_per_step")) g.identical_sets_per_step = *v;
  if (auto v = o.opt_number("ellipsoid_aspect")) g.ellipsoid_aspect = *v;
  if (const json* v = o.get("feature_alignment")) g.feature_alignment = o.pair(*v, "feature_alignment");
  if (auto v = o.opt_number("softmax_weight_scale")) g.softmax_weight_scale = *v;
  if (auto v = o.opt_number("noise_half_width"); v && *v > 0.0) g.noise = BoundedUniformNoise{*v};
  if (auto v = o.opt_bool("vary_with_seed")) spec.vary_with_seed = *v;
  o.finish();
  return spec;
}

AlgorithmSpec parse_algorithm(const json& j) {
  Obj o(j, "algorithm");
  AlgorithmSpec a;
  const std::string name = o.text(o.need("name"), "name");
  if (name == "convex") {
    a.kind = Algorithm::Convex;
    if (auto v = o.opt_number("epsilon")) a.convex.epsilon = *v;
    if (auto v = o.opt_number("delta")) a.convex.delta = *v;
    if (auto v = o.opt_count("m")) a.convex.m = *v;
    if (auto v = o.opt_bool("share_baseline")) a.convex.share_baseline = *v;
    try {
      a.convex.validate();
    } catch (const ConfigError& e) {
      o.fail(e.what());
    }
  } else if (name == "diffr") {
    a.kind = Algorithm::DiffR;
    if (auto v = o.opt_number("epsilon")) a.diffr.epsilon = *v;
    if (auto v = o.opt_number("delta")) a.diffr.delta = *v;
    if (auto v = o.opt_count("m1_override")) a.diffr.m1_override = *v;
    if (auto v = o.opt_count("m2_override")) a.diffr.m2_override = *v;
    try {
      a.diffr.validate();
    } catch (const ConfigError& e) {
      o.fail(e.what());
    }
  } else {
    o.fail("'name' must be \"convex\" or \"diffr\"");
  }
  o.finish();
  return a;
}

SweepSpec parse_sweep(const json& j) {
  Obj o(j, "sweep");
  SweepSpec s;
  auto counts = [&](const json& x, const std::string& k) { return std::size_t(o.count(x, k)); };
  auto numbers = [&](const json& x, const std::string& k) { return o.number(x, k); };
  if (const json* v = o.get("d")) s.d = o.list<std::size_t>(*v, "d", counts);
  if (const json* v = o.get("H")) s.H = o.list<std::size_t>(*v, "H", counts);
  if (const json* v = o.get("epsilon")) s.epsilon = o.list<double>(*v, "epsilon", numbers);
  if (const json* v = o.get("m")) s.m = o.list<std::size_t>(*v, "m", counts);
  if (const json* v = o.get("m_fraction")) s.m_fraction = o.list<double>(*v, "m_fraction", numbers);
  if (s.m && s.m_fraction) o.fail("give either 'm' or 'm_fraction', not both");
  o.finish();
  return s;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

ordered generator_json(const GeneratorSpec& spec) {
  const GeneratorConfig& g = spec.base;
  ordered o;
  o["d"] = g.dim;
  o["H"] = g.horizon;
  if (spec.states_uniform) {
    o["states_per_step"] = *spec.states_uniform;
  } else {
    o["states_per_step"] = g.states_per_step;
  }
  o["action_set_family"] = std::string(to_string(g.action_set_family));
  if (spec.radius_fraction) {
    o["radius_fraction"] = {spec.radius_fraction->first, spec.radius_fraction->second};
  } else {
    o["radius_range"] = {g.radius_range.first, g.radius_range.second};
  }
  o["kernel"] = std::string(to_string(g.kernel_family));
  o["theta_target"] = g.theta_target ? ordered(*g.theta_target) : ordered(nullptr);
  o["seed"] = g.seed;
  o["max_rejections"] = g.max_rejections;
  o["identical_sets_per_step"] = g.identical_sets_per_step;
  o["ellipsoid_aspect"] = g.ellipsoid_aspect;
  o["feature_alignment"] = {g.feature_alignment.first, g.feature_alignment.second};
  o["softmax_weight_scale"] = g.softmax_weight_scale;
  const auto* noise = std::get_if<BoundedUniformNoise>(&g.noise);
  o["noise_half_width"] = noise ? noise->half_width : 0.0;
  o["vary_with_seed"] = spec.vary_with_seed;
  return o;
}

ordered algorithm_json(const AlgorithmSpec& a) {
  ordered o;
  o["name"] = to_string(a.kind);
  if (a.kind == Algorithm::Convex) {
    o["epsilon"] = a.convex.epsilon;
    o["delta"] = a.convex.delta;
    o["m"] = a.convex.m ? ordered(*a.convex.m) : ordered(nullptr);
    o["share_baseline"] = a.convex.share_baseline;
  } else {
    o["epsilon"] = a.diffr.epsilon;
    o["delta"] = a.diffr.delta;
    o["m1_override"] = a.diffr.m1_override ? ordered(*a.diffr.m1_override) : ordered(nullptr);
    o["m2_override"] = a.diffr.m2_override ? ordered(*a.diffr.m2_override) : ordered(nullptr);
  }
  return o;
}

template <class T>
ordered opt_list(const std::optional<std::vector<T>>& v) {
  return v ? ordered(*v) : ordered(nullptr);
}

std::uint64_t expected_count(const RunRecord& r, const ExperimentConfig& cfg, const DiffRParameters* p) {
  if (cfg.algorithm.kind == Algorithm::Convex) {
    return convex_trajectory_count(*r.m, r.horizon, r.dim, cfg.algorithm.convex.share_baseline);
  }
  return std::uint64_t(*r.outer_iterations) * p->trajectories_per_iteration(r.dim);
}

}  // namespace

std::string to_string(Algorithm a) { return a == Algorithm::Convex ? "convex" : "diffr"; }

GeneratorConfig GeneratorSpec::resolve(std::uint64_t run_seed) const {
  GeneratorConfig g = base;
  if (states_uniform) g.states_per_step.assign(g.horizon, *states_uniform);
  if (radius_fraction) {
    const double cap = g.radius_cap();
    g.radius_range = {radius_fraction->first * cap, radius_fraction->second * cap};
  }
  if (vary_with_seed) g.seed = base.seed + run_seed;
  return g;
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  Obj o(doc, "");
  const json& version = o.need("version");
  if (!version.is_number_integer() || version.get<int>() != kConfigVersion) {
    o.fail("unsupported 'version' (expected " + std::to_string(kConfigVersion) + ")");
  }

  ExperimentConfig cfg;
  {
    Obj inst(o.need("instance"), "instance");
    if (const json* g = inst.get("generate")) cfg.instance.generate = parse_generator(*g);
    if (const json* f = inst.get("file")) {
      std::filesystem::path p = inst.text(*f, "file");
      cfg.instance.file = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    if (cfg.instance.generate.has_value() == cfg.instance.file.has_value()) {
      inst.fail("give exactly one of 'generate' or 'file'");
    }
    inst.finish();
  }
  cfg.algorithm = parse_algorithm(o.need("algorithm"));
  if (const json* s = o.get("seeds")) {
    cfg.seeds = o.list<std::uint64_t>(*s, "seeds", [&](const json& x, const std::string& k) { return o.count(x, k); });
    if (cfg.seeds.empty()) o.fail("'seeds' must not be empty");
  }
  if (const json* t = o.get("threads")) cfg.threads = int(o.count(*t, "threads"));
  if (const json* out = o.get("output")) cfg.output = o.text(*out, "output");
  if (const json* s = o.get("sweep")) cfg.sweep = parse_sweep(*s);
  o.finish();

  if (cfg.instance.generate) {
    try {
      cfg.instance.generate->resolve(0).validate();
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("config instance.generate: ") + e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

std::string canonical_config(const ExperimentConfig& cfg) {
  ordered o;
  o["version"] = kConfigVersion;
  ordered inst;
  if (cfg.instance.generate) {
    inst["generate"] = generator_json(*cfg.instance.generate);
  } else {
    inst["file"] = cfg.instance.file->generic_string();
  }
  o["instance"] = inst;
  o["algorithm"] = algorithm_json(cfg.algorithm);
  o["seeds"] = cfg.seeds;
  if (cfg.sweep) {
    ordered s;
    s["d"] = opt_list(cfg.sweep->d);
    s["H"] = opt_list(cfg.sweep->H);
    s["epsilon"] = opt_list(cfg.sweep->epsilon);
    s["m"] = opt_list(cfg.sweep->m);
    s["m_fraction"] = opt_list(cfg.sweep->m_fraction);
    o["sweep"] = s;
  }
  return o.dump();
}

std::string config_hash(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_config(cfg))));
  return buf;
}

LinearQStarMdp prepare_instance(const ExperimentConfig& cfg, std::uint64_t seed) {
  LinearQStarMdp mdp = cfg.instance.generate ? generate_instance(cfg.instance.generate->resolve(seed))
                                             : load_instance(*cfg.instance.file);
  const AssumptionReport report = verify_assumptions(mdp);
  if (!report.passed()) throw CertificationFailure("instance failed verification: " + report.summary());
  return mdp;
}

RunRecord run_once(const ExperimentConfig& cfg, const LinearQStarMdp& mdp, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  RunRecord r;
  r.algorithm = to_string(cfg.algorithm.kind);
  r.config_hash = config_hash(cfg);
  r.seed = seed;
  if (cfg.instance.generate) r.instance_seed = cfg.instance.generate->resolve(seed).seed;
  r.dim = mdp.dim;
  r.horizon = mdp.horizon;
  r.epsilon = cfg.algorithm.epsilon();

  TrajectorySource env(mdp, cfg.threads);
  const RngStream stream = RngStream(seed).child(r.algorithm);
  Policy policy;
  std::optional<DiffRParameters> params;
  if (cfg.algorithm.kind == Algorithm::Convex) {
    // Probes reuse the radius revealed by one bootstrap episode, so they only stay
    // in-set when every state of a step shares its action set.
    for (std::size_t h = 0; h < mdp.horizon; ++h) {
      for (std::size_t s = 1; s < mdp.state_count(h); ++s) {
        if (!(mdp.state(h, s).action_set == mdp.state(h, 0).action_set)) {
          throw ConfigError("convex needs identical action sets within each step (step " + std::to_string(h + 1) +
                            " differs); set identical_sets_per_step");
        }
      }
    }
    r.delta = cfg.algorithm.convex.delta;
    ConvexResult res = run_convex(env, cfg.algorithm.convex, stream);
    r.m = res.m;
    policy = std::move(res.policy);
  } else {
    r.delta = cfg.algorithm.diffr.delta;
    DiffRResult res = run_diffr(env, cfg.algorithm.diffr, stream);
    params = res.params;
    r.m1 = res.params.m1;
    r.m2 = res.params.m2;
    r.overrides = res.params.overridden;
    r.outer_iterations = res.outer_iterations;
    policy = std::move(res.policy);
  }
  r.trajectories_used = env.trajectories_used();
  r.trajectories_expected = expected_count(r, cfg, params ? &*params : nullptr);
  if (r.trajectories_used != r.trajectories_expected) {
    throw InvariantViolation("budget audit: used " + std::to_string(r.trajectories_used) + " trajectories, expected " +
                             std::to_string(r.trajectories_expected));
  }
  r.epsilon_gap = oracle::epsilon_gap(mdp, policy);
  if (r.epsilon_gap < -1e-9) throw InvariantViolation("negative epsilon gap " + fmt(r.epsilon_gap));
  r.success = r.epsilon_gap <= r.epsilon;
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg) {
  std::vector<RunRecord> out;
  std::optional<LinearQStarMdp> shared;
  for (std::uint64_t seed : cfg.seeds) {
    if (cfg.instance.file) {
      if (!shared) shared = prepare_instance(cfg, seed);
      out.push_back(run_once(cfg, *shared, seed));
    } else {
      out.push_back(run_once(cfg, prepare_instance(cfg, seed), seed));
    }
  }
  return out;
}

std::string record_to_json(const RunRecord& r) {
  ordered o;
  o["algorithm"] = r.algorithm;
  o["config_hash"] = r.config_hash;
  o["seed"] = r.seed;
  o["instance_seed"] = r.instance_seed ? ordered(*r.instance_seed) : ordered(nullptr);
  o["d"] = r.dim;
  o["H"] = r.horizon;
  o["epsilon"] = r.epsilon;
  o["delta"] = r.delta;
  if (r.m) o["m"] = *r.m;
  if (r.m1) o["m1"] = *r.m1;
  if (r.m2) o["m2"] = *r.m2;
  if (r.overrides) o["overrides"] = *r.overrides;
  if (r.outer_iterations) o["outer_iterations"] = *r.outer_iterations;
  o["trajectories_used"] = r.trajectories_used;
  o["trajectories_expected"] = r.trajectories_expected;
  o["epsilon_gap"] = r.epsilon_gap;
  o["success"] = r.success;
  o["wall_time_s"] = r.wall_time_s;
  return o.dump();
}

RunRecord record_from_json(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error&) {
    throw FormatError("not valid JSON");
  }
  if (!j.is_object()) throw FormatError("record must be a JSON object");
  auto need = [&](const char* key) -> const json& {
    auto it = j.find(key);
    if (it == j.end()) throw FormatError(std::string("missing field '") + key + "'");
    return *it;
  };
  auto as_u64 = [](const json& v, const char* key) {
    if (!v.is_number_unsigned()) throw FormatError(std::string("field '") + key + "' must be a nonnegative integer");
    return v.get<std::uint64_t>();
  };
  auto as_num = [](const json& v, const char* key) {
    if (!v.is_number()) throw FormatError(std::string("field '") + key + "' must be a number");
    return v.get<double>();
  };
  auto opt_u64 = [&](const char* key) -> std::optional<std::uint64_t> {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return as_u64(*it, key);
  };

  RunRecord r;
  const json& alg = need("algorithm");
  const json& hash = need("config_hash");
  if (!alg.is_string() || !hash.is_string()) throw FormatError("'algorithm' and 'config_hash' must be strings");
  r.algorithm = alg.get<std::string>();
  r.config_hash = hash.get<std::string>();
  r.seed = as_u64(need("seed"), "seed");
  r.epsilon = as_num(need("epsilon"), "epsilon");
  r.epsilon_gap = as_num(need("epsilon_gap"), "epsilon_gap");
  r.trajectories_used = as_u64(need("trajectories_used"), "trajectories_used");
  const json& success = need("success");
  if (!success.is_boolean()) throw FormatError("field 'success' must be true or false");
  r.success = success.get<bool>();
  r.instance_seed = opt_u64("instance_seed");
  if (auto v = opt_u64("d")) r.dim = *v;
  if (auto v = opt_u64("H")) r.horizon = *v;
  if (auto it = j.find("delta"); it != j.end()) r.delta = as_num(*it, "delta");
  r.m = opt_u64("m");
  r.m1 = opt_u64("m1");
  r.m2 = opt_u64("m2");
  r.outer_iterations = opt_u64("outer_iterations");
  if (auto it = j.find("overrides"); it != j.end() && it->is_boolean()) r.overrides = it->get<bool>();
  if (auto v = opt_u64("trajectories_expected")) r.trajectories_expected = *v;
  if (auto it = j.find("wall_time_s"); it != j.end()) r.wall_time_s = as_num(*it, "wall_time_s");
  return r;
}

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records) {
  std::vector<SummaryRow> rows;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (const RunRecord& r : records) {
    auto key = std::pair{r.algorithm, r.config_hash};
    auto [it, fresh] = index.emplace(key, rows.size());
    if (fresh) rows.push_back(SummaryRow{r.algorithm, r.config_hash, 0, 0, 0.0, -HUGE_VAL, 0.0});
    SummaryRow& row = rows[it->second];
    ++row.runs;
    row.successes += r.success ? 1 : 0;
    row.mean_gap += r.epsilon_gap;
    row.max_gap = std::max(row.max_gap, r.epsilon_gap);
    row.mean_trajectories += double(r.trajectories_used);
  }
  for (SummaryRow& row : rows) {
    row.mean_gap /= double(row.runs);
    row.mean_trajectories /= double(row.runs);
  }
  return rows;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream os;
  os << "algorithm,config_hash,runs,successes,success_rate,mean_gap,max_gap,mean_trajectories\n";
  for (const SummaryRow& r : rows) {
    os << r.algorithm << ',' << r.config_hash << ',' << r.runs << ',' << r.successes << ',' << fmt(r.success_rate())
       << ',' << fmt(r.mean_gap) << ',' << fmt(r.max_gap) << ',' << fmt(r.mean_trajectories) << '\n';
  }
  return os.str();
}

std::vector<SweepCell> sweep_cells(const ExperimentConfig& cfg) {
  if (!cfg.sweep) throw ConfigError("no cells: the config has no 'sweep' block");
  const SweepSpec& s = *cfg.sweep;
  const bool any_axis = s.d || s.H || s.epsilon || s.m || s.m_fraction;
  auto empty = [](const auto& axis) { return axis && axis->empty(); };
  if (!any_axis || empty(s.d) || empty(s.H) || empty(s.epsilon) || empty(s.m) || empty(s.m_fraction)) {
    throw ConfigError("no cells: every sweep axis must list at least one value");
  }
  if ((s.d || s.H) && !cfg.instance.generate) throw ConfigError("sweeping d or H needs a generated instance");

  auto values = [](const auto& axis) {
    using T = typename std::decay_t<decltype(*axis)>::value_type;
    return axis ? std::vector<std::optional<T>>(axis->begin(), axis->end()) : std::vector<std::optional<T>>{std::nullopt};
  };
  std::vector<SweepCell> cells;
  for (auto d : values(s.d)) {
    for (auto H : values(s.H)) {
      for (auto eps : values(s.epsilon)) {
        for (auto m : values(s.m)) {
          for (auto frac : values(s.m_fraction)) {
            ExperimentConfig c = cfg;
            c.sweep.reset();
            if (c.instance.generate) {
              GeneratorSpec& g = *c.instance.generate;
              if (d) g.base.dim = *d;
              if (H) {
                g.base.horizon = *H;
                if (!g.states_uniform) throw ConfigError("sweeping H needs a scalar 'states_per_step'");
              }
              try {
                g.resolve(0).validate();
              } catch (const ConfigError& e) {
                throw ConfigError(std::string("sweep cell ") + std::to_string(cells.size()) + ": " + e.what());
              }
            }
            AlgorithmSpec& a = c.algorithm;
            if (eps) (a.kind == Algorithm::Convex ? a.convex.epsilon : a.diffr.epsilon) = *eps;
            if (m) {
              a.convex.m = *m;
              a.diffr.m1_override = *m;
              a.diffr.m2_override = *m;
            }
            if (frac) {
              if (!(*frac > 0.0)) throw ConfigError("m_fraction values must be positive");
              std::size_t dim, hor;
              double regularity = 1.0;
              if (c.instance.generate) {
                const GeneratorConfig g = c.instance.generate->resolve(0);
                dim = g.dim;
                hor = g.horizon;
                regularity = g.family_regularity();
              } else {
                const LinearQStarMdp mdp = load_instance(*c.instance.file);
                dim = mdp.dim;
                hor = mdp.horizon;
                for (const auto& step : mdp.states) {
                  for (const StateSpec& st : step) regularity = std::max(regularity, st.action_set.regularity());
                }
              }
              auto scaled = [&](std::size_t full) { return std::max<std::size_t>(1, std::size_t(std::ceil(*frac * double(full)))); };
              if (a.kind == Algorithm::Convex) {
                a.convex.m = scaled(convex_default_m(hor, regularity, dim, a.convex.epsilon, a.convex.delta));
              } else {
                DiffRConfig plain = a.diffr;
                plain.m1_override.reset();
                plain.m2_override.reset();
                const DiffRParameters p = derive_parameters(plain, hor, dim);
                a.diffr.m1_override = scaled(p.theory_m1);
                a.diffr.m2_override = scaled(p.theory_m2);
              }
            }
            cells.push_back(SweepCell{cells.size(), std::move(c)});
          }
        }
      }
    }
  }
  return cells;
}

SweepResult run_sweep(const ExperimentConfig& cfg) {
  SweepResult out;
  for (const SweepCell& cell : sweep_cells(cfg)) {
    for (RunRecord& r : run_experiment(cell.config)) {
      out.records.push_back(std::move(r));
      out.cell_of_record.push_back(cell.index);
    }
  }
  return out;
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream os;
  os << "cell,algorithm,config_hash,d,H,epsilon,m,seed,trajectories_used,trajectories_expected,epsilon_gap,success,"
        "outer_iterations\n";
  for (std::size_t k = 0; k < result.records.size(); ++k) {
    const RunRecord& r = result.records[k];
    os << result.cell_of_record[k] << ',' << r.algorithm << ',' << r.config_hash << ',' << r.dim << ',' << r.horizon
       << ',' << fmt(r.epsilon) << ',' << (r.plot_m() ? std::to_string(*r.plot_m()) : "") << ',' << r.seed << ','
       << r.trajectories_used << ',' << r.trajectories_expected << ',' << fmt(r.epsilon_gap) << ','
       << (r.success ? 1 : 0) << ',' << (r.outer_iterations ? std::to_string(*r.outer_iterations) : "") << '\n';
  }
  return os.str();
}

ReportOutcome read_records(std::istream& in) {
  ReportOutcome out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.records.push_back(record_from_json(line));
    } catch (const FormatError& e) {
      out.errors.push_back("line " + std::to_string(number) + ": malformed record: " + e.what());
    }
  }
  std::map<std::string, std::set<std::string>> hashes;
  std::vector<std::string> order;
  for (const RunRecord& r : out.records) {
    if (!hashes.count(r.algorithm)) order.push_back(r.algorithm);
    hashes[r.algorithm].insert(r.config_hash);
  }
  for (const std::string& alg : order) {
    if (hashes[alg].size() > 1) {
      out.warnings.push_back("warning: " + alg + " records come from " + std::to_string(hashes[alg].size()) +
                             " different config hashes; groups are kept separate");
    }
  }
  return out;
}

std::string report_table(const ReportOutcome& outcome) {
  const std::vector<SummaryRow> rows = summarize(outcome.records);
  std::vector<std::string> algorithms;
  for (const SummaryRow& r : rows) {
    if (std::find(algorithms.begin(), algorithms.end(), r.algorithm) == algorithms.end()) algorithms.push_back(r.algorithm);
  }
  std::ostringstream os;
  for (const std::string& w : outcome.warnings) os << w << '\n';
  for (const std::string& alg : algorithms) {
    os << "== " << alg << " ==\n";
    char line[256];
    std::snprintf(line, sizeof line, "%-18s %6s %10s %8s %12s %12s %18s\n", "config_hash", "runs", "successes", "rate",
                  "mean_gap", "max_gap", "mean_trajectories");
    os << line;
    for (const SummaryRow& r : rows) {
      if (r.algorithm != alg) continue;
      const std::string frac = std::to_string(r.successes) + "/" + std::to_string(r.runs);
      std::snprintf(line, sizeof line, "%-18s %6zu %10s %8.4f %12.6g %12.6g %18.1f\n", r.config_hash.c_str(), r.runs,
                    frac.c_str(), r.success_rate(), r.mean_gap, r.max_gap, r.mean_trajectories);
      os << line;
    }
  }
  if (outcome.records.empty()) os << "no valid records\n";
  return os.str();
}

std::string plot_data_csv(const std::vector<RunRecord>& records) {
  std::ostringstream os;
  os << "series,algorithm,config_hash,x,y\n";
  for (const RunRecord& r : records) {
    os << "gap_vs_trajectories," << r.algorithm << ',' << r.config_hash << ',' << r.trajectories_used << ','
       << fmt(r.epsilon_gap) << '\n';
  }
  struct Cell {
    std::string algorithm, hash;
    std::size_t m, runs = 0, successes = 0;
  };
  std::vector<Cell> cells;
  for (const RunRecord& r : records) {
    if (!r.plot_m()) continue;
    auto it = std::find_if(cells.begin(), cells.end(), [&](const Cell& c) {
      return c.algorithm == r.algorithm && c.hash == r.config_hash && c.m == *r.plot_m();
    });
    if (it == cells.end()) it = cells.insert(cells.end(), Cell{r.algorithm, r.config_hash, *r.plot_m()});
    ++it->runs;
    it->successes += r.success ? 1 : 0;
  }
  for (const Cell& c : cells) {
    os << "success_vs_m," << c.algorithm << ',' << c.hash << ',' << c.m << ','
       << fmt(double(c.successes) / double(c.runs)) << '\n';
  }
  return os.str();
}

std::filesystem::path output_dir(const std::optional<std::string>& cli, const ExperimentConfig* cfg) {
  if (cli) return *cli;
  if (cfg && cfg->output) return *cfg->output;
  if (const char* env = std::getenv("BALLRL_OUTPUT_DIR"); env && *env) return env;
  return "ballrl-out";
}

}  // namespace ballrl::experiment
