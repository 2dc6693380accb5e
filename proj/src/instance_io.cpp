#include "ballrl/instance_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ballrl/errors.hpp"

namespace ballrl {

namespace {

using ordered = nlohmann::ordered_json;
using nlohmann::json;

ordered vec(const FeatureVector& v) { return ordered(v.values()); }

ordered set_to_json(const ActionSet& set) {
  ordered out;
  out["shape"] = std::string(to_string(set.kind()));
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Ball>) {
          out["radius"] = s.radius;
        } else if constexpr (std::is_same_v<S, Box>) {
          out["half_width"] = s.half_width;
        } else {
          out["semi_axes"] = s.semi_axes;
        }
      },
      set.shape());
  return out;
}

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw FormatError("instance " + where + ": " + what);
}

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) bad(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) bad(where, std::string("missing field '") + key + "'");
  return *it;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) bad(where, "expected a number");
  return j.get<double>();
}

std::size_t count(const json& j, const std::string& where) {
  if (!j.is_number_unsigned()) bad(where, "expected a nonnegative integer");
  return j.get<std::size_t>();
}

std::vector<double> numbers(const json& j, const std::string& where) {
  if (!j.is_array()) bad(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(number(j[k], where + "[" + std::to_string(k) + "]"));
  return out;
}

FeatureVector vector_of(const json& j, std::size_t dim, const std::string& where) {
  std::vector<double> v = numbers(j, where);
  if (v.size() != dim) bad(where, "expected " + std::to_string(dim) + " entries, found " + std::to_string(v.size()));
  return FeatureVector(std::move(v));
}

ActionSet set_from_json(const json& j, std::size_t dim, const std::string& where) {
  const json& shape = field(j, "shape", where);
  if (!shape.is_string()) bad(where, "shape must be a string");
  try {
    switch (shape_kind_from_string(shape.get<std::string>())) {
      case ShapeKind::Ball:
        return ActionSet::ball(dim, number(field(j, "radius", where), where + ".radius"));
      case ShapeKind::Box:
        return ActionSet::box(dim, number(field(j, "half_width", where), where + ".half_width"));
      case ShapeKind::Ellipsoid: {
        std::vector<double> axes = numbers(field(j, "semi_axes", where), where + ".semi_axes");
        if (axes.size() != dim) bad(where, "semi_axes must have d entries");
        return ActionSet::ellipsoid(std::move(axes));
      }
    }
  } catch (const ConfigError& e) {
    bad(where, e.what());
  }
  bad(where, "unknown shape");
}

}  // namespace

std::string instance_to_json(const LinearQStarMdp& mdp) {
  ordered doc;
  doc["format"] = kInstanceFormat;
  doc["version"] = kInstanceVersion;
  doc["d"] = mdp.dim;
  doc["H"] = mdp.horizon;
  doc["kernel"] = std::string(to_string(mdp.kernel.kind()));
  ordered mode;
  mode["identical_sets_per_step"] = mdp.identical_sets_per_step;
  mode["theta_norm"] = mdp.theta_norm ? ordered(*mdp.theta_norm) : ordered(nullptr);
  doc["mode"] = mode;
  ordered theta = ordered::array();
  for (const auto& t : mdp.theta_star) theta.push_back(vec(t));
  doc["theta_star"] = theta;
  doc["mu"] = mdp.mu;
  ordered noise;
  if (const auto* n = std::get_if<BoundedUniformNoise>(&mdp.noise)) {
    noise["kind"] = "bounded_uniform";
    noise["half_width"] = n->half_width;
  } else {
    noise["kind"] = "none";
  }
  doc["noise"] = noise;

  ordered steps = ordered::array();
  for (std::size_t h = 0; h < mdp.horizon; ++h) {
    ordered step = ordered::array();
    for (std::size_t s = 0; s < mdp.state_count(h); ++s) {
      const StateSpec& st = mdp.state(h, s);
      ordered js;
      js["id"] = st.id;
      js["phi"] = vec(st.phi);
      js["action_set"] = set_to_json(st.action_set);
      if (!mdp.is_terminal(h)) {
        ordered tr;
        const TransitionRow& row = mdp.kernel.row(h, s);
        if (const auto* t = std::get_if<ActionIndependentRow>(&row)) {
          tr["probs"] = t->probs;
        } else {
          const auto& soft = std::get<SoftmaxAffineRow>(row);
          ordered w = ordered::array();
          for (const auto& x : soft.weights) w.push_back(vec(x));
          tr["weights"] = w;
          tr["biases"] = soft.biases;
        }
        js["transition"] = tr;
      }
      const RewardRow& rr = mdp.rewards[h][s];
      ordered rw;
      rw["offset"] = rr.offset;
      rw["slope"] = vec(rr.slope);
      rw["continuation"] = rr.continuation;
      js["reward"] = rw;
      step.push_back(js);
    }
    steps.push_back(step);
  }
  doc["steps"] = steps;
  return doc.dump(2) + "\n";
}

LinearQStarMdp instance_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("instance: not valid JSON: ") + e.what());
  }
  const std::string top = "header";
  const json& format = field(doc, "format", top);
  if (!format.is_string() || format.get<std::string>() != kInstanceFormat) {
    bad(top, std::string("format must be \"") + kInstanceFormat + "\"");
  }
  const json& version = field(doc, "version", top);
  if (!version.is_number_integer() || version.get<int>() != kInstanceVersion) {
    bad(top, "unsupported version (expected " + std::to_string(kInstanceVersion) + ")");
  }

  LinearQStarMdp mdp;
  mdp.dim = count(field(doc, "d", top), "d");
  mdp.horizon = count(field(doc, "H", top), "H");
  if (mdp.dim == 0 || mdp.horizon == 0) bad(top, "d and H must be positive");
  const json& kernel_name = field(doc, "kernel", top);
  if (!kernel_name.is_string()) bad("kernel", "expected a string");
  KernelKind kind;
  try {
    kind = kernel_kind_from_string(kernel_name.get<std::string>());
  } catch (const Error& e) {
    bad("kernel", e.what());
  }

  const json& mode = field(doc, "mode", top);
  const json& identical = field(mode, "identical_sets_per_step", "mode");
  if (!identical.is_boolean()) bad("mode.identical_sets_per_step", "expected a boolean");
  mdp.identical_sets_per_step = identical.get<bool>();
  const json& tn = field(mode, "theta_norm", "mode");
  if (!tn.is_null()) mdp.theta_norm = number(tn, "mode.theta_norm");

  const json& theta = field(doc, "theta_star", top);
  if (!theta.is_array() || theta.size() != mdp.horizon) bad("theta_star", "expected H vectors");
  for (std::size_t h = 0; h < mdp.horizon; ++h) {
    mdp.theta_star.push_back(vector_of(theta[h], mdp.dim, "theta_star[" + std::to_string(h) + "]"));
  }
  mdp.mu = numbers(field(doc, "mu", top), "mu");

  const json& noise = field(doc, "noise", top);
  const json& noise_kind = field(noise, "kind", "noise");
  if (noise_kind == "none") {
    mdp.noise = NoNoise{};
  } else if (noise_kind == "bounded_uniform") {
    mdp.noise = BoundedUniformNoise{number(field(noise, "half_width", "noise"), "noise.half_width")};
  } else {
    bad("noise", "kind must be \"none\" or \"bounded_uniform\"");
  }

  const json& steps = field(doc, "steps", top);
  if (!steps.is_array() || steps.size() != mdp.horizon) bad("steps", "expected H step arrays");
  std::vector<std::vector<TransitionRow>> rows(mdp.horizon - 1);
  mdp.states.resize(mdp.horizon);
  mdp.rewards.resize(mdp.horizon);
  for (std::size_t h = 0; h < mdp.horizon; ++h) {
    const std::string sw = "steps[" + std::to_string(h) + "]";
    if (!steps[h].is_array() || steps[h].empty()) bad(sw, "expected a nonempty array of states");
    for (std::size_t s = 0; s < steps[h].size(); ++s) {
      const std::string w = sw + "[" + std::to_string(s) + "]";
      const json& js = steps[h][s];
      mdp.states[h].push_back(StateSpec{count(field(js, "id", w), w + ".id"), h,
                                        vector_of(field(js, "phi", w), mdp.dim, w + ".phi"),
                                        set_from_json(field(js, "action_set", w), mdp.dim, w + ".action_set")});

      if (h + 1 < mdp.horizon) {
        const json& tr = field(js, "transition", w);
        if (kind == KernelKind::ActionIndependent) {
          rows[h].emplace_back(ActionIndependentRow{numbers(field(tr, "probs", w + ".transition"), w + ".probs")});
        } else {
          SoftmaxAffineRow row;
          const json& weights = field(tr, "weights", w + ".transition");
          if (!weights.is_array()) bad(w + ".weights", "expected an array");
          for (std::size_t j = 0; j < weights.size(); ++j) {
            row.weights.push_back(vector_of(weights[j], mdp.dim, w + ".weights[" + std::to_string(j) + "]"));
          }
          row.biases = numbers(field(tr, "biases", w + ".transition"), w + ".biases");
          rows[h].emplace_back(std::move(row));
        }
      }

      const json& rw = field(js, "reward", w);
      RewardRow rr;
      rr.offset = number(field(rw, "offset", w + ".reward"), w + ".reward.offset");
      rr.slope = vector_of(field(rw, "slope", w + ".reward"), mdp.dim, w + ".reward.slope");
      rr.continuation = numbers(field(rw, "continuation", w + ".reward"), w + ".reward.continuation");
      mdp.rewards[h].push_back(std::move(rr));
    }
  }
  try {
    mdp.kernel = TransitionKernel(kind, std::move(rows));
  } catch (const Error& e) {
    bad("kernel", e.what());
  }
  mdp.validate();
  return mdp;
}

void save_instance(const LinearQStarMdp& mdp, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << instance_to_json(mdp);
  if (!out) throw FormatError("failed writing " + path.string());
}

LinearQStarMdp load_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open instance file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return instance_from_json(buf.str());
}

}  // namespace ballrl
