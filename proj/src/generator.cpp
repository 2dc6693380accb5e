#include "ballrl/generator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ballrl/errors.hpp"
#include "ballrl/oracle.hpp"
#include "ballrl/rng.hpp"

namespace ballrl {

namespace {

FeatureVector random_unit(std::size_t dim, Xoshiro256& rng) {
  FeatureVector u(dim);
  double n = 0.0;
  while (n < 1e-9) {
    for (std::size_t i = 0; i < dim; ++i) u[i] = standard_normal(rng);
    n = norm2(u);
  }
  return (1.0 / n) * u;
}

ActionSet sample_set(const GeneratorConfig& cfg, Xoshiro256& rng) {
  const double r = uniform(rng, cfg.radius_range.first, cfg.radius_range.second);
  switch (cfg.action_set_family) {
    case ShapeKind::Ball:
      return ActionSet::ball(cfg.dim, r);
    case ShapeKind::Box:
      return ActionSet::box(cfg.dim, r);
    case ShapeKind::Ellipsoid: {
      std::vector<double> axes(cfg.dim);
      for (double& c : axes) c = r * uniform(rng, 1.0, cfg.ellipsoid_aspect);
      axes[std::size_t(uniform01(rng) * double(cfg.dim))] = r;
      return ActionSet::ellipsoid(std::move(axes));
    }
  }
  throw ConfigError("unknown action set family");
}

// φ(s) = t·u_h + j with t a fraction of the budget 1 - η(s) and j ⊥ u_h, so that
// ‖φ(s)‖ + η(s) ≤ 1. Aligning features with θ_h keeps path reward sums nonnegative.
FeatureVector sample_feature(const GeneratorConfig& cfg, const FeatureVector& direction,
                             const ActionSet& set, Xoshiro256& rng) {
  const double budget = 1.0 - set.outer_radius();
  const auto [lo, hi] = cfg.feature_alignment;
  const double along = budget * uniform(rng, lo, hi);
  FeatureVector phi = along * direction;
  if (cfg.dim > 1) {
    FeatureVector g = random_unit(cfg.dim, rng);
    g -= dot(g, direction) * direction;
    const double gn = norm2(g);
    if (gn > 1e-9) {
      const double across = budget * std::sqrt(std::max(0.0, 1.0 - hi * hi)) * uniform01(rng);
      phi += (across / gn) * g;
    }
  }
  return phi;
}

std::vector<double> random_simplex(std::size_t n, Xoshiro256& rng) {
  std::vector<double> p(n);
  double total = 0.0;
  for (double& x : p) {
    x = uniform(rng, 0.1, 1.0);
    total += x;
  }
  for (double& x : p) x /= total;
  return p;
}

TransitionKernel sample_kernel(const GeneratorConfig& cfg, Xoshiro256& rng) {
  std::vector<std::vector<TransitionRow>> rows(cfg.horizon - 1);
  for (std::size_t h = 0; h + 1 < cfg.horizon; ++h) {
    const std::size_t next = cfg.states_per_step[h + 1];
    for (std::size_t s = 0; s < cfg.states_per_step[h]; ++s) {
      if (cfg.kernel_family == KernelKind::ActionIndependent) {
        rows[h].emplace_back(ActionIndependentRow{random_simplex(next, rng)});
        continue;
      }
      SoftmaxAffineRow row;
      for (std::size_t j = 0; j < next; ++j) {
        FeatureVector w(cfg.dim);
        for (std::size_t i = 0; i < cfg.dim; ++i) w[i] = cfg.softmax_weight_scale * standard_normal(rng);
        row.weights.push_back(std::move(w));
        row.biases.push_back(0.5 * standard_normal(rng));
      }
      rows[h].emplace_back(std::move(row));
    }
  }
  return TransitionKernel(cfg.kernel_family, std::move(rows));
}

template <class PerState>
PathSumBounds path_extrema(const LinearQStarMdp& mdp, PerState&& per_state) {
  const std::size_t H = mdp.horizon;
  std::vector<std::vector<double>> lo(H), hi(H);
  PathSumBounds out;
  for (std::size_t h = H; h-- > 0;) {
    lo[h].resize(mdp.state_count(h));
    hi[h].resize(mdp.state_count(h));
    for (std::size_t s = 0; s < mdp.state_count(h); ++s) {
      auto [rmin, rmax, exact] = per_state(h, s);
      out.rigorous = out.rigorous && exact;
      if (h + 1 < H) {
        double best_lo = HUGE_VAL, best_hi = -HUGE_VAL;
        for (std::size_t j : mdp.kernel.support(h, s)) {
          best_lo = std::min(best_lo, lo[h + 1][j]);
          best_hi = std::max(best_hi, hi[h + 1][j]);
        }
        rmin += best_lo;
        rmax += best_hi;
      }
      lo[h][s] = rmin;
      hi[h][s] = rmax;
    }
  }
  out.min_sum = HUGE_VAL;
  out.max_sum = -HUGE_VAL;
  for (std::size_t s = 0; s < mdp.state_count(0); ++s) {
    if (mdp.mu[s] <= 0.0) continue;
    out.min_sum = std::min(out.min_sum, lo[0][s]);
    out.max_sum = std::max(out.max_sum, hi[0][s]);
  }
  return out;
}

struct StateExtrema {
  double lo;
  double hi;
  bool exact;
};

}  // namespace

void GeneratorConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("generator config: " + msg); };
  if (dim == 0) fail("dim must be at least 1");
  if (horizon == 0) fail("H must be at least 1");
  if (states_per_step.size() != horizon) fail("states_per_step must have H entries");
  for (std::size_t n : states_per_step) {
    if (n == 0) fail("states_per_step entries must be at least 1");
  }
  const auto [lo, hi] = radius_range;
  if (!(lo > 0.0) || !(lo <= hi)) fail("radius_range must satisfy 0 < lo <= hi");
  if (hi > (1.0 / double(horizon)) * (1.0 + 1e-12)) {
    fail("radius_range upper bound must not exceed 1/H (path radius sum must stay <= 1)");
  }
  if (!(hi * family_regularity() < 1.0)) {
    fail("radius_range upper bound times the family parameter B must be < 1 (feature norm bound)");
  }
  if (theta_target && !(*theta_target > 0.0 && *theta_target <= 1.0)) {
    fail("theta_target must lie in (0, 1]; the degenerate value 0 is not supported");
  }
  const auto [alo, ahi] = feature_alignment;
  if (!(alo > 0.0 && alo <= ahi && ahi <= 1.0)) fail("feature_alignment must satisfy 0 < lo <= hi <= 1");
  if (!(ellipsoid_aspect >= 1.0)) fail("ellipsoid_aspect must be >= 1");
  if (max_rejections == 0) fail("max_rejections must be at least 1");
  if (!(softmax_weight_scale >= 0.0)) fail("softmax_weight_scale must be >= 0");
  if (const auto* n = std::get_if<BoundedUniformNoise>(&noise)) {
    if (!(n->half_width >= 0.0 && n->half_width <= 0.5)) fail("noise half_width must lie in [0, 0.5]");
  }
}

double GeneratorConfig::family_regularity() const {
  switch (action_set_family) {
    case ShapeKind::Ball:
      return 1.0;
    case ShapeKind::Box:
      return std::sqrt(double(dim));
    case ShapeKind::Ellipsoid:
      return ellipsoid_aspect;
  }
  return 1.0;
}

double GeneratorConfig::radius_cap() const { return 1.0 / (double(horizon) * family_regularity()); }

std::vector<std::vector<RewardRow>> backfill_rewards(const std::vector<std::vector<StateSpec>>& states,
                                                     const TransitionKernel& /*kernel*/,
                                                     const std::vector<FeatureVector>& theta_star) {
  // The kernel enters r(s,a) only through P(·|s,a), which RewardRow applies at
  // evaluation time; the continuation values depend on the next step alone.
  const std::size_t H = states.size();
  std::vector<std::vector<RewardRow>> rewards(H);
  for (std::size_t h = 0; h < H; ++h) {
    std::vector<double> continuation;
    if (h + 1 < H) {
      for (const StateSpec& nx : states[h + 1]) {
        continuation.push_back(dot(nx.phi, theta_star[h + 1]) +
                               support_value(nx.action_set, theta_star[h + 1]));
      }
    }
    for (const StateSpec& st : states[h]) {
      rewards[h].push_back(RewardRow{dot(st.phi, theta_star[h]), theta_star[h], continuation});
    }
  }
  return rewards;
}

LinearQStarMdp assemble_instance(std::size_t dim, std::vector<std::vector<StateSpec>> states,
                                 TransitionKernel kernel, std::vector<FeatureVector> theta_star,
                                 std::vector<double> mu, RewardNoise noise) {
  LinearQStarMdp mdp;
  mdp.dim = dim;
  mdp.horizon = states.size();
  std::size_t id = 0;
  for (std::size_t h = 0; h < states.size(); ++h) {
    for (StateSpec& st : states[h]) {
      st.id = id++;
      st.step = h;
    }
  }
  mdp.states = std::move(states);
  mdp.kernel = std::move(kernel);
  mdp.theta_star = std::move(theta_star);
  mdp.mu = std::move(mu);
  mdp.noise = noise;
  mdp.rewards = backfill_rewards(mdp.states, mdp.kernel, mdp.theta_star);
  mdp.validate();
  return mdp;
}

LinearQStarMdp single_path_instance(std::vector<FeatureVector> phis, std::vector<ActionSet> sets,
                                    std::vector<FeatureVector> theta_star) {
  if (phis.empty() || phis.size() != sets.size() || phis.size() != theta_star.size()) {
    throw ConfigError("single_path_instance: need one feature, set and parameter per step");
  }
  const std::size_t H = phis.size();
  const std::size_t dim = phis[0].size();
  std::vector<std::vector<StateSpec>> states(H);
  for (std::size_t h = 0; h < H; ++h) states[h].push_back(StateSpec{0, h, phis[h], sets[h]});
  std::vector<std::vector<TransitionRow>> rows(H - 1);
  for (auto& r : rows) r.emplace_back(ActionIndependentRow{{1.0}});
  return assemble_instance(dim, std::move(states), TransitionKernel(KernelKind::ActionIndependent, std::move(rows)),
                           std::move(theta_star), {1.0});
}

LinearQStarMdp generate_instance(const GeneratorConfig& cfg) {
  cfg.validate();
  Xoshiro256 rng(splitmix64(cfg.seed ^ 0x67656e6572617465ULL));
  std::string last_reason = "none";

  for (std::size_t attempt = 0; attempt < cfg.max_rejections; ++attempt) {
    const double theta_norm = cfg.theta_target ? *cfg.theta_target : uniform(rng, 0.5, 1.0);
    std::vector<FeatureVector> theta(cfg.horizon);
    std::vector<FeatureVector> directions(cfg.horizon);
    for (std::size_t h = 0; h < cfg.horizon; ++h) {
      directions[h] = random_unit(cfg.dim, rng);
      theta[h] = theta_norm * directions[h];
    }

    std::vector<std::vector<StateSpec>> states(cfg.horizon);
    for (std::size_t h = 0; h < cfg.horizon; ++h) {
      const ActionSet shared = sample_set(cfg, rng);
      for (std::size_t s = 0; s < cfg.states_per_step[h]; ++s) {
        ActionSet set = cfg.identical_sets_per_step ? shared : sample_set(cfg, rng);
        FeatureVector phi = sample_feature(cfg, directions[h], set, rng);
        states[h].push_back(StateSpec{0, h, std::move(phi), std::move(set)});
      }
    }
    TransitionKernel kernel = sample_kernel(cfg, rng);
    std::vector<double> mu = random_simplex(cfg.states_per_step[0], rng);

    LinearQStarMdp mdp = assemble_instance(cfg.dim, std::move(states), std::move(kernel), std::move(theta),
                                           std::move(mu), cfg.noise);
    mdp.identical_sets_per_step = cfg.identical_sets_per_step;
    mdp.theta_norm = theta_norm;

    const PathSumBounds bounds = reward_sum_bounds(mdp);
    if (bounds.min_sum < 0.0) {
      last_reason = "negative path reward sum";
      continue;
    }
    if (bounds.max_sum > 1.0) {
      if (cfg.theta_target) {
        // Rescaling would move ‖θ_h‖ off the requested target.
        last_reason = "path reward sum above 1 at the requested theta_target";
        continue;
      }
      const double scale = 1.0 / bounds.max_sum;
      for (FeatureVector& t : mdp.theta_star) t *= scale;
      mdp.theta_norm = theta_norm * scale;
      mdp.rewards = backfill_rewards(mdp.states, mdp.kernel, mdp.theta_star);
    }

    const AssumptionReport report = verify_assumptions(mdp);
    if (!report.passed()) {
      last_reason = "certification failed: " + report.summary();
      continue;
    }
    return mdp;
  }
  throw RejectionBudgetExceeded("no certified instance after " + std::to_string(cfg.max_rejections) +
                                " attempts (last rejection: " + last_reason + ")");
}

PathSumBounds reward_sum_bounds(const LinearQStarMdp& mdp) {
  std::vector<double> probs;
  return path_extrema(mdp, [&](std::size_t h, std::size_t s) -> StateExtrema {
    const StateSpec& st = mdp.state(h, s);
    const RewardRow& row = mdp.rewards[h][s];
    if (mdp.is_terminal(h) || mdp.kernel.kind() == KernelKind::ActionIndependent) {
      // r is affine in a: extrema are ±σ_A(slope) around the value at a = 0.
      const double base = mdp.reward(h, s, FeatureVector(mdp.dim));
      const double spread = support_value(st.action_set, row.slope);
      return {base - spread, base + spread, true};
    }
    std::vector<FeatureVector> grid = oracle::boundary_grid(st.action_set);
    const FeatureVector top = support_argmax(st.action_set, row.slope);
    grid.push_back(top);
    grid.push_back(-1.0 * top);
    grid.push_back(FeatureVector(mdp.dim));
    double lo = HUGE_VAL, hi = -HUGE_VAL;
    for (const FeatureVector& a : grid) {
      mdp.kernel.distribution(h, s, a, probs);
      const double r = mdp.reward(h, s, a, probs);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    return {lo, hi, false};
  });
}

PathSumBounds radius_sum_bounds(const LinearQStarMdp& mdp) {
  return path_extrema(mdp, [&](std::size_t h, std::size_t s) -> StateExtrema {
    const double r = mdp.state(h, s).action_set.inner_radius();
    return {r, r, true};
  });
}

bool AssumptionReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const AssumptionCheck& c) { return c.passed; });
}

const AssumptionCheck* AssumptionReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string AssumptionReport::summary() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& c : checks) {
    if (c.passed) continue;
    if (!first) os << "; ";
    os << c.name << ": " << c.detail;
    first = false;
  }
  return first ? "all checks passed" : os.str();
}

AssumptionReport verify_assumptions(const LinearQStarMdp& mdp, double tol) {
  AssumptionReport report;
  try {
    mdp.validate();
    report.checks.push_back({"structure", true, 0.0, "consistent"});
  } catch (const FormatError& e) {
    report.checks.push_back({"structure", false, 0.0, e.what()});
    return report;
  }

  auto fmt = [](double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
  };

  {
    const double residual = oracle::bellman_residual(mdp);
    report.worst_residual = residual;
    report.checks.push_back(
        {"linear_q_star", residual <= tol, residual, "max Bellman residual " + fmt(residual)});
  }

  {
    double worst = 0.0;
    std::string where = "all states";
    for (std::size_t h = 0; h < mdp.horizon; ++h) {
      for (std::size_t s = 0; s < mdp.state_count(h); ++s) {
        const StateSpec& st = mdp.state(h, s);
        const double total = norm2(st.phi) + st.action_set.outer_radius();
        if (total > worst) {
          worst = total;
          where = "step " + std::to_string(h + 1) + " state " + std::to_string(s);
        }
      }
    }
    report.checks.push_back({"feature_norm", worst <= 1.0 + tol, worst,
                             "max ||phi(s)|| + outer radius = " + fmt(worst) + " at " + where});
  }

  if (mdp.identical_sets_per_step) {
    AssumptionCheck c{"identical_sets", true, 0.0, "every step shares one action set"};
    for (std::size_t h = 0; h < mdp.horizon && c.passed; ++h) {
      for (std::size_t s = 1; s < mdp.state_count(h); ++s) {
        if (!(mdp.state(h, s).action_set == mdp.state(h, 0).action_set)) {
          c.passed = false;
          c.worst = double(h + 1);
          c.detail = "step " + std::to_string(h + 1) + " has differing action sets";
          break;
        }
      }
    }
    report.checks.push_back(c);
  }

  {
    const PathSumBounds b = reward_sum_bounds(mdp);
    const bool ok = b.min_sum >= -tol && b.max_sum <= 1.0 + tol;
    report.checks.push_back({"reward_sum", ok, std::max(-b.min_sum, b.max_sum - 1.0),
                             "path reward sum in [" + fmt(b.min_sum) + ", " + fmt(b.max_sum) + "]" +
                                 (b.rigorous ? "" : " (grid bound, non-rigorous)")});
  }

  if (mdp.theta_norm) {
    const double target = *mdp.theta_norm;
    double worst = 0.0;
    for (const auto& t : mdp.theta_star) worst = std::max(worst, std::abs(norm2(t) - target));
    const bool ok = target > 0.0 && target <= 1.0 + 1e-12 && worst <= 1e-12;
    report.checks.push_back({"theta_norm", ok, worst,
                             "common norm " + fmt(target) + ", max deviation " + fmt(worst)});

    const PathSumBounds r = radius_sum_bounds(mdp);
    report.checks.push_back({"radius_sum", r.max_sum <= 1.0 + tol, r.max_sum,
                             "max path radius sum " + fmt(r.max_sum)});
  }
  return report;
}

}  // namespace ballrl
