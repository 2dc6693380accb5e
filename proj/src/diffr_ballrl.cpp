#include "ballrl/diffr_ballrl.hpp"

#include <cmath>
#include <stdexcept>

#include "ballrl/errors.hpp"

namespace ballrl {

void DiffRConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ConfigError("diffr: epsilon must lie in (0, 1]");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("diffr: delta must lie in (0, 1)");
  if (m1_override && *m1_override == 0) throw ConfigError("diffr: m1_override must be at least 1");
  if (m2_override && *m2_override == 0) throw ConfigError("diffr: m2_override must be at least 1");
}

std::uint64_t DiffRParameters::trajectories_per_iteration(std::size_t dim) const {
  return std::uint64_t(dim + 1) * m1 + std::uint64_t(grid_size) * m2;
}

DiffRParameters derive_parameters(const DiffRConfig& cfg, std::size_t horizon, std::size_t dim) {
  cfg.validate();
  const double H = double(horizon), d = double(dim), eps = cfg.epsilon;
  DiffRParameters p;
  p.eps_tilde = eps / (8.0 * H);
  p.eta = eps / (8.0 * H * d);
  p.grid_size = std::size_t(std::ceil(1.0 / p.eta));
  p.iteration_bound = 1.0 + H * std::log2(1.0 / p.eps_tilde);
  p.delta_prime = cfg.delta / ((d + 3.0 * H * double(p.grid_size)) * p.iteration_bound);
  const double log_term = 2.0 * std::log(1.0 / p.delta_prime);
  p.theory_m1 = std::size_t(std::ceil(log_term * 256.0 * H * H * d * d / (eps * eps)));
  const double c = 2.0 + 4.0 * H + 2.0 * H * d;
  p.theory_m2 = std::size_t(std::ceil(log_term * 16.0 * c * c / (eps * eps)));
  p.m1 = cfg.m1_override.value_or(p.theory_m1);
  p.m2 = cfg.m2_override.value_or(p.theory_m2);
  p.overridden = cfg.m1_override.has_value() || cfg.m2_override.has_value();
  p.max_outer_iterations = std::size_t(std::ceil(p.iteration_bound)) + 1;
  return p;
}

LoopState LoopState::initial(std::size_t horizon, std::size_t dim, std::size_t grid_size) {
  LoopState s;
  s.coverage.assign(horizon, 0.0);
  s.candidate_radius.assign(grid_size, std::vector<double>(horizon, 1.0));
  s.estimates.assign(grid_size, std::vector<FeatureVector>(horizon, FeatureVector(dim)));
  s.candidates.assign(grid_size, Policy::zero());
  return s;
}

std::optional<std::pair<std::size_t, std::size_t>> select_work_item(const LoopState& state, double eps_tilde) {
  for (std::size_t h = 0; h < state.coverage.size(); ++h) {
    for (std::size_t l = 0; l < state.candidate_radius.size(); ++l) {
      const double r = state.candidate_radius[l][h];
      if (r >= 2.0 * state.coverage[h] && r >= eps_tilde) return std::pair{h, l};
    }
  }
  return std::nullopt;
}

HierarchicalFamily build_hierarchical_policies(const Policy& prefix, std::size_t step, std::size_t dim) {
  HierarchicalFamily f;
  f.baseline = Policy::hierarchical(prefix, step, ZeroTail{});
  for (std::size_t i = 0; i < dim; ++i) f.probes.push_back(Policy::hierarchical(prefix, step, BasisAtCut{i}));
  return f;
}

double diffr_component(double tail_probe, double tail_base, double xi, double reward_probe,
                       double reward_base, double radius) {
  if (radius == 0.0) throw std::invalid_argument("estimate requested at a step with zero coverage radius");
  return ((tail_probe - tail_base) * xi + reward_probe - reward_base) / radius;
}

FeatureVector estimate_theta_grid(const BatchStats& base, const std::vector<BatchStats>& probes, double xi,
                                  double radius) {
  FeatureVector theta(probes.size());
  for (std::size_t i = 0; i < probes.size(); ++i) {
    theta[i] = diffr_component(probes[i].mean_radius_tail, base.mean_radius_tail, xi,
                               probes[i].mean_total_reward, base.mean_total_reward, radius);
  }
  const double n = norm2(theta);
  if (n > 1.0) theta *= 1.0 / n;
  return theta;
}

DiffRResult run_diffr(TrajectorySource& env, const DiffRConfig& cfg, const RngStream& stream) {
  const std::size_t H = env.horizon(), d = env.dim();
  DiffRResult out;
  out.params = derive_parameters(cfg, H, d);
  const DiffRParameters& p = out.params;
  const std::uint64_t start = env.trajectories_used();

  LoopState state = LoopState::initial(H, d, p.grid_size);
  const RngStream explore = stream.child("explore");
  const RngStream evaluate = stream.child("evaluate");

  while (auto item = select_work_item(state, p.eps_tilde)) {
    if (state.iterations >= p.max_outer_iterations) {
      throw IterationBoundExceeded("outer loop exceeded " + std::to_string(p.max_outer_iterations) +
                                   " iterations (bound " + std::to_string(p.iteration_bound) + ")");
    }
    const auto [h, l] = *item;
    const std::uint64_t iter = state.iterations;
    DiffRIteration record{h, l, state.coverage[h], 0.0, 0, 0.0};

    const HierarchicalFamily family = build_hierarchical_policies(state.candidates[l], h, d);
    const RngStream ex = explore.child(iter);
    const BatchStats base = env.batch(family.baseline, p.m1, ex.child(std::uint64_t(0)));
    std::vector<BatchStats> probes;
    for (std::size_t i = 0; i < d; ++i) probes.push_back(env.batch(family.probes[i], p.m1, ex.child(i + 1)));

    state.coverage[h] = state.candidate_radius[l][h];
    record.coverage_after = state.coverage[h];

    const RngStream ev = evaluate.child(iter);
    double best = -HUGE_VAL;
    for (std::size_t c = 0; c < p.grid_size; ++c) {
      const double xi = double(c + 1) * p.eta;
      state.estimates[c][h] = estimate_theta_grid(base, probes, xi, state.coverage[h]);
      state.candidates[c] = Policy::greedy(state.estimates[c], GreedyDomain::InscribedBall);
      const BatchStats stats = env.batch(state.candidates[c], p.m2, ev.child(c));
      state.candidate_radius[c] = stats.per_step_mean_radius;
      if (stats.mean_total_reward > best) {
        best = stats.mean_total_reward;
        record.best_candidate = c;
      }
    }
    state.current = state.candidates[record.best_candidate];
    record.best_mean_reward = best;
    out.trace.push_back(record);
    ++state.iterations;
  }

  out.policy = state.current;
  out.outer_iterations = state.iterations;
  out.trajectories_used = env.trajectories_used() - start;
  out.grid_estimates = state.estimates;
  return out;
}

}  // namespace ballrl
