#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ballrl/mdp.hpp"

namespace ballrl {

/// Parameters for synthetic linear-Q* instances.
struct GeneratorConfig {
  std::size_t dim = 2;
  std::size_t horizon = 2;
  std::vector<std::size_t> states_per_step{1, 1};
  ShapeKind action_set_family = ShapeKind::Ball;
  // Inner radius of each state's action set is drawn from this interval.
  // The upper end may not exceed 1/H so that every path has Σ ρ(s_h) ≤ 1.
  std::pair<double, double> radius_range{0.05, 0.2};
  KernelKind kernel_family = KernelKind::ActionIndependent;
  std::optional<double> theta_target;
  std::uint64_t seed = 0;
  std::size_t max_rejections = 1000;

  // All states of a step share one action set.
  bool identical_sets_per_step = false;
  // Ellipsoid semi-axes lie in [ρ, aspect · ρ].
  double ellipsoid_aspect = 2.0;
  // Feature component along θ_h, as a fraction of the feature budget 1 - η(s).
  std::pair<double, double> feature_alignment{0.85, 0.95};
  double softmax_weight_scale = 2.0;
  RewardNoise noise = NoNoise{};

  /// Throws ConfigError naming the violated constraint.
  void validate() const;

  /// Largest B = η/ρ the family can produce.
  double family_regularity() const;

  /// 1 / (H · B): the largest inner radius whose outer radii sum to at most 1 along any path.
  double radius_cap() const;
};

/// Mean rewards solving the optimal Bellman equation for the given features, sets,
/// kernel and parameters, so that Q*_h(s,a) = <φ(s)+a, θ_h> holds identically:
///   r(s,a) = <φ(s)+a, θ_h> - Σ_{s'} P(s'|s,a) (<φ(s'), θ_{h+1}> + σ_{A(s')}(θ_{h+1})).
std::vector<std::vector<RewardRow>> backfill_rewards(const std::vector<std::vector<StateSpec>>& states,
                                                     const TransitionKernel& kernel,
                                                     const std::vector<FeatureVector>& theta_star);

/// Builds a complete instance from hand-chosen parts, backfilling its rewards.
LinearQStarMdp assemble_instance(std::size_t dim, std::vector<std::vector<StateSpec>> states,
                                 TransitionKernel kernel, std::vector<FeatureVector> theta_star,
                                 std::vector<double> mu, RewardNoise noise = NoNoise{});

/// Single-path instance: one state per step, deterministic transitions, point-mass μ.
LinearQStarMdp single_path_instance(std::vector<FeatureVector> phis, std::vector<ActionSet> sets,
                                    std::vector<FeatureVector> theta_star);

/// Samples, backfills and certifies an instance. Throws RejectionBudgetExceeded.
LinearQStarMdp generate_instance(const GeneratorConfig& cfg);

struct PathSumBounds {
  double min_sum = 0.0;
  double max_sum = 0.0;
  // False when the per-state extrema came from a boundary grid (softmax kernels).
  bool rigorous = true;
};

/// Extrema of Σ_h r(s_h, a_h) over reachable state paths and in-set actions.
PathSumBounds reward_sum_bounds(const LinearQStarMdp& mdp);

/// Extrema of Σ_h ρ(s_h) over reachable state paths.
PathSumBounds radius_sum_bounds(const LinearQStarMdp& mdp);

struct AssumptionCheck {
  std::string name;
  bool passed = true;
  double worst = 0.0;
  std::string detail;
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;
  double worst_residual = 0.0;

  bool passed() const;
  const AssumptionCheck* find(const std::string& name) const;
  std::string summary() const;
};

/// Certifies an instance: Bellman residual (linear Q*), feature-norm bound,
/// identical sets per step (when claimed), path reward bounds, and common θ-norm
/// plus path radius bound (when a common norm Θ is claimed).
AssumptionReport verify_assumptions(const LinearQStarMdp& mdp, double tol = 1e-9);

}  // namespace ballrl
