#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "ballrl/policy.hpp"
#include "ballrl/rng.hpp"
#include "ballrl/simulator.hpp"

namespace ballrl {

struct DiffRConfig {
  double epsilon = 0.25;
  double delta = 0.1;
  // Desk-scale replacements for the sample-complexity batch sizes.
  std::optional<std::size_t> m1_override;
  std::optional<std::size_t> m2_override;

  void validate() const;
};

struct DiffRParameters {
  double eps_tilde = 0.0;    // ε / (8H): radii below this are ignored
  double eta = 0.0;          // ε / (8Hd): grid spacing for Θ
  std::size_t grid_size = 0; // L = ⌈1/η⌉
  double delta_prime = 0.0;  // δ / ((d + 3HL)(1 + H log₂(1/ε̃)))
  std::size_t m1 = 0;        // exploration episodes per policy
  std::size_t m2 = 0;        // evaluation episodes per candidate
  std::size_t theory_m1 = 0;
  std::size_t theory_m2 = 0;
  double iteration_bound = 0.0;      // 1 + H log₂(1/ε̃)
  std::size_t max_outer_iterations = 0;
  bool overridden = false;

  std::uint64_t trajectories_per_iteration(std::size_t dim) const;
};

DiffRParameters derive_parameters(const DiffRConfig& cfg, std::size_t horizon, std::size_t dim);

struct LoopState {
  std::vector<double> coverage;                          // ρ_h, starts at 0
  std::vector<std::vector<double>> candidate_radius;     // ρ_h^l as [l][h], starts at 1
  std::vector<std::vector<FeatureVector>> estimates;     // θ̂_h^l as [l][h], starts at 0
  std::vector<Policy> candidates;                        // π'_l, starts at the zero policy
  Policy current;                                        // π
  std::size_t iterations = 0;

  static LoopState initial(std::size_t horizon, std::size_t dim, std::size_t grid_size);
};

/// Lexicographically smallest (h, l) with ρ_h^l ≥ 2ρ_h and ρ_h^l ≥ ε̃, 0-based.
std::optional<std::pair<std::size_t, std::size_t>> select_work_item(const LoopState& state, double eps_tilde);

struct HierarchicalFamily {
  Policy baseline;              // π_{h,0}
  std::vector<Policy> probes;   // π_{h,i}
};

/// Policies that follow `prefix` before step h, then play zero (baseline) or
/// ρ(s_h) e_i (probe i) at step h, and zero afterwards.
HierarchicalFamily build_hierarchical_policies(const Policy& prefix, std::size_t step, std::size_t dim);

/// ((s_i - s_0) ξ + R_i - R_0) / ρ. Throws std::invalid_argument when ρ = 0.
double diffr_component(double tail_probe, double tail_base, double xi, double reward_probe,
                       double reward_base, double radius);

/// Assembles θ̂_h for one grid value ξ, rescaled to unit norm when longer than 1.
FeatureVector estimate_theta_grid(const BatchStats& base, const std::vector<BatchStats>& probes, double xi,
                                  double radius);

struct DiffRIteration {
  std::size_t step = 0;
  std::size_t candidate = 0;
  double coverage_before = 0.0;
  double coverage_after = 0.0;
  std::size_t best_candidate = 0;
  double best_mean_reward = 0.0;
};

struct DiffRResult {
  Policy policy;
  DiffRParameters params;
  std::size_t outer_iterations = 0;
  std::uint64_t trajectories_used = 0;
  std::vector<DiffRIteration> trace;
  std::vector<std::vector<FeatureVector>> grid_estimates;  // final θ̂_h^l as [l][h]
};

/// Radius-doubling outer loop with hierarchical exploration and a grid search over Θ.
/// Throws IterationBoundExceeded if the loop outlives its proven iteration bound.
DiffRResult run_diffr(TrajectorySource& env, const DiffRConfig& cfg, const RngStream& stream);

}  // namespace ballrl
