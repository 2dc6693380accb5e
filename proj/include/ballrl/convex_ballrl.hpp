#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ballrl/policy.hpp"
#include "ballrl/rng.hpp"
#include "ballrl/simulator.hpp"

namespace ballrl {

struct ConvexConfig {
  double epsilon = 0.1;
  double delta = 0.1;
  // Trajectories per exploration policy; unset means the sample-complexity default.
  std::optional<std::size_t> m;
  // Collect one baseline batch and reuse it for every (h, i) instead of re-collecting.
  bool share_baseline = false;

  void validate() const;
};

/// ⌈8 H² B² d log(2dH/δ) / ε²⌉.
std::size_t convex_default_m(std::size_t horizon, double regularity, std::size_t dim, double epsilon,
                             double delta);

/// Episodes one run consumes: 2MHd + 1, or MHd + M + 1 with a shared baseline.
std::uint64_t convex_trajectory_count(std::size_t m, std::size_t horizon, std::size_t dim,
                                      bool share_baseline);

struct Bootstrap {
  std::vector<ActionSet> sets;  // A_h per step
  std::vector<double> radii;    // ρ_h = inscribed radius of A_h
};

/// Reveals the per-step action sets with one zero-policy episode.
Bootstrap bootstrap_radii(TrajectorySource& env, const RngStream& stream);

/// θ̂_{h,i} = (R_{h,i} - R_0) / ρ_h.
double convex_component(double probe_mean, double baseline_mean, double radius);

struct ConvexResult {
  Policy policy;
  std::vector<FeatureVector> theta_hat;
  std::vector<std::vector<double>> baseline_mean;  // R_0 used for (h, i)
  std::vector<std::vector<double>> probe_mean;     // R_{h,i}
  Bootstrap bootstrap;
  std::size_t m = 0;
  std::uint64_t trajectories_used = 0;
};

/// Basis-direction exploration followed by a greedy policy over the revealed sets.
ConvexResult run_convex(TrajectorySource& env, const ConvexConfig& cfg, const RngStream& stream);

}  // namespace ballrl
