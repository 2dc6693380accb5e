#pragma once

#include <cstdint>
#include <vector>

#include "ballrl/mdp.hpp"
#include "ballrl/policy.hpp"

namespace ballrl::oracle {

// Ground truth on fully-known instances. Everything here is exact enumeration
// over the finite state sets; nothing samples trajectories.

struct ValueTable {
  std::vector<std::vector<double>> closed_form;          // <φ(s), θ_h> + σ_{A(s)}(θ_h)
  std::vector<std::vector<double>> dynamic_programming;  // backward induction over action probes
  double max_disagreement = 0.0;
};

/// Throws DisagreementError when the two routes differ by more than `tolerance`.
ValueTable optimal_values(const LinearQStarMdp& mdp, double tolerance = 1e-9);

/// E_μ[V*_1(s_1)] from the closed form.
double optimal_initial_value(const LinearQStarMdp& mdp);

struct PolicyEvaluation {
  std::vector<std::vector<FeatureVector>> actions;  // π(s) per state
  std::vector<std::vector<double>> values;          // V^π_h(s)
  std::vector<std::vector<double>> occupancy;       // P^π(s_h = s)
  double initial_value = 0.0;                       // E_μ[V^π_1]
};

/// Exact evaluation by backward induction; throws MembershipViolation on out-of-set actions.
PolicyEvaluation evaluate_policy(const LinearQStarMdp& mdp, const Policy& policy);
double policy_value(const LinearQStarMdp& mdp, const Policy& policy);

/// E_μ[V*_1] - V^π. Nonnegative up to rounding.
double epsilon_gap(const LinearQStarMdp& mdp, const Policy& policy);

/// max over states and probes (analytic argmax of θ_h plus random in-set actions)
/// of |<φ(s)+a, θ_h> - r(s,a) - Σ P(s'|s,a) V*_{h+1}(s')|.
double bellman_residual(const LinearQStarMdp& mdp, std::size_t random_probes = 32);

/// Deterministic in-set actions: `count` points t · boundary(u) with random u, t.
std::vector<FeatureVector> action_probes(const ActionSet& set, std::size_t count, std::uint64_t seed);

/// Dense deterministic boundary grid: 64 points for d = 1, 64² otherwise
/// (an angular grid for d = 2, fixed-seed directions for d ≥ 3).
std::vector<FeatureVector> boundary_grid(const ActionSet& set, std::size_t per_axis = 64);

/// Per-step E^π[ρ(s_h)].
std::vector<double> expected_radius(const LinearQStarMdp& mdp, const Policy& policy);

/// Expectations entering the telescoped Bellman identity for a policy π:
///   feature_term + action_term = reward_term + continuation_term.
struct TelescopeTerms {
  double feature_term = 0.0;       // E_μ[<φ(s_1), θ_1>]
  double action_term = 0.0;        // E^π[Σ_h <a_h, θ_h>]
  double reward_term = 0.0;        // E^π[Σ_h r(s_h, a_h)]
  double continuation_term = 0.0;  // E^π[Σ_h σ_{A(s_{h+1})}(θ_{h+1})]
  double radius_tail = 0.0;        // E^π[Σ_h ρ(s_{h+1})], ρ(s_{H+1}) = 0
};

TelescopeTerms telescope_terms(const LinearQStarMdp& mdp, const Policy& policy);

}  // namespace ballrl::oracle
