#pragma once

// Hand-rolled generators for property tests. Every generator is a pure function
// of the Xoshiro256 it is handed, so a failing case is reproduced by its seed.

#include <cmath>
#include <vector>

#include "ballrl/action_set.hpp"
#include "ballrl/generator.hpp"
#include "ballrl/mdp.hpp"
#include "ballrl/policy.hpp"
#include "ballrl/rng.hpp"

namespace ballrl::testing {

inline std::size_t pick(Xoshiro256& rng, std::size_t n) { return std::size_t(uniform01(rng) * double(n)); }

template <class T>
const T& pick_from(Xoshiro256& rng, const std::vector<T>& items) {
  return items[pick(rng, items.size())];
}

inline FeatureVector gaussian_vector(Xoshiro256& rng, std::size_t dim, double scale = 1.0) {
  FeatureVector v(dim);
  for (std::size_t i = 0; i < dim; ++i) v[i] = scale * standard_normal(rng);
  return v;
}

inline FeatureVector unit_vector(Xoshiro256& rng, std::size_t dim) {
  FeatureVector v;
  do {
    v = gaussian_vector(rng, dim);
  } while (norm2(v) < 1e-9);
  return (1.0 / norm2(v)) * v;
}

inline ActionSet arbitrary_set(Xoshiro256& rng, std::size_t dim) {
  const double r = uniform(rng, 0.05, 2.0);
  switch (pick(rng, 3)) {
    case 0:
      return ActionSet::ball(dim, r);
    case 1:
      return ActionSet::box(dim, r);
    default: {
      std::vector<double> axes(dim);
      for (double& c : axes) c = r * uniform(rng, 1.0, 3.0);
      return ActionSet::ellipsoid(axes);
    }
  }
}

/// A random in-set point: a boundary point pulled inward by a random factor.
inline FeatureVector arbitrary_member(Xoshiro256& rng, const ActionSet& set) {
  return uniform01(rng) * boundary_point(set, unit_vector(rng, set.dim()));
}

struct ConfigShape {
  bool theta_target = false;
  bool identical_sets = false;
  std::vector<ShapeKind> families{ShapeKind::Ball, ShapeKind::Box, ShapeKind::Ellipsoid};
  std::vector<KernelKind> kernels{KernelKind::ActionIndependent, KernelKind::SoftmaxAffine};
  std::size_t max_dim = 4;
  std::size_t max_horizon = 3;
  std::size_t max_states = 3;
};

/// Generator configs that always satisfy validate().
inline GeneratorConfig arbitrary_config(Xoshiro256& rng, const ConfigShape& shape = {}) {
  GeneratorConfig cfg;
  cfg.dim = 1 + pick(rng, shape.max_dim);
  cfg.horizon = 1 + pick(rng, shape.max_horizon);
  cfg.states_per_step.clear();
  for (std::size_t h = 0; h < cfg.horizon; ++h) cfg.states_per_step.push_back(1 + pick(rng, shape.max_states));
  cfg.action_set_family = pick_from(rng, shape.families);
  cfg.kernel_family = pick_from(rng, shape.kernels);
  const double cap = cfg.radius_cap();
  cfg.radius_range = {0.1 * cap, 0.4 * cap};
  if (shape.theta_target) cfg.theta_target = uniform(rng, 0.3, 1.0);
  cfg.identical_sets_per_step = shape.identical_sets;
  cfg.seed = rng();
  return cfg;
}

/// One of the four structured policies, always feasible on `mdp`.
inline Policy arbitrary_policy(Xoshiro256& rng, const LinearQStarMdp& mdp) {
  const std::size_t H = mdp.horizon, d = mdp.dim;
  auto random_greedy = [&] {
    std::vector<FeatureVector> theta;
    for (std::size_t h = 0; h < H; ++h) theta.push_back(gaussian_vector(rng, d));
    return Policy::greedy(theta, uniform01(rng) < 0.5 ? GreedyDomain::ActionSet : GreedyDomain::InscribedBall);
  };
  switch (pick(rng, 4)) {
    case 0:
      return Policy::zero();
    case 1: {
      const std::size_t h = pick(rng, H);
      double rho = HUGE_VAL;
      for (const StateSpec& st : mdp.states[h]) rho = std::min(rho, st.action_set.inner_radius());
      return Policy::basis(h, pick(rng, d), rho * uniform(rng, 0.2, 1.0));
    }
    case 2:
      return random_greedy();
    default: {
      const std::size_t cut = pick(rng, H);
      if (uniform01(rng) < 0.5) return Policy::hierarchical(random_greedy(), cut, ZeroTail{});
      return Policy::hierarchical(random_greedy(), cut, BasisAtCut{pick(rng, d)});
    }
  }
}

}  // namespace ballrl::testing
