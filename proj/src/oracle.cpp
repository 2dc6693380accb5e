#include "ballrl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ballrl/errors.hpp"
#include "ballrl/rng.hpp"

namespace ballrl::oracle {

namespace {

FeatureVector random_direction(std::size_t dim, Xoshiro256& rng) {
  FeatureVector u(dim);
  do {
    for (std::size_t i = 0; i < dim; ++i) u[i] = standard_normal(rng);
  } while (norm2(u) < 1e-12);
  return u;
}

std::uint64_t state_seed(std::size_t step, std::size_t index) {
  return splitmix64((std::uint64_t(step) << 32) ^ std::uint64_t(index));
}

double closed_form_value(const LinearQStarMdp& mdp, std::size_t h, std::size_t s) {
  const StateSpec& st = mdp.state(h, s);
  return dot(st.phi, mdp.theta_star[h]) + support_value(st.action_set, mdp.theta_star[h]);
}

}  // namespace

std::vector<FeatureVector> action_probes(const ActionSet& set, std::size_t count, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  std::vector<FeatureVector> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const FeatureVector u = random_direction(set.dim(), rng);
    // A quarter of the probes sit exactly on the boundary.
    const double t = (k % 4 == 0) ? 1.0 : uniform01(rng);
    out.push_back(t * boundary_point(set, u));
  }
  return out;
}

std::vector<FeatureVector> boundary_grid(const ActionSet& set, std::size_t per_axis) {
  const std::size_t dim = set.dim();
  std::vector<FeatureVector> out;
  if (dim == 1) {
    const double r = set.inner_radius();
    for (std::size_t k = 0; k < per_axis; ++k) {
      const double t = per_axis == 1 ? 0.0 : -1.0 + 2.0 * double(k) / double(per_axis - 1);
      out.push_back(FeatureVector{t * r});
    }
    return out;
  }
  const std::size_t n = per_axis * per_axis;
  out.reserve(n);
  if (dim == 2) {
    for (std::size_t k = 0; k < n; ++k) {
      const double angle = 2.0 * std::numbers::pi * double(k) / double(n);
      out.push_back(boundary_point(set, FeatureVector{std::cos(angle), std::sin(angle)}));
    }
    return out;
  }
  Xoshiro256 rng(0x5eed0b0ddULL + dim);
  for (std::size_t k = 0; k < n; ++k) out.push_back(boundary_point(set, random_direction(dim, rng)));
  return out;
}

ValueTable optimal_values(const LinearQStarMdp& mdp, double tolerance) {
  const std::size_t H = mdp.horizon;
  ValueTable table;
  table.closed_form.resize(H);
  table.dynamic_programming.resize(H);
  std::vector<double> probs;
  for (std::size_t h = H; h-- > 0;) {
    const std::size_t n = mdp.state_count(h);
    table.closed_form[h].resize(n);
    table.dynamic_programming[h].resize(n);
    for (std::size_t s = 0; s < n; ++s) {
      table.closed_form[h][s] = closed_form_value(mdp, h, s);

      const ActionSet& set = mdp.state(h, s).action_set;
      std::vector<FeatureVector> candidates = action_probes(set, 32, state_seed(h, s));
      if (mdp.dim <= 2) {
        auto grid = boundary_grid(set, 8);
        candidates.insert(candidates.end(), grid.begin(), grid.end());
      }
      candidates.push_back(support_argmax(set, mdp.theta_star[h]));

      double best = -HUGE_VAL;
      for (const FeatureVector& a : candidates) {
        double q;
        if (mdp.is_terminal(h)) {
          q = mdp.reward(h, s, a, {});
        } else {
          mdp.kernel.distribution(h, s, a, probs);
          q = mdp.reward(h, s, a, probs);
          for (std::size_t j = 0; j < probs.size(); ++j) q += probs[j] * table.dynamic_programming[h + 1][j];
        }
        best = std::max(best, q);
      }
      table.dynamic_programming[h][s] = best;
      table.max_disagreement =
          std::max(table.max_disagreement, std::abs(best - table.closed_form[h][s]));
    }
  }
  if (!(table.max_disagreement <= tolerance)) {
    std::ostringstream msg;
    msg << "closed-form and backward-induction optimal values differ by " << table.max_disagreement;
    throw DisagreementError(msg.str());
  }
  return table;
}

double optimal_initial_value(const LinearQStarMdp& mdp) {
  double v = 0.0;
  for (std::size_t s = 0; s < mdp.state_count(0); ++s) v += mdp.mu[s] * closed_form_value(mdp, 0, s);
  return v;
}

PolicyEvaluation evaluate_policy(const LinearQStarMdp& mdp, const Policy& policy) {
  const std::size_t H = mdp.horizon;
  PolicyEvaluation ev;
  ev.actions.resize(H);
  ev.values.resize(H);
  ev.occupancy.resize(H);
  for (std::size_t h = 0; h < H; ++h) {
    for (std::size_t s = 0; s < mdp.state_count(h); ++s) {
      const StateSpec& st = mdp.state(h, s);
      FeatureVector a = policy.action(h, st.action_set);
      if (!contains(st.action_set, a)) {
        throw MembershipViolation("policy action leaves the action set at step " + std::to_string(h + 1) +
                                  ", state " + std::to_string(s));
      }
      ev.actions[h].push_back(std::move(a));
    }
  }

  std::vector<std::vector<std::vector<double>>> next(H);
  for (std::size_t h = 0; h + 1 < H; ++h) {
    for (std::size_t s = 0; s < mdp.state_count(h); ++s) {
      next[h].push_back(mdp.kernel.distribution(h, s, ev.actions[h][s]));
    }
  }

  for (std::size_t h = H; h-- > 0;) {
    ev.values[h].resize(mdp.state_count(h));
    for (std::size_t s = 0; s < mdp.state_count(h); ++s) {
      if (mdp.is_terminal(h)) {
        ev.values[h][s] = mdp.reward(h, s, ev.actions[h][s], {});
        continue;
      }
      double v = mdp.reward(h, s, ev.actions[h][s], next[h][s]);
      for (std::size_t j = 0; j < next[h][s].size(); ++j) v += next[h][s][j] * ev.values[h + 1][j];
      ev.values[h][s] = v;
    }
  }

  ev.occupancy[0] = mdp.mu;
  for (std::size_t h = 0; h + 1 < H; ++h) {
    ev.occupancy[h + 1].assign(mdp.state_count(h + 1), 0.0);
    for (std::size_t s = 0; s < mdp.state_count(h); ++s) {
      for (std::size_t j = 0; j < next[h][s].size(); ++j) {
        ev.occupancy[h + 1][j] += ev.occupancy[h][s] * next[h][s][j];
      }
    }
  }

  for (std::size_t s = 0; s < mdp.state_count(0); ++s) ev.initial_value += mdp.mu[s] * ev.values[0][s];
  return ev;
}

double policy_value(const LinearQStarMdp& mdp, const Policy& policy) {
  return evaluate_policy(mdp, policy).initial_value;
}

double epsilon_gap(const LinearQStarMdp& mdp, const Policy& policy) {
  return optimal_initial_value(mdp) - policy_value(mdp, policy);
}

double bellman_residual(const LinearQStarMdp& mdp, std::size_t random_probes) {
  const std::size_t H = mdp.horizon;
  std::vector<std::vector<double>> v_star(H);
  for (std::size_t h = 0; h < H; ++h) {
    for (std::size_t s = 0; s < mdp.state_count(h); ++s) v_star[h].push_back(closed_form_value(mdp, h, s));
  }
  double worst = 0.0;
  std::vector<double> probs;
  for (std::size_t h = 0; h < H; ++h) {
    for (std::size_t s = 0; s < mdp.state_count(h); ++s) {
      const StateSpec& st = mdp.state(h, s);
      std::vector<FeatureVector> probes =
          action_probes(st.action_set, random_probes, state_seed(h, s) ^ 0xb311ULL);
      probes.push_back(support_argmax(st.action_set, mdp.theta_star[h]));
      probes.push_back(FeatureVector(mdp.dim));
      for (const FeatureVector& a : probes) {
        const double q_linear = dot(st.phi + a, mdp.theta_star[h]);
        double rhs;
        if (mdp.is_terminal(h)) {
          rhs = mdp.reward(h, s, a, {});
        } else {
          mdp.kernel.distribution(h, s, a, probs);
          rhs = mdp.reward(h, s, a, probs);
          for (std::size_t j = 0; j < probs.size(); ++j) rhs += probs[j] * v_star[h + 1][j];
        }
        worst = std::max(worst, std::abs(q_linear - rhs));
      }
    }
  }
  return worst;
}

std::vector<double> expected_radius(const LinearQStarMdp& mdp, const Policy& policy) {
  const PolicyEvaluation ev = evaluate_policy(mdp, policy);
  std::vector<double> out(mdp.horizon, 0.0);
  for (std::size_t h = 0; h < mdp.horizon; ++h) {
    for (std::size_t s = 0; s < mdp.state_count(h); ++s) {
      out[h] += ev.occupancy[h][s] * mdp.state(h, s).action_set.inner_radius();
    }
  }
  return out;
}

TelescopeTerms telescope_terms(const LinearQStarMdp& mdp, const Policy& policy) {
  const PolicyEvaluation ev = evaluate_policy(mdp, policy);
  TelescopeTerms t;
  std::vector<double> probs;
  for (std::size_t h = 0; h < mdp.horizon; ++h) {
    for (std::size_t s = 0; s < mdp.state_count(h); ++s) {
      const double w = ev.occupancy[h][s];
      const StateSpec& st = mdp.state(h, s);
      const FeatureVector& a = ev.actions[h][s];
      if (h == 0) t.feature_term += w * dot(st.phi, mdp.theta_star[0]);
      t.action_term += w * dot(a, mdp.theta_star[h]);
      if (mdp.is_terminal(h)) {
        t.reward_term += w * mdp.reward(h, s, a, {});
        continue;
      }
      mdp.kernel.distribution(h, s, a, probs);
      t.reward_term += w * mdp.reward(h, s, a, probs);
      for (std::size_t j = 0; j < probs.size(); ++j) {
        const StateSpec& nx = mdp.state(h + 1, j);
        t.continuation_term += w * probs[j] * support_value(nx.action_set, mdp.theta_star[h + 1]);
        t.radius_tail += w * probs[j] * nx.action_set.inner_radius();
      }
    }
  }
  return t;
}

}  // namespace ballrl::oracle
