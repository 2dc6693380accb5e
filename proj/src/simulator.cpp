#include "ballrl/simulator.hpp"

#include <algorithm>
#include <exception>

#include <omp.h>

#include "ballrl/errors.hpp"

namespace ballrl {

namespace {

double observe(const RewardNoise& noise, double total, Xoshiro256& rng) {
  const auto* n = std::get_if<BoundedUniformNoise>(&noise);
  if (!n || n->half_width <= 0.0) return total;
  // Cap the half-width so the observation stays in [0, 1] and the noise stays mean-zero.
  const double w = std::max(0.0, std::min({n->half_width, total, 1.0 - total}));
  return total + uniform(rng, -w, w);
}

// Plays one episode. Writes the inner radius of every visited state to `radii`
// (horizon entries) and, when `sets` is given, the visited action sets too.
double simulate(const LinearQStarMdp& mdp, const Policy& policy, Xoshiro256& rng, double* radii,
                std::vector<ActionSet>* sets) {
  thread_local std::vector<double> probs;
  double total = 0.0;
  std::size_t s = sample_categorical(rng, mdp.mu);
  for (std::size_t h = 0; h < mdp.horizon; ++h) {
    const StateSpec& st = mdp.state(h, s);
    const FeatureVector a = policy.action(h, st.action_set);
    if (!contains(st.action_set, a)) {
      throw MembershipViolation("policy action leaves the action set at step " + std::to_string(h + 1));
    }
    radii[h] = st.action_set.inner_radius();
    if (sets) sets->push_back(st.action_set);
    if (mdp.is_terminal(h)) {
      total += mdp.reward(h, s, a, {});
      break;
    }
    mdp.kernel.distribution(h, s, a, probs);
    total += mdp.reward(h, s, a, probs);
    s = sample_categorical(rng, probs);
  }
  return observe(mdp.noise, total, rng);
}

// Row k of `rows` holds episode k as (total, ρ_1, ..., ρ_H).
BatchStats reduce(const std::vector<double>& rows, std::size_t m, std::size_t horizon) {
  BatchStats stats;
  stats.count = m;
  stats.per_step_mean_radius.assign(horizon, 0.0);
  double reward = 0.0, tail = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double* row = rows.data() + k * (horizon + 1);
    reward += row[0];
    for (std::size_t h = 0; h < horizon; ++h) {
      stats.per_step_mean_radius[h] += row[h + 1];
      if (h > 0) tail += row[h + 1];
    }
  }
  const double n = double(m);
  stats.mean_total_reward = reward / n;
  stats.mean_radius_tail = tail / n;
  for (double& r : stats.per_step_mean_radius) r /= n;
  return stats;
}

void require_positive(std::size_t m) {
  if (m == 0) throw ConfigError("batch size M must be at least 1");
}

}  // namespace

TrajectoryObservation rollout(const LinearQStarMdp& mdp, const Policy& policy, Xoshiro256& rng) {
  TrajectoryObservation obs;
  obs.action_sets.reserve(mdp.horizon);
  std::vector<double> radii(mdp.horizon);
  obs.total_reward = simulate(mdp, policy, rng, radii.data(), &obs.action_sets);
  return obs;
}

BatchStats batch(const LinearQStarMdp& mdp, const Policy& policy, std::size_t m, const RngStream& stream,
                 int threads) {
  require_positive(m);
  const std::size_t width = mdp.horizon + 1;
  std::vector<double> rows(m * width);
  std::vector<std::exception_ptr> errors(m);
  const int workers = threads > 0 ? threads : omp_get_max_threads();
  const auto n = static_cast<std::int64_t>(m);
#pragma omp parallel for num_threads(workers) schedule(static)
  for (std::int64_t k = 0; k < n; ++k) {
    try {
      Xoshiro256 rng = stream.child(std::uint64_t(k)).generator();
      double* row = rows.data() + std::size_t(k) * width;
      row[0] = simulate(mdp, policy, rng, row + 1, nullptr);
    } catch (...) {
      errors[std::size_t(k)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return reduce(rows, m, mdp.horizon);
}

BatchStats batch_serial(const LinearQStarMdp& mdp, const Policy& policy, std::size_t m,
                        const RngStream& stream) {
  require_positive(m);
  const std::size_t width = mdp.horizon + 1;
  std::vector<double> rows(m * width);
  for (std::size_t k = 0; k < m; ++k) {
    Xoshiro256 rng = stream.child(std::uint64_t(k)).generator();
    rows[k * width] = simulate(mdp, policy, rng, rows.data() + k * width + 1, nullptr);
  }
  return reduce(rows, m, mdp.horizon);
}

TrajectoryObservation TrajectorySource::rollout(const Policy& policy, Xoshiro256& rng) {
  ++used_;
  return ballrl::rollout(mdp_, policy, rng);
}

BatchStats TrajectorySource::batch(const Policy& policy, std::size_t m, const RngStream& stream) {
  BatchStats stats = ballrl::batch(mdp_, policy, m, stream, threads_);
  used_ += m;
  return stats;
}

}  // namespace ballrl
