#include "ballrl/convex_ballrl.hpp"

#include <algorithm>
#include <cmath>

#include "ballrl/errors.hpp"

namespace ballrl {

void ConvexConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ConfigError("convex: epsilon must lie in (0, 1]");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("convex: delta must lie in (0, 1)");
  if (m && *m == 0) throw ConfigError("convex: m must be at least 1");
}

std::size_t convex_default_m(std::size_t horizon, double regularity, std::size_t dim, double epsilon,
                             double delta) {
  const double H = double(horizon), d = double(dim), B = regularity;
  const double m = 8.0 * H * H * B * B * d * std::log(2.0 * d * H / delta) / (epsilon * epsilon);
  return std::size_t(std::ceil(m));
}

std::uint64_t convex_trajectory_count(std::size_t m, std::size_t horizon, std::size_t dim,
                                      bool share_baseline) {
  const std::uint64_t probes = std::uint64_t(m) * horizon * dim;
  return (share_baseline ? probes + m : 2 * probes) + 1;
}

Bootstrap bootstrap_radii(TrajectorySource& env, const RngStream& stream) {
  Xoshiro256 rng = stream.generator();
  TrajectoryObservation obs = env.rollout(Policy::zero(), rng);
  Bootstrap b;
  for (const ActionSet& set : obs.action_sets) b.radii.push_back(set.inner_radius());
  b.sets = std::move(obs.action_sets);
  return b;
}

double convex_component(double probe_mean, double baseline_mean, double radius) {
  return (probe_mean - baseline_mean) / radius;
}

ConvexResult run_convex(TrajectorySource& env, const ConvexConfig& cfg, const RngStream& stream) {
  cfg.validate();
  const std::size_t H = env.horizon(), d = env.dim();
  const std::uint64_t start = env.trajectories_used();

  ConvexResult out;
  out.bootstrap = bootstrap_radii(env, stream.child("convex.bootstrap"));
  double regularity = 1.0;
  for (const ActionSet& set : out.bootstrap.sets) regularity = std::max(regularity, set.regularity());
  out.m = cfg.m ? *cfg.m : convex_default_m(H, regularity, d, cfg.epsilon, cfg.delta);

  std::optional<double> shared;
  if (cfg.share_baseline) {
    shared = env.batch(Policy::zero(), out.m, stream.child("convex.baseline.shared")).mean_total_reward;
  }

  out.theta_hat.assign(H, FeatureVector(d));
  out.baseline_mean.assign(H, std::vector<double>(d));
  out.probe_mean.assign(H, std::vector<double>(d));
  for (std::size_t h = 0; h < H; ++h) {
    const double rho = out.bootstrap.radii[h];
    for (std::size_t i = 0; i < d; ++i) {
      const std::uint64_t label = h * d + i;
      const double r0 = shared ? *shared
                               : env.batch(Policy::zero(), out.m, stream.child("convex.baseline").child(label))
                                     .mean_total_reward;
      const double ri =
          env.batch(Policy::basis(h, i, rho), out.m, stream.child("convex.probe").child(label)).mean_total_reward;
      out.baseline_mean[h][i] = r0;
      out.probe_mean[h][i] = ri;
      out.theta_hat[h][i] = convex_component(ri, r0, rho);
    }
  }
  out.policy = Policy::greedy(out.theta_hat, GreedyDomain::ActionSet);
  out.trajectories_used = env.trajectories_used() - start;
  return out;
}

}  // namespace ballrl
