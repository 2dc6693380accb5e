#pragma once

#include <cstdint>
#include <vector>

#include "ballrl/mdp.hpp"
#include "ballrl/policy.hpp"
#include "ballrl/rng.hpp"

namespace ballrl {

/// What one episode reveals to a learner: the visited states' action sets, in
/// step order, and the (possibly noisy) total reward. Nothing else.
struct TrajectoryObservation {
  std::vector<ActionSet> action_sets;
  double total_reward = 0.0;
};

struct BatchStats {
  double mean_total_reward = 0.0;
  // Mean of Σ ρ(s_h) over all steps after the first.
  double mean_radius_tail = 0.0;
  std::vector<double> per_step_mean_radius;
  std::size_t count = 0;
};

/// One episode under π. Throws MembershipViolation if π leaves a visited set.
TrajectoryObservation rollout(const LinearQStarMdp& mdp, const Policy& policy, Xoshiro256& rng);

/// M episodes, episode k drawn from stream.child(k). Episodes run on up to
/// `threads` OpenMP threads (0 = runtime default); the reduction is sequential in
/// episode order, so the result is bit-identical for every thread count.
BatchStats batch(const LinearQStarMdp& mdp, const Policy& policy, std::size_t m, const RngStream& stream,
                 int threads = 0);

/// Single-threaded reference for batch().
BatchStats batch_serial(const LinearQStarMdp& mdp, const Policy& policy, std::size_t m,
                        const RngStream& stream);

/// The learners' only handle on an environment. It owns the instance privately
/// and counts every episode it serves.
class TrajectorySource {
 public:
  explicit TrajectorySource(LinearQStarMdp mdp, int threads = 0) : mdp_(std::move(mdp)), threads_(threads) {}

  std::size_t dim() const { return mdp_.dim; }
  std::size_t horizon() const { return mdp_.horizon; }

  TrajectoryObservation rollout(const Policy& policy, Xoshiro256& rng);
  BatchStats batch(const Policy& policy, std::size_t m, const RngStream& stream);

  std::uint64_t trajectories_used() const { return used_; }

 private:
  LinearQStarMdp mdp_;
  int threads_ = 0;
  std::uint64_t used_ = 0;
};

}  // namespace ballrl
