#pragma once

#include <cstddef>
#include <memory>
#include <variant>
#include <vector>

#include "ballrl/action_set.hpp"
#include "ballrl/feature_vector.hpp"

namespace ballrl {

class Policy;

struct ZeroPolicy {};

/// Plays scale · e_index at `step`, zero elsewhere.
struct BasisDirectionPolicy {
  std::size_t step = 0;
  std::size_t index = 0;
  double scale = 0.0;
};

enum class GreedyDomain {
  ActionSet,      // argmax over the revealed set A(s)
  InscribedBall,  // argmax over B_2(ρ(s))
};

struct GreedyThetaPolicy {
  std::vector<FeatureVector> theta_hat;  // one per step
  GreedyDomain domain = GreedyDomain::ActionSet;
};

struct ZeroTail {};
/// Plays ρ(s) · e_index at the cut step, using the visited state's inner radius.
struct BasisAtCut {
  std::size_t index = 0;
};

/// Follows `prefix` before `cut_step`, plays the tail action at `cut_step`, zero afterwards.
struct HierarchicalPolicy {
  std::shared_ptr<const Policy> prefix;
  std::size_t cut_step = 0;
  std::variant<ZeroTail, BasisAtCut> tail;
};

/// Deterministic policy. Its action depends only on the step and on the revealed
/// action set of the current state, which is all a trajectory learner can see.
class Policy {
 public:
  using Representation =
      std::variant<ZeroPolicy, BasisDirectionPolicy, GreedyThetaPolicy, HierarchicalPolicy>;

  Policy() : rep_(ZeroPolicy{}) {}
  explicit Policy(Representation rep) : rep_(std::move(rep)) {}

  static Policy zero() { return Policy(); }
  static Policy basis(std::size_t step, std::size_t index, double scale);
  static Policy greedy(std::vector<FeatureVector> theta_hat,
                       GreedyDomain domain = GreedyDomain::ActionSet);
  static Policy hierarchical(Policy prefix, std::size_t cut_step,
                             std::variant<ZeroTail, BasisAtCut> tail);

  FeatureVector action(std::size_t step, const ActionSet& revealed) const;

  const Representation& representation() const { return rep_; }

 private:
  Representation rep_;
};

}  // namespace ballrl
