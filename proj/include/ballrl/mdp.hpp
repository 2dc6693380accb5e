#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "ballrl/action_set.hpp"
#include "ballrl/feature_vector.hpp"

namespace ballrl {

/// One state of a finite-horizon MDP. Steps are 0-based internally.
struct StateSpec {
  std::size_t id = 0;
  std::size_t step = 0;
  FeatureVector phi;
  ActionSet action_set;
};

enum class KernelKind { ActionIndependent, SoftmaxAffine };

std::string_view to_string(KernelKind kind);
KernelKind kernel_kind_from_string(std::string_view name);

struct ActionIndependentRow {
  std::vector<double> probs;
};

// P(s' | s, a) ∝ exp(<a, weights[s']> + biases[s'])
struct SoftmaxAffineRow {
  std::vector<FeatureVector> weights;
  std::vector<double> biases;
};

using TransitionRow = std::variant<ActionIndependentRow, SoftmaxAffineRow>;

/// Transition law from step h to step h+1, one row per step-h state. The final
/// step has no rows.
class TransitionKernel {
 public:
  TransitionKernel() = default;
  TransitionKernel(KernelKind kind, std::vector<std::vector<TransitionRow>> rows);

  KernelKind kind() const { return kind_; }
  const std::vector<std::vector<TransitionRow>>& rows() const { return rows_; }
  const TransitionRow& row(std::size_t step, std::size_t state) const { return rows_[step][state]; }

  /// Writes P(· | s, a) over the step+1 states into `out` (resized as needed).
  void distribution(std::size_t step, std::size_t state, const FeatureVector& a,
                    std::vector<double>& out) const;
  std::vector<double> distribution(std::size_t step, std::size_t state, const FeatureVector& a) const;

  /// Next-step states that can carry positive probability for some action.
  std::vector<std::size_t> support(std::size_t step, std::size_t state) const;

 private:
  KernelKind kind_ = KernelKind::ActionIndependent;
  std::vector<std::vector<TransitionRow>> rows_;
};

/// Mean reward of one state, stored explicitly so that loaded or hand-edited
/// instances are judged on what they contain:
///   r(s, a) = offset + <slope, a> - Σ_{s'} P(s' | s, a) · continuation[s'].
struct RewardRow {
  double offset = 0.0;
  FeatureVector slope;
  std::vector<double> continuation;
};

struct NoNoise {
  bool operator==(const NoNoise&) const = default;
};

/// Symmetric uniform noise on the observed trajectory total, capped so the
/// observation stays in [0, 1].
struct BoundedUniformNoise {
  double half_width = 0.0;
  bool operator==(const BoundedUniformNoise&) const = default;
};

using RewardNoise = std::variant<NoNoise, BoundedUniformNoise>;

struct LinearQStarMdp {
  std::size_t dim = 0;
  std::size_t horizon = 0;
  std::vector<std::vector<StateSpec>> states;  // [step][state]
  TransitionKernel kernel;
  std::vector<std::vector<RewardRow>> rewards;  // [step][state]
  std::vector<FeatureVector> theta_star;        // one per step
  std::vector<double> mu;                       // over step-0 states
  RewardNoise noise = NoNoise{};

  // Which assumption families the instance claims; verify_assumptions checks them.
  bool identical_sets_per_step = false;
  std::optional<double> theta_norm;

  const StateSpec& state(std::size_t step, std::size_t index) const { return states[step][index]; }
  std::size_t state_count(std::size_t step) const { return states[step].size(); }
  bool is_terminal(std::size_t step) const { return step + 1 == horizon; }

  /// Mean reward r(s, a). `probs` must hold P(· | s, a) for non-terminal steps.
  double reward(std::size_t step, std::size_t index, const FeatureVector& a,
                std::span<const double> probs) const;
  double reward(std::size_t step, std::size_t index, const FeatureVector& a) const;

  /// Structural consistency: dimensions, kernel shape, probability simplex at the zero action.
  void validate() const;
};

}  // namespace ballrl
