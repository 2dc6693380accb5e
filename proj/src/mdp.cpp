#include "ballrl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ballrl/errors.hpp"

namespace ballrl {

std::string_view to_string(KernelKind kind) {
  return kind == KernelKind::ActionIndependent ? "action_independent" : "softmax_affine";
}

KernelKind kernel_kind_from_string(std::string_view name) {
  if (name == "action_independent") return KernelKind::ActionIndependent;
  if (name == "softmax_affine") return KernelKind::SoftmaxAffine;
  throw ConfigError("unknown kernel family '" + std::string(name) + "'");
}

TransitionKernel::TransitionKernel(KernelKind kind, std::vector<std::vector<TransitionRow>> rows)
    : kind_(kind), rows_(std::move(rows)) {
  const std::size_t want = kind == KernelKind::ActionIndependent ? 0 : 1;
  for (const auto& step : rows_) {
    for (const auto& row : step) {
      if (row.index() != want) throw ConfigError("transition row does not match kernel kind");
    }
  }
}

void TransitionKernel::distribution(std::size_t step, std::size_t state, const FeatureVector& a,
                                    std::vector<double>& out) const {
  const TransitionRow& r = rows_[step][state];
  if (const auto* table = std::get_if<ActionIndependentRow>(&r)) {
    out.assign(table->probs.begin(), table->probs.end());
    return;
  }
  const auto& soft = std::get<SoftmaxAffineRow>(r);
  const std::size_t n = soft.biases.size();
  out.resize(n);
  double top = -HUGE_VAL;
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = dot(a, soft.weights[j]) + soft.biases[j];
    top = std::max(top, out[j]);
  }
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = std::exp(out[j] - top);
    total += out[j];
  }
  for (double& p : out) p /= total;
}

std::vector<double> TransitionKernel::distribution(std::size_t step, std::size_t state,
                                                   const FeatureVector& a) const {
  std::vector<double> out;
  distribution(step, state, a, out);
  return out;
}

std::vector<std::size_t> TransitionKernel::support(std::size_t step, std::size_t state) const {
  std::vector<std::size_t> out;
  const TransitionRow& r = rows_[step][state];
  if (const auto* table = std::get_if<ActionIndependentRow>(&r)) {
    for (std::size_t j = 0; j < table->probs.size(); ++j) {
      if (table->probs[j] > 0.0) out.push_back(j);
    }
  } else {
    const std::size_t n = std::get<SoftmaxAffineRow>(r).biases.size();
    for (std::size_t j = 0; j < n; ++j) out.push_back(j);
  }
  return out;
}

double LinearQStarMdp::reward(std::size_t step, std::size_t index, const FeatureVector& a,
                              std::span<const double> probs) const {
  const RewardRow& row = rewards[step][index];
  double r = row.offset + dot(row.slope, a);
  for (std::size_t j = 0; j < row.continuation.size(); ++j) r -= probs[j] * row.continuation[j];
  return r;
}

double LinearQStarMdp::reward(std::size_t step, std::size_t index, const FeatureVector& a) const {
  if (is_terminal(step)) return reward(step, index, a, {});
  const auto probs = kernel.distribution(step, index, a);
  return reward(step, index, a, probs);
}

void LinearQStarMdp::validate() const {
  auto fail = [](const std::string& msg) { throw FormatError("invalid instance: " + msg); };
  if (dim == 0 || horizon == 0) fail("dimension and horizon must be positive");
  if (states.size() != horizon) fail("states must list every step");
  if (theta_star.size() != horizon) fail("theta_star must have one vector per step");
  if (rewards.size() != horizon) fail("rewards must list every step");
  if (kernel.rows().size() + 1 != horizon) fail("kernel must have rows for steps 1..H-1");
  for (const auto& t : theta_star) {
    if (t.size() != dim || !all_finite(t)) fail("theta_star entries must be finite d-vectors");
  }
  for (std::size_t h = 0; h < horizon; ++h) {
    if (states[h].empty()) fail("step " + std::to_string(h + 1) + " has no states");
    if (rewards[h].size() != states[h].size()) fail("reward rows do not match states");
    const std::size_t next = h + 1 < horizon ? states[h + 1].size() : 0;
    for (std::size_t s = 0; s < states[h].size(); ++s) {
      const StateSpec& st = states[h][s];
      if (st.step != h) fail("state step tag mismatch");
      if (st.phi.size() != dim || !all_finite(st.phi)) fail("state feature must be a finite d-vector");
      if (st.action_set.dim() != dim) fail("action set dimension mismatch");
      const RewardRow& rr = rewards[h][s];
      if (rr.slope.size() != dim) fail("reward slope dimension mismatch");
      if (rr.continuation.size() != next) fail("reward continuation length mismatch");
      if (h + 1 < horizon) {
        if (kernel.rows()[h].size() != states[h].size()) fail("kernel rows do not match states");
        const TransitionRow& row = kernel.row(h, s);
        if (const auto* table = std::get_if<ActionIndependentRow>(&row)) {
          if (table->probs.size() != next) fail("transition table length mismatch");
          double total = 0.0;
          for (double p : table->probs) {
            if (!(p >= 0.0)) fail("negative transition probability");
            total += p;
          }
          if (std::abs(total - 1.0) > 1e-12) fail("transition probabilities must sum to 1");
        } else {
          const auto& soft = std::get<SoftmaxAffineRow>(row);
          if (soft.biases.size() != next || soft.weights.size() != next) {
            fail("softmax row length mismatch");
          }
          for (const auto& w : soft.weights) {
            if (w.size() != dim) fail("softmax weight dimension mismatch");
          }
        }
      }
    }
  }
  if (mu.size() != states[0].size()) fail("initial distribution length mismatch");
  double total = 0.0;
  for (double p : mu) {
    if (!(p >= 0.0)) fail("negative initial probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) fail("initial distribution must sum to 1");
}

}  // namespace ballrl
