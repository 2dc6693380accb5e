#include "ballrl/policy.hpp"

#include <cmath>

#include "ballrl/errors.hpp"

namespace ballrl {

Policy Policy::basis(std::size_t step, std::size_t index, double scale) {
  return Policy(BasisDirectionPolicy{step, index, scale});
}

Policy Policy::greedy(std::vector<FeatureVector> theta_hat, GreedyDomain domain) {
  return Policy(GreedyThetaPolicy{std::move(theta_hat), domain});
}

Policy Policy::hierarchical(Policy prefix, std::size_t cut_step,
                            std::variant<ZeroTail, BasisAtCut> tail) {
  return Policy(HierarchicalPolicy{std::make_shared<const Policy>(std::move(prefix)), cut_step, tail});
}

FeatureVector Policy::action(std::size_t step, const ActionSet& revealed) const {
  const std::size_t dim = revealed.dim();
  if (std::holds_alternative<ZeroPolicy>(rep_)) return FeatureVector(dim);

  if (const auto* b = std::get_if<BasisDirectionPolicy>(&rep_)) {
    if (step != b->step) return FeatureVector(dim);
    return FeatureVector::basis(dim, b->index, b->scale);
  }

  if (const auto* g = std::get_if<GreedyThetaPolicy>(&rep_)) {
    if (step >= g->theta_hat.size()) throw DimensionMismatch("greedy policy has no estimate for step");
    const FeatureVector& theta = g->theta_hat[step];
    if (g->domain == GreedyDomain::ActionSet) return support_argmax(revealed, theta);
    require_dim(theta, dim, "greedy policy");
    FeatureVector a(dim);
    if (is_zero(theta)) return a;
    const double scale = revealed.inner_radius() / norm2(theta);
    for (std::size_t i = 0; i < dim; ++i) a[i] = scale * theta[i];
    return a;
  }

  const auto& hier = std::get<HierarchicalPolicy>(rep_);
  if (step < hier.cut_step) return hier.prefix->action(step, revealed);
  if (step == hier.cut_step) {
    if (const auto* probe = std::get_if<BasisAtCut>(&hier.tail)) {
      return FeatureVector::basis(dim, probe->index, revealed.inner_radius());
    }
  }
  return FeatureVector(dim);
}

}  // namespace ballrl
