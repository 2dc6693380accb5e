#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "arbitrary.hpp"
#include "ballrl/diffr_ballrl.hpp"
#include "ballrl/errors.hpp"
#include "ballrl/generator.hpp"
#include "ballrl/oracle.hpp"

using namespace ballrl;

namespace {

BatchStats stats(double reward, double tail) {
  BatchStats s;
  s.mean_total_reward = reward;
  s.mean_radius_tail = tail;
  s.count = 1;
  return s;
}

GeneratorConfig theta_mode_config(std::uint64_t seed, KernelKind kernel = KernelKind::SoftmaxAffine) {
  GeneratorConfig cfg;
  cfg.dim = 2;
  cfg.horizon = 2;
  cfg.states_per_step = {2, 3};
  cfg.kernel_family = kernel;
  cfg.radius_range = {0.05, 0.2};
  cfg.theta_target = 0.6;
  cfg.seed = seed;
  return cfg;
}

double cosine(const FeatureVector& a, const FeatureVector& b) { return dot(a, b) / (norm2(a) * norm2(b)); }

}  // namespace

TEST(DiffRParameters, DeskScaleValues) {
  DiffRConfig cfg;
  cfg.epsilon = 0.25;
  cfg.delta = 0.1;
  const DiffRParameters p = derive_parameters(cfg, 2, 2);
  EXPECT_DOUBLE_EQ(p.eps_tilde, 1.0 / 64);
  EXPECT_DOUBLE_EQ(p.eta, 1.0 / 128);
  EXPECT_EQ(p.grid_size, 128u);
  EXPECT_DOUBLE_EQ(p.iteration_bound, 13.0);
  EXPECT_NEAR(p.delta_prime, 0.1 / (770.0 * 13.0), 1e-15);
  EXPECT_EQ(p.theory_m1, 1509154u);
  EXPECT_EQ(p.theory_m2, 1910022u);
  EXPECT_EQ(p.m1, p.theory_m1);
  EXPECT_FALSE(p.overridden);
  EXPECT_EQ(p.trajectories_per_iteration(2), 3u * 1509154 + 128u * 1910022);
  EXPECT_GE(double(p.grid_size) * p.eta, 1.0);
}

TEST(DiffRParameters, IterationBoundForFourSteps) {
  DiffRConfig cfg;
  cfg.epsilon = 0.5;
  const DiffRParameters p = derive_parameters(cfg, 4, 3);
  EXPECT_DOUBLE_EQ(p.eps_tilde, 1.0 / 64);
  EXPECT_DOUBLE_EQ(p.iteration_bound, 25.0);
}

TEST(DiffRParameters, OverridesAndValidation) {
  DiffRConfig cfg;
  cfg.m1_override = 7;
  cfg.m2_override = 3;
  const DiffRParameters p = derive_parameters(cfg, 2, 2);
  EXPECT_EQ(p.m1, 7u);
  EXPECT_EQ(p.m2, 3u);
  EXPECT_TRUE(p.overridden);
  cfg.m2_override = 0;
  EXPECT_THROW(derive_parameters(cfg, 2, 2), ConfigError);
  cfg = DiffRConfig{};
  cfg.epsilon = 1.5;
  EXPECT_THROW(derive_parameters(cfg, 2, 2), ConfigError);
}

TEST(WorkItem, InitialStateSelectsFirstStepFirstCandidate) {
  const LoopState s = LoopState::initial(3, 2, 5);
  const auto item = select_work_item(s, 0.01);
  ASSERT_TRUE(item);
  EXPECT_EQ(*item, (std::pair<std::size_t, std::size_t>{0, 0}));
}

TEST(WorkItem, NothingSelectedWhenNoCandidateDoublesCoverage) {
  LoopState s = LoopState::initial(2, 2, 4);
  s.coverage = {0.5, 0.5};
  for (auto& row : s.candidate_radius) row = {0.9, 0.3};
  EXPECT_FALSE(select_work_item(s, 0.01));
}

TEST(WorkItem, PicksSmallestStepThenCandidate) {
  LoopState s = LoopState::initial(2, 2, 4);
  s.coverage = {0.5, 0.0};
  for (auto& row : s.candidate_radius) row = {0.2, 0.0};
  s.candidate_radius[2][0] = 1.0;
  s.candidate_radius[3][0] = 1.0;
  EXPECT_EQ(*select_work_item(s, 0.01), (std::pair<std::size_t, std::size_t>{0, 2}));
}

TEST(WorkItem, RadiiBelowThresholdAreIgnored) {
  LoopState s = LoopState::initial(2, 2, 3);
  for (auto& row : s.candidate_radius) row = {0.005, 0.009};
  EXPECT_FALSE(select_work_item(s, 0.01));
}

TEST(Estimator, HandExample) {
  // ((0.3 - 0.1) · 0.5 + 0.7 - 0.6) / 0.5 = 0.4
  EXPECT_NEAR(diffr_component(0.3, 0.1, 0.5, 0.7, 0.6, 0.5), 0.4, 1e-15);
}

TEST(Estimator, IdenticalStatisticsGiveZero) {
  const BatchStats b = stats(0.4, 0.2);
  const FeatureVector t = estimate_theta_grid(b, {b, b, b}, 0.7, 0.3);
  EXPECT_TRUE(is_zero(t));
  EXPECT_EQ(t.size(), 3u);
}

TEST(Estimator, ZeroRadiusIsRejected) {
  EXPECT_THROW(diffr_component(0.1, 0.1, 0.5, 0.2, 0.1, 0.0), std::invalid_argument);
}

TEST(Estimator, LongEstimatesAreNormalized) {
  const FeatureVector t = estimate_theta_grid(stats(0.0, 0.0), {stats(0.3, 0.0), stats(0.4, 0.0)}, 0.5, 0.1);
  EXPECT_NEAR(t[0], 0.6, 1e-12);
  EXPECT_NEAR(t[1], 0.8, 1e-12);
  const FeatureVector short_t = estimate_theta_grid(stats(0.0, 0.0), {stats(0.03, 0.0), stats(0.04, 0.0)}, 0.5, 0.1);
  EXPECT_NEAR(short_t[0], 0.3, 1e-12);
  EXPECT_NEAR(short_t[1], 0.4, 1e-12);
}

TEST(Estimator, GreedyPolicyIgnoresEstimateScale) {
  const ActionSet set = ActionSet::ball(2, 0.3);
  const FeatureVector t{0.3, -0.4};
  EXPECT_EQ(Policy::greedy({t}, GreedyDomain::InscribedBall).action(0, set),
            Policy::greedy({2.0 * t}, GreedyDomain::InscribedBall).action(0, set));
}

TEST(Hierarchical, ActionsFollowPrefixThenProbeThenZero) {
  const LinearQStarMdp mdp = [] {
    GeneratorConfig cfg = theta_mode_config(3);
    cfg.horizon = 3;
    cfg.states_per_step = {2, 2, 2};
    cfg.radius_range = {0.05, 0.15};
    return generate_instance(cfg);
  }();
  const Policy prefix = Policy::greedy(mdp.theta_star, GreedyDomain::InscribedBall);
  const HierarchicalFamily fam = build_hierarchical_policies(prefix, 1, 2);
  ASSERT_EQ(fam.probes.size(), 2u);

  Xoshiro256 rng(17);
  for (int episode = 0; episode < 1000; ++episode) {
    const std::size_t i = std::size_t(episode % 2);
    const TrajectoryObservation obs = rollout(mdp, fam.probes[i], rng);
    ASSERT_EQ(obs.action_sets.size(), 3u);
    EXPECT_EQ(fam.probes[i].action(0, obs.action_sets[0]), prefix.action(0, obs.action_sets[0]));
    EXPECT_EQ(fam.baseline.action(0, obs.action_sets[0]), prefix.action(0, obs.action_sets[0]));
    const ActionSet& cut = obs.action_sets[1];
    EXPECT_EQ(fam.probes[i].action(1, cut), FeatureVector::basis(2, i, cut.inner_radius()));
    EXPECT_TRUE(is_zero(fam.baseline.action(1, cut)));
    EXPECT_TRUE(is_zero(fam.probes[i].action(2, obs.action_sets[2])));
  }
}

TEST(Hierarchical, FirstStepCutIgnoresPrefix) {
  const Policy prefix = Policy::basis(0, 1, 0.1);
  const HierarchicalFamily fam = build_hierarchical_policies(prefix, 0, 2);
  const ActionSet set = ActionSet::ball(2, 0.2);
  EXPECT_TRUE(is_zero(fam.baseline.action(0, set)));
  EXPECT_EQ(fam.probes[0].action(0, set), FeatureVector::basis(2, 0, 0.2));
}

// With exact expectations and ξ = Θ the estimator recovers θ*_h exactly on ball instances.
TEST(EstimatorProperty, ExactExpectationsRecoverParameters) {
  Xoshiro256 rng(23);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    GeneratorConfig cfg = theta_mode_config(seed);
    cfg.horizon = 2 + seed % 2;
    cfg.states_per_step.assign(cfg.horizon, 2);
    cfg.radius_range = {0.05, 0.9 / double(cfg.horizon)};
    const LinearQStarMdp mdp = generate_instance(cfg);
    std::vector<FeatureVector> guess;
    for (std::size_t h = 0; h < mdp.horizon; ++h) guess.push_back(ballrl::testing::unit_vector(rng, mdp.dim));
    const Policy prefix = Policy::greedy(guess, GreedyDomain::InscribedBall);

    for (std::size_t h = 0; h < mdp.horizon; ++h) {
      const HierarchicalFamily fam = build_hierarchical_policies(prefix, h, mdp.dim);
      const double rho = oracle::expected_radius(mdp, prefix)[h];
      const oracle::TelescopeTerms base = oracle::telescope_terms(mdp, fam.baseline);
      for (std::size_t i = 0; i < mdp.dim; ++i) {
        const oracle::TelescopeTerms probe = oracle::telescope_terms(mdp, fam.probes[i]);
        const double est = diffr_component(probe.radius_tail, base.radius_tail, *mdp.theta_norm,
                                           probe.reward_term, base.reward_term, rho);
        ASSERT_NEAR(est, mdp.theta_star[h][i], 1e-12) << "seed " << seed << " step " << h;
      }
    }
  }
}

TEST(DiffRRun, TinyRadiiStopAfterOneIteration) {
  const LinearQStarMdp mdp = single_path_instance({FeatureVector{0.2, 0.1}, FeatureVector{0.1, 0.1}},
                                                  {ActionSet::ball(2, 0.01), ActionSet::ball(2, 0.01)},
                                                  {FeatureVector{0.3, 0.4}, FeatureVector{0.4, 0.3}});
  TrajectorySource env(mdp);
  DiffRConfig cfg;
  cfg.m1_override = 1;
  cfg.m2_override = 1;
  const DiffRResult res = run_diffr(env, cfg, RngStream(5));
  EXPECT_EQ(res.outer_iterations, 1u);
  EXPECT_LE(oracle::epsilon_gap(mdp, res.policy), cfg.epsilon / 2);
}

TEST(DiffRRun, NoiselessGridAlignedInstanceIsSolved) {
  // Θ = 64/128 sits on the grid.
  const double big = 0.5;
  const LinearQStarMdp mdp = single_path_instance(
      {FeatureVector{0.1, 0.0}, FeatureVector{0.0, 0.1}},
      {ActionSet::ball(2, 0.3), ActionSet::ball(2, 0.25)},
      {FeatureVector{big * 0.6, -big * 0.8}, FeatureVector{-big * 0.8, big * 0.6}});
  TrajectorySource env(mdp);
  DiffRConfig cfg;
  cfg.m1_override = 1;
  cfg.m2_override = 1;
  const DiffRResult res = run_diffr(env, cfg, RngStream(8));
  EXPECT_LE(oracle::epsilon_gap(mdp, res.policy), cfg.epsilon / 2);
  for (std::size_t h = 0; h < 2; ++h) EXPECT_NEAR(cosine(res.grid_estimates[63][h], mdp.theta_star[h]), 1.0, 1e-12);
  EXPECT_LE(double(res.outer_iterations), res.params.iteration_bound);
}

TEST(DiffRRun, BudgetCoverageAndDeterminism) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const LinearQStarMdp mdp = generate_instance(theta_mode_config(seed));
    TrajectorySource env(mdp);
    DiffRConfig cfg;
    cfg.m1_override = 64;
    cfg.m2_override = 16;
    const DiffRResult res = run_diffr(env, cfg, RngStream(seed));
    EXPECT_EQ(res.trajectories_used, res.outer_iterations * res.params.trajectories_per_iteration(2));
    EXPECT_EQ(env.trajectories_used(), res.trajectories_used);
    EXPECT_LE(double(res.outer_iterations), res.params.iteration_bound);
    ASSERT_EQ(res.trace.size(), res.outer_iterations);
    for (const DiffRIteration& it : res.trace) {
      EXPECT_GE(it.coverage_after, 2.0 * it.coverage_before);
      EXPECT_GE(it.coverage_after, res.params.eps_tilde);
    }

    TrajectorySource again(mdp);
    const DiffRResult twin = run_diffr(again, cfg, RngStream(seed));
    EXPECT_EQ(twin.outer_iterations, res.outer_iterations);
    EXPECT_EQ(twin.grid_estimates, res.grid_estimates);
  }
}
