#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "arbitrary.hpp"
#include "ballrl/convex_ballrl.hpp"
#include "ballrl/errors.hpp"
#include "ballrl/generator.hpp"
#include "ballrl/oracle.hpp"

using namespace ballrl;

namespace {

LinearQStarMdp identical_set_instance(std::uint64_t seed, ShapeKind family = ShapeKind::Ball, double noise = 0.0) {
  GeneratorConfig cfg;
  cfg.dim = 2;
  cfg.horizon = 2;
  cfg.states_per_step = {2, 3};
  cfg.action_set_family = family;
  cfg.radius_range = {0.1, 0.3};
  cfg.identical_sets_per_step = true;
  cfg.seed = seed;
  if (noise > 0.0) cfg.noise = BoundedUniformNoise{noise};
  return generate_instance(cfg);
}

}  // namespace

TEST(ConvexCounts, SampleComplexityFormula) {
  // 8 · 9 · 1 · 3 · log(180) / 0.0225 = 49852.39...
  EXPECT_EQ(convex_default_m(3, 1.0, 3, 0.15, 0.1), 49853u);
  EXPECT_EQ(convex_trajectory_count(49853, 3, 3, false), 897355u);
  EXPECT_EQ(convex_trajectory_count(49853, 3, 3, true), 49853u * 9 + 49853 + 1);
  EXPECT_EQ(convex_default_m(1, 2.0, 1, 1.0, 0.5), std::size_t(std::ceil(32.0 * std::log(4.0))));
}

TEST(ConvexCounts, ConfigValidation) {
  ConvexConfig cfg;
  cfg.epsilon = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ConvexConfig{};
  cfg.delta = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ConvexConfig{};
  cfg.m = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Bootstrap, RevealsSetsAndCostsOneEpisode) {
  TrajectorySource ball(single_path_instance({FeatureVector{0.1}, FeatureVector{0.1}, FeatureVector{0.1}},
                                             {ActionSet::ball(1, 0.2), ActionSet::ball(1, 0.2), ActionSet::ball(1, 0.2)},
                                             {FeatureVector{0.5}, FeatureVector{0.5}, FeatureVector{0.5}}));
  const Bootstrap b = bootstrap_radii(ball, RngStream(1));
  EXPECT_EQ(b.radii, (std::vector<double>{0.2, 0.2, 0.2}));
  EXPECT_EQ(ball.trajectories_used(), 1u);

  TrajectorySource box(single_path_instance({FeatureVector{0.1, 0.0}}, {ActionSet::box(2, 0.15)}, {FeatureVector{0.5, 0.5}}));
  EXPECT_EQ(bootstrap_radii(box, RngStream(1)).radii, (std::vector<double>{0.15}));
}

TEST(Bootstrap, MatchesGeneratorRecord) {
  for (std::uint64_t seed : {4u, 5u}) {
    const LinearQStarMdp mdp = identical_set_instance(seed, ShapeKind::Ellipsoid);
    TrajectorySource env(mdp);
    const Bootstrap b = bootstrap_radii(env, RngStream(9));
    for (std::size_t h = 0; h < mdp.horizon; ++h) {
      EXPECT_EQ(b.radii[h], mdp.state(h, 0).action_set.inner_radius());
      EXPECT_EQ(b.sets[h], mdp.state(h, 0).action_set);
    }
  }
}

TEST(ConvexRun, ExactOnDeterministicBandit) {
  TrajectorySource env(
      single_path_instance({FeatureVector{0.0, 0.0}}, {ActionSet::ball(2, 1.0)}, {FeatureVector{0.3, 0.4}}));
  ConvexConfig cfg;
  cfg.m = 1;
  const ConvexResult res = run_convex(env, cfg, RngStream(0));
  EXPECT_EQ(res.baseline_mean[0][0], 0.0);
  EXPECT_DOUBLE_EQ(res.probe_mean[0][0], 0.3);
  EXPECT_DOUBLE_EQ(res.probe_mean[0][1], 0.4);
  EXPECT_DOUBLE_EQ(res.theta_hat[0][0], 0.3);
  EXPECT_DOUBLE_EQ(res.theta_hat[0][1], 0.4);
  EXPECT_EQ(res.trajectories_used, 2u * 1 * 1 * 2 + 1);
}

TEST(ConvexRun, ZeroParametersGiveZeroPolicy) {
  LinearQStarMdp mdp = identical_set_instance(3);
  for (auto& t : mdp.theta_star) t = FeatureVector(2);
  mdp.rewards = backfill_rewards(mdp.states, mdp.kernel, mdp.theta_star);
  TrajectorySource env(mdp);
  ConvexConfig cfg;
  cfg.m = 50;
  const ConvexResult res = run_convex(env, cfg, RngStream(1));
  for (const auto& t : res.theta_hat) EXPECT_TRUE(is_zero(t));
  EXPECT_EQ(oracle::epsilon_gap(mdp, res.policy), 0.0);
}

TEST(ConvexRun, BudgetMatchesClosedForm) {
  for (bool share : {false, true}) {
    TrajectorySource env(identical_set_instance(6));
    ConvexConfig cfg;
    cfg.m = 37;
    cfg.share_baseline = share;
    const ConvexResult res = run_convex(env, cfg, RngStream(2));
    EXPECT_EQ(res.trajectories_used, convex_trajectory_count(37, 2, 2, share));
    EXPECT_EQ(env.trajectories_used(), res.trajectories_used);
  }
}

TEST(ConvexRun, DefaultMUsesRevealedRegularity) {
  TrajectorySource env(identical_set_instance(7, ShapeKind::Box));
  ConvexConfig cfg;
  cfg.epsilon = 1.0;
  cfg.delta = 0.5;
  const ConvexResult res = run_convex(env, cfg, RngStream(3));
  EXPECT_EQ(res.m, convex_default_m(2, std::sqrt(2.0), 2, 1.0, 0.5));
}

TEST(ConvexRun, EstimatorIsExactOnDeterministicPaths) {
  Xoshiro256 rng(61);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t d = 1 + ballrl::testing::pick(rng, 4), H = 1 + ballrl::testing::pick(rng, 3);
    std::vector<FeatureVector> phis, thetas;
    std::vector<ActionSet> sets;
    for (std::size_t h = 0; h < H; ++h) {
      const double r = uniform(rng, 0.02, 0.8 / double(H));
      sets.push_back(ActionSet::ball(d, r));
      phis.push_back((1.0 - r) * 0.5 * ballrl::testing::unit_vector(rng, d));
      thetas.push_back(uniform(rng, 0.1, 1.0) * ballrl::testing::unit_vector(rng, d));
    }
    const LinearQStarMdp mdp = single_path_instance(phis, sets, thetas);
    TrajectorySource env(mdp);
    ConvexConfig cfg;
    cfg.m = 1;
    const ConvexResult res = run_convex(env, cfg, RngStream(std::uint64_t(trial)));
    for (std::size_t h = 0; h < H; ++h) {
      for (std::size_t i = 0; i < d; ++i) ASSERT_NEAR(res.theta_hat[h][i], thetas[h][i], 1e-12);
    }
    ASSERT_LE(std::abs(oracle::epsilon_gap(mdp, res.policy)), 1e-9);
  }
}

TEST(ConvexProperty, ErrorBoundHoldsInMostSeededRuns) {
  const double delta = 0.1;
  const std::size_t m = 2000, d = 2, H = 2;
  const double delta_prime = delta / (2.0 * double(d * H));
  const double bound = std::sqrt(2.0 * double(d) * std::log(1.0 / delta_prime) / double(m));
  const LinearQStarMdp mdp = identical_set_instance(11, ShapeKind::Ball, 0.05);
  int within = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    TrajectorySource env(mdp);
    ConvexConfig cfg;
    cfg.m = m;
    cfg.delta = delta;
    const ConvexResult res = run_convex(env, cfg, RngStream(seed));
    bool ok = true;
    for (std::size_t h = 0; h < H; ++h) {
      ok = ok && res.bootstrap.radii[h] * norm2(res.theta_hat[h] - mdp.theta_star[h]) <= bound;
    }
    within += ok ? 1 : 0;
  }
  EXPECT_GE(within, 90);
}

TEST(ConvexProperty, LearnerSourcesNeverTouchGroundTruth) {
  for (const char* file : {"src/convex_ballrl.cpp", "include/ballrl/convex_ballrl.hpp", "src/diffr_ballrl.cpp",
                           "include/ballrl/diffr_ballrl.hpp"}) {
    std::ifstream in(std::string(BALLRL_SOURCE_DIR) + "/" + file);
    ASSERT_TRUE(in) << file;
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    for (const char* forbidden : {"oracle.hpp", "generator.hpp", "instance_io.hpp", "mdp.hpp", "theta_star",
                                  "LinearQStarMdp", ".phi"}) {
      EXPECT_EQ(text.find(forbidden), std::string::npos) << file << " mentions " << forbidden;
    }
  }
}
