// Copyright 2026 The stbound Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "stb/rlcore.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <memory>

namespace stb {
namespace {

// Forward-view lambda-return with n-step returns bootstrapped on values.
double lambda_return(const std::vector<double>& r, const std::vector<double>& v,
                     double boot, double gamma, double lambda, std::size_t t) {
  const std::size_t n_max = r.size() - t;
  auto n_step = [&](std::size_t n) {
    double g = 0.0;
    for (std::size_t i = 0; i < n; ++i) g += std::pow(gamma, i) * r[t + i];
    const double tail = t + n < r.size() ? v[t + n] : boot;
    return g + std::pow(gamma, n) * tail;
  };
  double out = 0.0;
  for (std::size_t n = 1; n < n_max; ++n) {
    out += (1 - lambda) * std::pow(lambda, n - 1) * n_step(n);
  }
  return out + std::pow(lambda, n_max - 1) * n_step(n_max);
}

TEST(GaeTest, MatchesForwardView) {
  Rng rng = make_stream(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> len(1, 30);
  for (int ep = 0; ep < 50; ++ep) {
    const int n = len(rng);
    std::vector<double> r(n);
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) {
      r[i] = u(rng);
      v[i] = u(rng);
    }
    const double boot = u(rng);
    const double gamma = 0.95;
    const double lambda = 0.9;
    const auto targets = td_lambda_targets(r, v, boot, gamma, lambda);
    const auto adv = gae(r, v, boot, gamma, lambda);
    for (int t = 0; t < n; ++t) {
      const double expect = lambda_return(r, v, boot, gamma, lambda, t);
      EXPECT_NEAR(targets[t], expect, 1e-12);
      EXPECT_NEAR(adv[t], expect - v[t], 1e-12);
    }
  }
}

TEST(GaeTest, LambdaEdges) {
  const std::vector<double> r{1.0, 0.5, -0.25};
  const std::vector<double> v{0.25, 0.5, 0.75};
  const double g = 0.5;
  const auto a0 = gae(r, v, 2.0, g, 0.0);
  EXPECT_EQ(a0[0], 1.0 + g * 0.5 - 0.25);
  EXPECT_EQ(a0[2], -0.25 + g * 2.0 - 0.75);
  const auto a1 = gae(r, v, 2.0, g, 1.0);
  EXPECT_EQ(a1[0], 1.0 + g * 0.5 + g * g * -0.25 + g * g * g * 2.0 - 0.25);
  EXPECT_THROW(gae(r, std::vector<double>{1.0}, 0.0, g, 1.0),
               std::invalid_argument);
}

TEST(RewardTest, Composition) {
  EXPECT_EQ(survival_reward(CheckResult::Within()), 1.0);
  EXPECT_EQ(survival_reward(CheckResult::Violated("x")), 0.0);
  EXPECT_EQ(compose_reward(1.0, std::nullopt, std::nullopt, 0.5), 1.0);
  EXPECT_EQ(compose_reward(0.0, 0.8, 0.9, 0.5), 0.0);
  EXPECT_EQ(compose_reward(1.0, 0.25, std::nullopt, 0.5), 0.25);
  EXPECT_DOUBLE_EQ(compose_reward(1.0, 0.5, 1.0, 0.8), 0.2 * 1.0 + 0.8 * 0.5);
}

TEST(SurrogateTest, ClipBranches) {
  EXPECT_DOUBLE_EQ(clipped_surrogate(1.3, 2.0, 0.2), 1.2 * 2.0);
  EXPECT_DOUBLE_EQ(clipped_surrogate(1.1, 2.0, 0.2), 1.1 * 2.0);
  EXPECT_DOUBLE_EQ(clipped_surrogate(1.3, -2.0, 0.2), 1.3 * -2.0);
  EXPECT_DOUBLE_EQ(clipped_surrogate(0.5, -1.0, 0.2), 0.8 * -1.0);
}

TEST(FeaturizeTest, Layout) {
  const SystemState s{{1.0, 2.0}, {3.0, 4.0}, 0.0};
  EXPECT_EQ(featurize(s, Phase(0.25)),
            (std::vector<double>{0.25, 1.0, 2.0, 3.0, 4.0}));
  EXPECT_EQ(feature_size(SystemKind::kPendulum), 3);
}

struct Fixture {
  std::shared_ptr<const ReferenceMotion> ref;
  PolicyNet policy;
};

Fixture constant_policy(double x) {
  Fixture f;
  f.ref = std::make_shared<const ReferenceMotion>(
      std::vector<std::string>{"x", "v"}, std::vector<double>{0.0, 1.0},
      std::vector<std::vector<double>>{{x, 0.0}, {x, 0.0}}, true, 2.0);
  f.policy.reference = f.ref;
  f.policy.action_channels = {0};
  f.policy.fbc = Mlp({3, 4, 1});
  f.policy.head.log_std = {std::log(0.3)};
  return f;
}

TEST(RolloutTest, ReferenceReplayCompletes) {
  Fixture f = constant_policy(0.3);
  const SystemSpec spec = default_spec(SystemKind::kDoubleIntegrator1D);
  const Environment env(
      ReferenceTrack(spec, *f.ref),
      preset_bounds("default", SystemKind::kDoubleIntegrator1D), RewardSpec{});
  Rng rng = make_stream(1);
  const Event start = make_event(env.track().state_at(0.5));
  const Episode ep = rollout(env, f.policy, nullptr, start, 120, false, rng);
  EXPECT_EQ(ep.cause, TerminationCause::kHorizon);
  EXPECT_EQ(ep.steps.size(), 120u);
  EXPECT_EQ(ep.total_reward(), 120.0);
  EXPECT_NEAR(ep.steps.back().next_state.t, 0.5 + 120 / 30.0, 1e-9);
}

TEST(RolloutTest, EarlyTerminationAtFirstViolation) {
  Fixture f = constant_policy(0.0);
  // A constant feedback offset of 0.5 drives the mass out of the 0.2 band.
  f.policy.fbc.params().back() = 0.5;
  const SystemSpec spec = default_spec(SystemKind::kDoubleIntegrator1D);
  const Environment env(
      ReferenceTrack(spec, *f.ref),
      preset_bounds("default", SystemKind::kDoubleIntegrator1D), RewardSpec{});
  Rng rng = make_stream(2);
  const Episode ep = rollout(env, f.policy, nullptr,
                             make_event(env.track().state_at(0.0)), 600, true,
                             rng);
  ASSERT_EQ(ep.cause, TerminationCause::kBoundViolation);
  EXPECT_EQ(ep.violated_channel, "com_pos");
  EXPECT_EQ(ep.total_reward(), ep.survived_steps());
  for (std::size_t k = 0; k + 1 < ep.steps.size(); ++k) {
    const auto& s = ep.steps[k].next_state;
    EXPECT_TRUE(check_event(env.bounds(), env.track(), make_event(s)).within);
    EXPECT_EQ(ep.steps[k].reward, 1.0);
  }
  EXPECT_EQ(ep.steps.back().reward, 0.0);
  EXPECT_FALSE(check_event(env.bounds(), env.track(),
                           make_event(ep.steps.back().next_state))
                   .within);
}

TEST(RolloutTest, NonCyclicReferenceEndsAtEndState) {
  auto ref = std::make_shared<const ReferenceMotion>(
      std::vector<std::string>{"x", "v"}, std::vector<double>{0.0, 1.0},
      std::vector<std::vector<double>>{{0.0, 0.0}, {0.0, 0.0}}, false);
  PolicyNet p;
  p.reference = ref;
  p.action_channels = {0};
  p.fbc = Mlp({3, 1});
  p.head.log_std = {0.0};
  const Environment env(
      ReferenceTrack(default_spec(SystemKind::kDoubleIntegrator1D), *ref),
      preset_bounds("default", SystemKind::kDoubleIntegrator1D), RewardSpec{});
  Rng rng = make_stream(3);
  const Episode ep =
      rollout(env, p, nullptr, make_event(env.track().state_at(0.0)), 600,
              false, rng);
  EXPECT_EQ(ep.cause, TerminationCause::kEndState);
  EXPECT_EQ(ep.steps.size(), 30u);
  EXPECT_EQ(ep.bootstrap_value, 0.0);
}

TEST(EnvironmentTest, ImitationAndEnergy) {
  Fixture f = constant_policy(0.0);
  RewardSpec rw;
  rw.style = true;
  rw.imitation = true;
  rw.style_cfg.e_min = 0.0;
  rw.style_cfg.e_max = 1.0;
  const Environment env(
      ReferenceTrack(default_spec(SystemKind::kDoubleIntegrator1D), *f.ref),
      preset_bounds("default", SystemKind::kDoubleIntegrator1D), rw);
  EXPECT_EQ(env.imitation_reward(make_event(env.track().state_at(0.1))), 1.0);
  const Event off{{{0.1}, {0.0}, 0.1}, 0.1};
  EXPECT_NEAR(env.imitation_reward(off), std::exp(-0.25), 1e-12);

  Environment::StyleHistory h(env);
  const SystemState prev{{0.0}, {0.0}, 0.0};
  const SystemState next{{0.0}, {0.5}, 1.0 / 30};
  // Kinetic energy 0.125 J on [0, 1]: energy_down gives 1 - 0.125.
  EXPECT_NEAR(h.observe(prev, next), energy_reward(0.125, rw.style_cfg), 1e-15);
  EXPECT_TRUE(h.padded());
}

TEST(PpoTest, FirstStepRatioIsOneAndUpdateFollowsAdvantage) {
  Fixture f = constant_policy(0.0);
  Rng rng = make_stream(4);
  f.policy.fbc = Mlp::initialized({3, 8, 1}, rng);
  Mlp value = Mlp::initialized({3, 8, 1}, rng, 1.0);
  // A one-state bandit where larger actions earn more.
  std::vector<Sample> batch;
  const std::vector<double> feat{0.0, 0.0, 0.0};
  double mean_before = 0.0;
  for (int i = 0; i < 512; ++i) {
    const ActionSample a = policy_action(f.policy, feat, Phase(0.0), true, rng);
    mean_before = a.mean[0];
    batch.push_back({feat, a.ffc, a.action, a.log_prob, a.action[0], 0.0});
  }
  double mu = 0.0;
  for (const auto& s : batch) mu += s.advantage / batch.size();
  for (auto& s : batch) s.advantage -= mu;
  TrainConfig cfg;
  cfg.actor_lr = 1e-3;
  cfg.minibatch = 64;
  OptimizerState opt = make_optimizer(f.policy, value);
  const PpoStats st = ppo_update(batch, f.policy, value, opt, cfg, rng);
  EXPECT_LT(st.first_step_max_ratio_error, 1e-12);
  EXPECT_EQ(st.skipped_minibatches, 0);
  const ActionSample after =
      policy_action(f.policy, feat, Phase(0.0), false, rng);
  EXPECT_GT(after.mean[0], mean_before);
  EXPECT_THROW(ppo_update({}, f.policy, value, opt, cfg, rng),
               std::invalid_argument);
}

TEST(TrainConfigTest, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_DOUBLE_EQ(c.gamma, 0.95);
  EXPECT_DOUBLE_EQ(c.lambda, 0.95);
  c.gamma = 1.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = TrainConfig{};
  c.clip = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = TrainConfig{};
  c.minibatch = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace stb
