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

#ifndef STB_RLCORE_HPP_
#define STB_RLCORE_HPP_

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stb/bounds.hpp"
#include "stb/dynsys.hpp"
#include "stb/nn.hpp"
#include "stb/reference.hpp"
#include "stb/style.hpp"

namespace stb {

// [phase, q..., qdot...]
std::vector<double> featurize(const SystemState& state, Phase phase);
int feature_size(SystemKind kind);

// Feedforward reference lookup plus a feedback network correction:
// mean action = q-hat(phase) + fbc(features).
struct PolicyNet {
  std::shared_ptr<const ReferenceMotion> reference;
  std::vector<int> action_channels;
  Mlp fbc;
  GaussianHead head;

  int action_dim() const { return static_cast<int>(action_channels.size()); }
};

struct ActionSample {
  std::vector<double> action;
  std::vector<double> mean;
  std::vector<double> ffc;
  double log_prob = 0.0;
};

// Explore samples from the Gaussian head; otherwise the mean is returned.
// log_prob is always the density of the returned action.
ActionSample policy_action(const PolicyNet& policy,
                           std::span<const double> features, Phase phase,
                           bool explore, Rng& rng);

double survival_reward(const CheckResult& check);

// survival * inner, where inner is 1 without extra terms, the style reward
// alone, or (1 - w_s) r_i + w_s r_s when an imitation reward is present.
double compose_reward(double survival, std::optional<double> style,
                      std::optional<double> imitation, double w_s);

enum class TerminationCause { kNone, kBoundViolation, kHorizon, kEndState };
std::string_view to_string(TerminationCause cause);

struct Transition {
  std::vector<double> features;
  double phase = 0.0;
  std::vector<double> ffc;
  std::vector<double> action;
  double log_prob = 0.0;
  double reward = 0.0;
  double value = 0.0;
  bool done = false;
  TerminationCause cause = TerminationCause::kNone;
  std::string violated_channel;
  SystemState next_state;
  double energy = 0.0;  // kinetic energy of next_state, J
};

struct Episode {
  Event start;
  std::vector<Transition> steps;
  TerminationCause cause = TerminationCause::kNone;
  std::string violated_channel;
  double bootstrap_value = 0.0;
  bool aborted = false;
  std::string diagnostic;

  double total_reward() const;
  // Steps that earned survival (all but a terminal violation step).
  int survived_steps() const;
};

struct RewardSpec {
  bool terminate_on_bounds = true;
  bool style = false;
  bool imitation = false;
  bool regularize = false;
  double w_s = 0.5;
  StyleConfig style_cfg;
  Matrix gram_target;

  bool operator==(const RewardSpec&) const = default;
};

// System + reference + bounds + reward terms. Immutable; rollouts keep their
// own per-episode style history.
class Environment {
 public:
  Environment(ReferenceTrack track, SpacetimeBoundSet bounds,
              RewardSpec reward);

  const ReferenceTrack& track() const { return track_; }
  const SystemSpec& spec() const { return track_.spec(); }
  const SpacetimeBoundSet& bounds() const { return bounds_; }
  const RewardSpec& reward() const { return reward_; }
  int style_window() const { return window_; }

  // exp(-mean_c (deviation_c / sigma_c)^2) over channels with finite sigma.
  double imitation_reward(const Event& e) const;
  // Per-channel standardized [q, qdot] features used for Gram matrices.
  std::vector<double> style_features(const SystemState& s) const;

  class StyleHistory;

 private:
  ReferenceTrack track_;
  SpacetimeBoundSet bounds_;
  RewardSpec reward_;
  int window_ = 1;
  std::vector<double> feat_mean_;
  std::vector<double> feat_scale_;
};

// Sliding one-cycle memory of an episode for style terms.
class Environment::StyleHistory {
 public:
  explicit StyleHistory(const Environment& env);
  // Style reward r_s * r_reg after stepping from prev to next.
  double observe(const SystemState& prev, const SystemState& next);
  // True while the Gram window is still zero-padded.
  bool padded() const { return count_ < env_.window_; }

 private:
  const Environment& env_;
  std::vector<std::vector<double>> features_;
  std::vector<std::array<double, 2>> points_;
  int count_ = 0;
  int head_ = 0;
};

// Runs the policy from `init` until a bound violation, the end of a
// non-cyclic reference, or max_steps. A non-finite simulation state aborts
// the episode (aborted = true, diagnostic set).
Episode rollout(const Environment& env, const PolicyNet& policy,
                const Mlp* value_net, const Event& init, int max_steps,
                bool explore, Rng& rng);

// A_t = sum_l (gamma lambda)^l delta_{t+l}, delta_t = r_t + gamma V_{t+1} - V_t
// with V_T = bootstrap.
std::vector<double> gae(std::span<const double> rewards,
                        std::span<const double> values, double bootstrap,
                        double gamma, double lambda);

// V_t + A_t.
std::vector<double> td_lambda_targets(std::span<const double> rewards,
                                      std::span<const double> values,
                                      double bootstrap, double gamma,
                                      double lambda);

struct TrainConfig {
  double gamma = 0.95;
  double lambda = 0.95;
  double clip = 0.2;
  double actor_lr = 2.5e-6;
  double critic_lr = 1.0e-2;
  int samples_per_epoch = 4096;
  int minibatch = 256;
  int max_steps = 600;  // 20 s at 30 Hz control
  int update_epochs = 5;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct Sample {
  std::vector<double> features;
  std::vector<double> ffc;
  std::vector<double> action;
  double old_log_prob = 0.0;
  double advantage = 0.0;
  double target = 0.0;
};

// Advantages from gae (bootstrap per episode), targets from
// td_lambda_targets, then advantages normalized to zero mean / unit variance.
std::vector<Sample> assemble_batch(const std::vector<Episode>& episodes,
                                   const TrainConfig& cfg);

double clipped_surrogate(double ratio, double advantage, double clip);

struct OptimizerState {
  AdamState fbc;
  AdamState log_std;
  AdamState value;
};

OptimizerState make_optimizer(const PolicyNet& policy, const Mlp& value_net);

struct PpoStats {
  double mean_ratio = 0.0;
  double first_step_max_ratio_error = 0.0;
  double clip_fraction = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  int skipped_minibatches = 0;
};

// Minibatched clipped-surrogate ascent for the policy and squared-error
// regression of the value network. Minibatches whose loss or gradients are
// not finite are skipped and counted.
PpoStats ppo_update(const std::vector<Sample>& batch, PolicyNet& policy,
                    Mlp& value_net, OptimizerState& opt,
                    const TrainConfig& cfg, Rng& rng);

}  // namespace stb

#endif  // STB_RLCORE_HPP_
