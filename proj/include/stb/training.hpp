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

#ifndef STB_TRAINING_HPP_
#define STB_TRAINING_HPP_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "stb/config.hpp"
#include "stb/initstate.hpp"
#include "stb/rlcore.hpp"

namespace stb {

std::shared_ptr<const ReferenceMotion> load_reference(const RunConfig& cfg);

// Training environment; `for_eval` always terminates on the declared bounds.
Environment make_environment(const RunConfig& cfg,
                             std::shared_ptr<const ReferenceMotion> reference,
                             bool for_eval);

PolicyNet make_policy(const RunConfig& cfg,
                      std::shared_ptr<const ReferenceMotion> reference,
                      Rng& rng);
Mlp make_value_net(const RunConfig& cfg, Rng& rng);

struct EpochRecord {
  int epoch = 0;
  std::int64_t samples = 0;  // cumulative
  int episodes = 0;
  double mean_length = 0.0;
  double mean_return = 0.0;
  double clip_fraction = 0.0;
  double mean_ratio = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double completion = -1.0;  // < 0 when not evaluated this epoch
  double wall_time = 0.0;    // s since training start
};

std::string epoch_log_header();
std::string format_epoch(const EpochRecord& r);

struct ChannelDeviation {
  std::string channel;
  double max_abs = 0.0;
};

struct EvalEpisode {
  Episode episode;
  bool completed = false;
};

struct EvalReport {
  int episodes = 0;
  double completion = 0.0;
  double mean_length = 0.0;
  double mean_energy = 0.0;
  // Over completed episodes only.
  std::vector<ChannelDeviation> max_deviation;
  std::vector<std::pair<std::string, int>> violations;  // channel, count
};

// Explore-off episodes from reference-sampled start times; stream `salt`
// keeps evaluation draws apart from training draws.
EvalReport evaluate(const Environment& env, const PolicyNet& policy,
                    int episodes, int max_steps, std::uint64_t seed,
                    std::uint64_t salt, int workers,
                    std::vector<EvalEpisode>* trajectories = nullptr);

class Trainer {
 public:
  explicit Trainer(RunConfig cfg);

  const RunConfig& config() const { return cfg_; }
  const PolicyNet& policy() const { return policy_; }
  PolicyNet& policy() { return policy_; }
  const Mlp& value_net() const { return value_; }
  const Environment& env() const { return env_; }
  const Environment& eval_env() const { return eval_env_; }
  const EliteBuffer& buffer() const { return buffer_; }
  const std::vector<double>& segment_returns() const { return seg_w_; }
  std::vector<double> segment_distribution() const;
  std::int64_t samples() const { return samples_; }
  int epoch() const { return epoch_; }
  bool finished() const;
  // Episodes collected by the most recent epoch.
  const std::vector<Episode>& last_episodes() const { return last_; }

  // Collects one batch and applies the update; throws NumericalError when
  // parameters stop being finite.
  EpochRecord run_epoch();
  EvalReport evaluate_now(int episodes) const;

  Checkpoint checkpoint() const;
  void restore(const Checkpoint& ckpt);

 private:
  Event start_event(int index, Rng& rng) const;
  void update_init_state(const std::vector<Episode>& episodes);

  RunConfig cfg_;
  std::shared_ptr<const ReferenceMotion> reference_;
  Environment env_;
  Environment eval_env_;
  PolicyNet policy_;
  Mlp value_;
  OptimizerState opt_;
  EliteBuffer buffer_;
  std::vector<double> seg_w_;
  std::vector<double> seg_p_;
  std::vector<Episode> last_;
  std::int64_t samples_ = 0;
  int epoch_ = 0;
  int workers_ = 1;
  std::chrono::steady_clock::time_point start_;
};

// Checkpoint tensors: fbc, fbc_sizes, log_std, value, value_sizes.
Checkpoint make_checkpoint(const PolicyNet& policy, const Mlp& value_net);
// Throws ConfigError when shapes disagree with the configured networks.
void load_checkpoint(const Checkpoint& ckpt, PolicyNet& policy,
                     Mlp* value_net);

}  // namespace stb

#endif  // STB_TRAINING_HPP_
