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

#include "stb/training.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "stb/error.hpp"

namespace stb {
namespace {

// Stream tags; each (seed, a, b) triple is an independent generator.
constexpr std::uint64_t kInitTag = 0;
constexpr std::uint64_t kUpdateTag = 1ull << 40;
constexpr std::uint64_t kEvolveTag = 2ull << 40;
constexpr std::uint64_t kEvalTag = 3ull << 40;

// Runs fn(i) for i in [begin, end) on up to `workers` threads. Each index
// writes only its own output slot, so results do not depend on scheduling.
template <typename F>
void parallel_for(int begin, int end, int workers, F&& fn) {
  const int n = end - begin;
  if (n <= 0) return;
  workers = std::clamp(workers, 1, n);
  if (workers == 1) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }
  std::atomic<int> next{begin};
  std::exception_ptr error;
  std::mutex error_mu;
  auto body = [&] {
    for (int i = next++; i < end; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<double> sizes_of(const Mlp& net) {
  return {net.layer_sizes().begin(), net.layer_sizes().end()};
}

}  // namespace

std::shared_ptr<const ReferenceMotion> load_reference(const RunConfig& cfg) {
  if (cfg.reference.empty()) {
    throw ConfigError("reference.path", "a reference motion is required");
  }
  try {
    return std::make_shared<const ReferenceMotion>(
        load_reference_csv(cfg.reference, cfg.cyclic, cfg.cycle));
  } catch (const std::exception& e) {
    throw ConfigError("reference.path", e.what());
  }
}

Environment make_environment(const RunConfig& cfg,
                             std::shared_ptr<const ReferenceMotion> reference,
                             bool for_eval) {
  RewardSpec rw;
  rw.terminate_on_bounds = for_eval || cfg.train.terminate_on_bounds;
  rw.style = cfg.reward.style;
  rw.imitation = cfg.reward.imitation;
  rw.regularize = cfg.reward.regularize;
  rw.w_s = cfg.reward.w_s;
  rw.style_cfg = cfg.reward.style_cfg;
  if (!cfg.reward.gram_target.empty()) {
    try {
      rw.gram_target = load_matrix_csv(cfg.reward.gram_target);
    } catch (const std::exception& e) {
      throw ConfigError("style.gram_target", e.what());
    }
  }
  try {
    return Environment(ReferenceTrack(cfg.system, *reference),
                       resolved_bounds(cfg), std::move(rw));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("reference.path", e.what());
  }
}

PolicyNet make_policy(const RunConfig& cfg,
                      std::shared_ptr<const ReferenceMotion> reference,
                      Rng& rng) {
  std::vector<std::string> names = cfg.action_channels;
  if (names.empty()) names = coordinate_names(cfg.system.kind);
  PolicyNet p;
  try {
    p.action_channels = resolve_channels(*reference, names);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("reference.action_channels", e.what());
  }
  p.reference = std::move(reference);
  std::vector<int> sizes{feature_size(cfg.system.kind)};
  sizes.insert(sizes.end(), cfg.train.hidden.begin(), cfg.train.hidden.end());
  sizes.push_back(p.action_dim());
  p.fbc = Mlp::initialized(sizes, rng);
  p.head.log_std.assign(p.action_dim(), std::log(cfg.train.init_std));
  return p;
}

Mlp make_value_net(const RunConfig& cfg, Rng& rng) {
  std::vector<int> sizes{feature_size(cfg.system.kind)};
  sizes.insert(sizes.end(), cfg.train.hidden.begin(), cfg.train.hidden.end());
  sizes.push_back(1);
  return Mlp::initialized(sizes, rng, 1.0);
}

std::string epoch_log_header() {
  return "epoch,samples,episodes,mean_length,mean_return,clip_fraction,"
         "mean_ratio,policy_loss,value_loss,completion,wall_time";
}

std::string format_epoch(const EpochRecord& r) {
  return std::to_string(r.epoch) + "," + std::to_string(r.samples) + "," +
         std::to_string(r.episodes) + "," + fmt(r.mean_length) + "," +
         fmt(r.mean_return) + "," + fmt(r.clip_fraction) + "," +
         fmt(r.mean_ratio) + "," + fmt(r.policy_loss) + "," +
         fmt(r.value_loss) + "," +
         (r.completion < 0.0 ? std::string() : fmt(r.completion)) + "," +
         fmt(r.wall_time);
}

EvalReport evaluate(const Environment& env, const PolicyNet& policy,
                    int episodes, int max_steps, std::uint64_t seed,
                    std::uint64_t salt, int workers,
                    std::vector<EvalEpisode>* trajectories) {
  std::vector<EvalEpisode> runs(std::max(episodes, 0));
  parallel_for(0, episodes, workers, [&](int i) {
    Rng rng = make_stream(seed, kEvalTag + salt, static_cast<std::uint64_t>(i));
    const Event start = rsi_sample(env.track(), rng);
    EvalEpisode& r = runs[i];
    r.episode = rollout(env, policy, nullptr, start, max_steps, false, rng);
    r.completed = !r.episode.aborted &&
                  r.episode.cause != TerminationCause::kBoundViolation;
  });

  EvalReport rep;
  rep.episodes = episodes;
  std::map<std::string, int> violations;
  std::vector<double> max_dev(env.bounds().channels.size(), 0.0);
  double energy = 0.0;
  std::int64_t energy_n = 0;
  int completed = 0;
  double length = 0.0;
  for (const auto& r : runs) {
    length += r.episode.survived_steps();
    for (const auto& t : r.episode.steps) {
      energy += t.energy;
      ++energy_n;
    }
    if (!r.completed) {
      violations[r.episode.aborted ? "numerical" : r.episode.violated_channel]++;
      continue;
    }
    ++completed;
    for (std::size_t c = 0; c < max_dev.size(); ++c) {
      const ChannelSpec& ch = env.bounds().channels[c].channel;
      max_dev[c] = std::max(
          max_dev[c], std::abs(deviation(ch, env.track(), r.episode.start)));
      for (const auto& t : r.episode.steps) {
        const Event e{t.next_state, std::min(t.next_state.t,
                                             env.track().horizon())};
        max_dev[c] =
            std::max(max_dev[c], std::abs(deviation(ch, env.track(), e)));
      }
    }
  }
  if (episodes > 0) {
    rep.completion = static_cast<double>(completed) / episodes;
    rep.mean_length = length / episodes;
  }
  rep.mean_energy = energy_n > 0 ? energy / static_cast<double>(energy_n) : 0.0;
  for (std::size_t c = 0; c < max_dev.size(); ++c) {
    rep.max_deviation.push_back(
        {env.bounds().channels[c].channel.name, max_dev[c]});
  }
  rep.violations.assign(violations.begin(), violations.end());
  if (trajectories) *trajectories = std::move(runs);
  return rep;
}

Trainer::Trainer(RunConfig cfg)
    : cfg_(std::move(cfg)),
      reference_(load_reference(cfg_)),
      env_(make_environment(cfg_, reference_, false)),
      eval_env_(make_environment(cfg_, reference_, true)),
      workers_(effective_workers(cfg_)),
      start_(std::chrono::steady_clock::now()) {
  Rng init = make_stream(cfg_.seed);
  policy_ = make_policy(cfg_, reference_, init);
  value_ = make_value_net(cfg_, init);
  opt_ = make_optimizer(policy_, value_);
  seg_w_.assign(cfg_.init.segments, 0.0);
  seg_p_ = segment_distribution();
  if (cfg_.init.mode == InitMode::kEvolve) {
    buffer_ = init_buffer(env_.track(), cfg_.init.segments, cfg_.init.buffer,
                          init);
  }
}

std::vector<double> Trainer::segment_distribution() const {
  return segment_probabilities({seg_w_, cfg_.init.u});
}

bool Trainer::finished() const {
  return samples_ >= cfg_.train.total_samples;
}

Event Trainer::start_event(int index, Rng& rng) const {
  (void)index;
  const int n = cfg_.init.segments;
  switch (cfg_.init.mode) {
    case InitMode::kRsi:
      return rsi_sample(env_.track(), rng);
    case InitMode::kImportance:
      return segment_sample(env_.track(), sample_segment(seg_p_, rng), n, rng);
    case InitMode::kEvolve: {
      std::uniform_int_distribution<int> seg(0, n - 1);
      const auto& entries = buffer_.segments[seg(rng)];
      std::uniform_int_distribution<std::size_t> pick(0, entries.size() - 1);
      return entries[pick(rng)].event;
    }
  }
  return rsi_sample(env_.track(), rng);
}

void Trainer::update_init_state(const std::vector<Episode>& episodes) {
  const int n = cfg_.init.segments;
  if (cfg_.init.mode == InitMode::kImportance) {
    std::vector<double> sum(n, 0.0);
    std::vector<int> count(n, 0);
    for (const auto& ep : episodes) {
      if (ep.aborted) continue;
      const int k = segment_of(env_.track(), ep.start.t, n);
      sum[k] += ep.steps.empty() ? 0.0 : ep.steps.front().value;
      ++count[k];
    }
    for (int k = 0; k < n; ++k) {
      if (count[k] == 0) continue;
      const double mean = sum[k] / count[k];
      seg_w_[k] = epoch_ == 1 ? mean
                              : cfg_.init.avg * seg_w_[k] +
                                    (1.0 - cfg_.init.avg) * mean;
    }
    seg_p_ = segment_distribution();
  } else if (cfg_.init.mode == InitMode::kEvolve) {
    auto value_at = [&](const Event& e) {
      const Phase p = phase_of(env_.track().motion(), e.t);
      return forward(value_, featurize(e.state, p))[0];
    };
    for (auto& seg : buffer_.segments) {
      for (auto& entry : seg) entry.w = value_at(entry.event);
    }
    std::vector<std::vector<EliteEntry>> candidates(n);
    for (const auto& ep : episodes) {
      if (ep.aborted || ep.steps.empty()) continue;
      // Every visited state that was still inside the bounds.
      const std::size_t usable =
          ep.cause == TerminationCause::kBoundViolation ? ep.steps.size() - 1
                                                        : ep.steps.size();
      for (std::size_t j = 0; j < usable; ++j) {
        Event e = j == 0 ? ep.start
                         : make_event(ep.steps[j - 1].next_state);
        const int k = segment_of(env_.track(), e.t, n);
        candidates[k].push_back({std::move(e), ep.steps[j].value});
      }
    }
    Rng rng = make_stream(cfg_.seed, kEvolveTag + epoch_, 0);
    const ReferenceTrack& track = env_.track();
    buffer_ = evolve_buffer(
        buffer_, candidates, rng,
        [&track, n](int k, Rng& r) { return segment_sample(track, k, n, r); },
        cfg_.init.elite_sign);
  }
}

EpochRecord Trainer::run_epoch() {
  ++epoch_;
  const TrainConfig& tc = cfg_.train.ppo;
  const int wave = std::max(workers_, 4);
  std::vector<Episode> episodes;
  std::int64_t collected = 0;
  for (int base = 0; collected < tc.samples_per_epoch; base += wave) {
    std::vector<Episode> batch(wave);
    parallel_for(0, wave, workers_, [&](int i) {
      const auto index = static_cast<std::uint64_t>(base + i);
      Rng rng = make_stream(cfg_.seed, static_cast<std::uint64_t>(epoch_),
                            index);
      const Event start = start_event(base + i, rng);
      batch[i] = rollout(env_, policy_, &value_, start, tc.max_steps, true,
                         rng);
    });
    // Keep the in-order prefix that first reaches the sample target.
    for (auto& ep : batch) {
      if (collected >= tc.samples_per_epoch) break;
      collected += static_cast<std::int64_t>(ep.steps.size());
      episodes.push_back(std::move(ep));
    }
    if (base > 64 * tc.samples_per_epoch) {
      throw NumericalError("no samples collected; every episode is empty");
    }
  }
  samples_ += collected;

  EpochRecord rec;
  rec.epoch = epoch_;
  rec.samples = samples_;
  rec.episodes = static_cast<int>(episodes.size());
  for (const auto& ep : episodes) {
    rec.mean_length += ep.survived_steps();
    rec.mean_return += ep.total_reward();
  }
  rec.mean_length /= rec.episodes;
  rec.mean_return /= rec.episodes;

  const std::vector<Sample> batch = assemble_batch(episodes, tc);
  if (!batch.empty()) {
    Rng rng = make_stream(cfg_.seed, kUpdateTag + epoch_, 0);
    const PpoStats st = ppo_update(batch, policy_, value_, opt_, tc, rng);
    rec.clip_fraction = st.clip_fraction;
    rec.mean_ratio = st.mean_ratio;
    rec.policy_loss = st.policy_loss;
    rec.value_loss = st.value_loss;
  }
  if (!all_finite(policy_.fbc.params()) || !all_finite(policy_.head.log_std) ||
      !all_finite(value_.params())) {
    throw NumericalError("network parameters are no longer finite after epoch " +
                         std::to_string(epoch_));
  }
  update_init_state(episodes);
  last_ = std::move(episodes);

  if (cfg_.train.eval_every > 0 && epoch_ % cfg_.train.eval_every == 0) {
    rec.completion = evaluate_now(cfg_.train.eval_episodes).completion;
  }
  rec.wall_time = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start_)
                      .count();
  return rec;
}

EvalReport Trainer::evaluate_now(int episodes) const {
  return evaluate(eval_env_, policy_, episodes, cfg_.train.ppo.max_steps,
                  cfg_.seed, static_cast<std::uint64_t>(epoch_), workers_);
}

Checkpoint Trainer::checkpoint() const {
  return make_checkpoint(policy_, value_);
}

void Trainer::restore(const Checkpoint& ckpt) {
  load_checkpoint(ckpt, policy_, &value_);
}

Checkpoint make_checkpoint(const PolicyNet& policy, const Mlp& value_net) {
  Checkpoint c;
  c.tensors["fbc"] = policy.fbc.params();
  c.tensors["fbc_sizes"] = sizes_of(policy.fbc);
  c.tensors["log_std"] = policy.head.log_std;
  c.tensors["value"] = value_net.params();
  c.tensors["value_sizes"] = sizes_of(value_net);
  return c;
}

void load_checkpoint(const Checkpoint& ckpt, PolicyNet& policy,
                     Mlp* value_net) {
  try {
    if (ckpt.at("fbc_sizes") != sizes_of(policy.fbc) ||
        ckpt.at("fbc").size() != policy.fbc.params().size() ||
        ckpt.at("log_std").size() != policy.head.log_std.size()) {
      throw ConfigError("checkpoint", "policy shape does not match config");
    }
    if (value_net && (ckpt.at("value_sizes") != sizes_of(*value_net) ||
                      ckpt.at("value").size() != value_net->params().size())) {
      throw ConfigError("checkpoint", "value shape does not match config");
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("checkpoint", e.what());
  }
  policy.fbc.params() = ckpt.at("fbc");
  policy.head.log_std = ckpt.at("log_std");
  if (value_net) value_net->params() = ckpt.at("value");
}

}  // namespace stb
