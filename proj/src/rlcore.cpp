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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "stb/error.hpp"

namespace stb {
namespace {

double kinetic_energy_world(const SystemSpec& spec, const SystemState& s) {
  std::vector<double> masses;
  std::vector<Vec3> vels;
  for (const auto& b : bodies(spec, s)) {
    masses.push_back(b.mass);
    vels.push_back({b.vel[0], b.vel[1], 0.0});
  }
  // Toy systems are anchored to the world, so the world frame is the frame
  // of the fixed root.
  return kinematic_energy(masses, vels, Vec3{0.0, 0.0, 0.0});
}

bool finite_all(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

}  // namespace

std::vector<double> featurize(const SystemState& state, Phase phase) {
  std::vector<double> f;
  f.reserve(1 + state.q.size() + state.qdot.size());
  f.push_back(phase.value());
  f.insert(f.end(), state.q.begin(), state.q.end());
  f.insert(f.end(), state.qdot.begin(), state.qdot.end());
  return f;
}

int feature_size(SystemKind kind) {
  return 1 + 2 * static_cast<int>(coordinate_names(kind).size());
}

ActionSample policy_action(const PolicyNet& policy,
                           std::span<const double> features, Phase phase,
                           bool explore, Rng& rng) {
  ActionSample out;
  out.ffc = ffc_action(*policy.reference, policy.action_channels, phase);
  const std::vector<double> correction = forward(policy.fbc, features);
  if (correction.size() != out.ffc.size()) {
    throw std::invalid_argument("fbc output does not match action channels");
  }
  out.mean.resize(out.ffc.size());
  for (std::size_t i = 0; i < out.mean.size(); ++i) {
    out.mean[i] = out.ffc[i] + correction[i];
  }
  out.action = out.mean;
  if (explore) {
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t i = 0; i < out.action.size(); ++i) {
      out.action[i] += std::exp(policy.head.log_std[i]) * noise(rng);
    }
  }
  out.log_prob = gaussian_log_prob(policy.head, out.mean, out.action);
  return out;
}

double survival_reward(const CheckResult& check) {
  return check.within ? 1.0 : 0.0;
}

double compose_reward(double survival, std::optional<double> style,
                      std::optional<double> imitation, double w_s) {
  double inner = 1.0;
  if (style && imitation) {
    inner = (1.0 - w_s) * *imitation + w_s * *style;
  } else if (style) {
    inner = *style;
  } else if (imitation) {
    inner = *imitation;
  }
  return survival * inner;
}

std::string_view to_string(TerminationCause cause) {
  switch (cause) {
    case TerminationCause::kNone:
      return "none";
    case TerminationCause::kBoundViolation:
      return "bound_violation";
    case TerminationCause::kHorizon:
      return "horizon";
    case TerminationCause::kEndState:
      return "end_state";
  }
  return "?";
}

double Episode::total_reward() const {
  double r = 0.0;
  for (const auto& t : steps) r += t.reward;
  return r;
}

int Episode::survived_steps() const {
  const int n = static_cast<int>(steps.size());
  return cause == TerminationCause::kBoundViolation ? std::max(n - 1, 0) : n;
}

Environment::Environment(ReferenceTrack track, SpacetimeBoundSet bounds,
                         RewardSpec reward)
    : track_(std::move(track)),
      bounds_(std::move(bounds)),
      reward_(std::move(reward)) {
  const double period = track_.motion().cycle_duration();
  window_ = std::max(
      1, static_cast<int>(std::lround(period / track_.spec().control_dt())));
  if (reward_.style) reward_.style_cfg.validate();
  if (reward_.regularize && reward_.style_cfg.reg_weights.size() != 2) {
    throw std::invalid_argument(
        "toy regularizer takes two terms: energy and linear acceleration");
  }
  // Standardization statistics over one reference cycle.
  const int dim = 2 * track_.spec().dof();
  feat_mean_.assign(dim, 0.0);
  feat_scale_.assign(dim, 1.0);
  std::vector<double> sq(dim, 0.0);
  for (int k = 0; k < window_; ++k) {
    const SystemState s = track_.state_at(period * k / window_);
    for (int d = 0; d < dim; ++d) {
      const double x = d < track_.spec().dof() ? s.q[d]
                                               : s.qdot[d - track_.spec().dof()];
      feat_mean_[d] += x / window_;
      sq[d] += x * x / window_;
    }
  }
  for (int d = 0; d < dim; ++d) {
    const double var = std::max(sq[d] - feat_mean_[d] * feat_mean_[d], 0.0);
    feat_scale_[d] = 1.0 / std::max(std::sqrt(var), 1e-6);
  }
  if (reward_.style && reward_.style_cfg.mode == StyleMode::kGram &&
      (reward_.gram_target.rows != dim || reward_.gram_target.cols != dim)) {
    throw std::invalid_argument("gram target must be " + std::to_string(dim) +
                                "x" + std::to_string(dim));
  }
}

double Environment::imitation_reward(const Event& e) const {
  const double local = track_.local_time(e.t);
  double sum = 0.0;
  int n = 0;
  for (const auto& bc : bounds_.channels) {
    const double sigma = bc.sigma.at(local);
    if (!std::isfinite(sigma)) continue;
    const double z = deviation(bc.channel, track_, e) / sigma;
    sum += z * z;
    ++n;
  }
  return n == 0 ? 1.0 : std::exp(-sum / n);
}

std::vector<double> Environment::style_features(const SystemState& s) const {
  const int dof = track_.spec().dof();
  std::vector<double> f(2 * dof);
  for (int d = 0; d < 2 * dof; ++d) {
    const double x = d < dof ? s.q[d] : s.qdot[d - dof];
    f[d] = (x - feat_mean_[d]) * feat_scale_[d];
  }
  return f;
}

Environment::StyleHistory::StyleHistory(const Environment& env)
    : env_(env),
      features_(env.window_,
                std::vector<double>(2 * env.track_.spec().dof(), 0.0)),
      points_() {}

double Environment::StyleHistory::observe(const SystemState& prev,
                                          const SystemState& next) {
  const RewardSpec& rw = env_.reward_;
  const SystemSpec& spec = env_.track_.spec();
  features_[head_] = env_.style_features(next);
  head_ = (head_ + 1) % env_.window_;
  count_ = std::min(count_ + 1, env_.window_);
  for (const auto& b : bodies(spec, next)) {
    points_.push_back(b.pos);
  }
  const std::size_t per_step = bodies(spec, next).size();
  const std::size_t keep = per_step * static_cast<std::size_t>(env_.window_);
  if (points_.size() > keep) {
    points_.erase(points_.begin(),
                  points_.begin() + static_cast<long>(points_.size() - keep));
  }

  const double energy = kinetic_energy_world(spec, next);
  double r_s = 1.0;
  switch (rw.style_cfg.mode) {
    case StyleMode::kEnergyDown:
    case StyleMode::kEnergyUp:
      r_s = energy_reward(energy, rw.style_cfg);
      break;
    case StyleMode::kVolumeDown:
    case StyleMode::kVolumeUp:
      r_s = volume_reward(convex_hull_area(points_), rw.style_cfg);
      break;
    case StyleMode::kGram: {
      Matrix window(env_.window_, static_cast<int>(features_[0].size()));
      for (int r = 0; r < env_.window_; ++r) {
        for (int c = 0; c < window.cols; ++c) window(r, c) = features_[r][c];
      }
      r_s = gram_style_reward(rw.gram_target, gram_matrix(window),
                              rw.style_cfg.alpha);
      break;
    }
  }
  if (!rw.regularize) return r_s;
  double accel = 0.0;
  const auto b0 = bodies(spec, prev);
  const auto b1 = bodies(spec, next);
  for (std::size_t i = 0; i < b1.size(); ++i) {
    accel += std::hypot(b1[i].vel[0] - b0[i].vel[0],
                        b1[i].vel[1] - b0[i].vel[1]) /
             spec.control_dt();
  }
  const double magnitudes[2] = {energy, accel};
  return style_total(r_s, regularization_reward(magnitudes, rw.style_cfg));
}

Episode rollout(const Environment& env, const PolicyNet& policy,
                const Mlp* value_net, const Event& init, int max_steps,
                bool explore, Rng& rng) {
  Episode ep;
  ep.start = init;
  const ReferenceTrack& track = env.track();
  const RewardSpec& rw = env.reward();
  const double horizon = track.horizon();
  constexpr double kTimeSlack = 1e-9;

  const CheckResult first = check_event(env.bounds(), track, init);
  if (!first.within && rw.terminate_on_bounds) {
    ep.cause = TerminationCause::kBoundViolation;
    ep.violated_channel = first.channel;
    return ep;
  }
  if (max_steps <= 0) return ep;

  Environment::StyleHistory history(env);
  SystemState state = init.state;
  state.t = init.t;
  for (int k = 0; k < max_steps; ++k) {
    Transition tr;
    const Phase phase = phase_of(track.motion(), state.t);
    tr.phase = phase.value();
    tr.features = featurize(state, phase);
    tr.value = value_net ? forward(*value_net, tr.features)[0] : 0.0;
    ActionSample a = policy_action(policy, tr.features, phase, explore, rng);
    tr.action = std::move(a.action);
    tr.ffc = std::move(a.ffc);
    tr.log_prob = a.log_prob;

    SystemState next;
    try {
      next = control_step(track.spec(), state, tr.action);
    } catch (const NumericalError& err) {
      ep.aborted = true;
      ep.diagnostic = err.what();
      return ep;
    }
    const bool at_end = next.t >= horizon - kTimeSlack;
    Event e{next, std::min(next.t, horizon)};
    const CheckResult check = check_event(env.bounds(), track, e);
    const bool violated = !check.within && rw.terminate_on_bounds;

    std::optional<double> style;
    std::optional<double> imitation;
    if (rw.style) style = history.observe(state, next);
    if (rw.imitation) imitation = env.imitation_reward(e);
    tr.reward = compose_reward(violated ? survival_reward(check) : 1.0, style,
                               imitation, rw.w_s);
    tr.energy = kinetic_energy_world(track.spec(), next);
    tr.next_state = next;

    if (violated) {
      tr.done = true;
      tr.cause = TerminationCause::kBoundViolation;
      tr.violated_channel = check.channel;
    } else if (at_end) {
      tr.done = true;
      tr.cause = TerminationCause::kEndState;
    } else if (k + 1 == max_steps) {
      tr.done = true;
      tr.cause = TerminationCause::kHorizon;
    }
    ep.steps.push_back(std::move(tr));
    state = std::move(next);
    if (ep.steps.back().done) {
      ep.cause = ep.steps.back().cause;
      ep.violated_channel = ep.steps.back().violated_channel;
      if (ep.cause == TerminationCause::kHorizon && value_net) {
        const Phase p = phase_of(track.motion(), state.t);
        ep.bootstrap_value = forward(*value_net, featurize(state, p))[0];
      }
      break;
    }
  }
  return ep;
}

std::vector<double> gae(std::span<const double> rewards,
                        std::span<const double> values, double bootstrap,
                        double gamma, double lambda) {
  if (rewards.size() != values.size()) {
    throw std::invalid_argument("gae: rewards and values differ in length");
  }
  const std::size_t n = rewards.size();
  std::vector<double> adv(n);
  double running = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double next_v = i + 1 < n ? values[i + 1] : bootstrap;
    const double delta = rewards[i] + gamma * next_v - values[i];
    running = delta + gamma * lambda * running;
    adv[i] = running;
  }
  return adv;
}

std::vector<double> td_lambda_targets(std::span<const double> rewards,
                                      std::span<const double> values,
                                      double bootstrap, double gamma,
                                      double lambda) {
  std::vector<double> out = gae(rewards, values, bootstrap, gamma, lambda);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += values[i];
  return out;
}

void TrainConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("gamma must lie in (0, 1]");
  }
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("lambda must lie in (0, 1]");
  }
  if (!(clip > 0.0)) throw std::invalid_argument("clip must be > 0");
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) {
    throw std::invalid_argument("learning rates must be > 0");
  }
  if (samples_per_epoch <= 0 || minibatch <= 0 || max_steps < 0 ||
      update_epochs <= 0) {
    throw std::invalid_argument("batch sizes must be positive");
  }
}

std::vector<Sample> assemble_batch(const std::vector<Episode>& episodes,
                                   const TrainConfig& cfg) {
  std::vector<Sample> batch;
  for (const auto& ep : episodes) {
    if (ep.aborted || ep.steps.empty()) continue;
    std::vector<double> rewards;
    std::vector<double> values;
    for (const auto& t : ep.steps) {
      rewards.push_back(t.reward);
      values.push_back(t.value);
    }
    const std::vector<double> adv =
        gae(rewards, values, ep.bootstrap_value, cfg.gamma, cfg.lambda);
    for (std::size_t i = 0; i < ep.steps.size(); ++i) {
      const Transition& t = ep.steps[i];
      batch.push_back(
          {t.features, t.ffc, t.action, t.log_prob, adv[i], values[i] + adv[i]});
    }
  }
  if (batch.empty()) return batch;
  double mean = 0.0;
  for (const auto& s : batch) mean += s.advantage;
  mean /= static_cast<double>(batch.size());
  double var = 0.0;
  for (const auto& s : batch) var += (s.advantage - mean) * (s.advantage - mean);
  var /= static_cast<double>(batch.size());
  const double inv = 1.0 / (std::sqrt(var) + 1e-8);
  for (auto& s : batch) s.advantage = (s.advantage - mean) * inv;
  return batch;
}

double clipped_surrogate(double ratio, double advantage, double clip) {
  const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
  return std::min(ratio * advantage, clipped * advantage);
}

OptimizerState make_optimizer(const PolicyNet& policy, const Mlp& value_net) {
  return {AdamState(policy.fbc.params().size()),
          AdamState(policy.head.log_std.size()),
          AdamState(value_net.params().size())};
}

PpoStats ppo_update(const std::vector<Sample>& batch, PolicyNet& policy,
                    Mlp& value_net, OptimizerState& opt,
                    const TrainConfig& cfg, Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("ppo_update: empty batch");
  PpoStats stats;
  std::vector<std::size_t> order(batch.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  const std::size_t adim = policy.head.log_std.size();
  std::vector<double> g_fbc(policy.fbc.params().size());
  std::vector<double> g_std(adim);
  std::vector<double> g_val(value_net.params().size());
  std::vector<double> upstream(adim);
  MlpTape tape;

  double ratio_sum = 0.0;
  double clipped = 0.0;
  double ploss_sum = 0.0;
  double vloss_sum = 0.0;
  std::size_t seen = 0;
  bool first_minibatch = true;

  for (int epoch = 0; epoch < cfg.update_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.minibatch)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.minibatch));
      const double inv_n = 1.0 / static_cast<double>(end - start);
      std::fill(g_fbc.begin(), g_fbc.end(), 0.0);
      std::fill(g_std.begin(), g_std.end(), 0.0);
      std::fill(g_val.begin(), g_val.end(), 0.0);
      double ploss = 0.0;
      double vloss = 0.0;
      double mb_ratio = 0.0;
      double mb_clipped = 0.0;

      for (std::size_t s = start; s < end; ++s) {
        const Sample& smp = batch[order[s]];
        const std::vector<double> corr =
            forward(policy.fbc, smp.features, &tape);
        std::vector<double> mean(adim);
        for (std::size_t i = 0; i < adim; ++i) mean[i] = smp.ffc[i] + corr[i];
        const double logp = gaussian_log_prob(policy.head, mean, smp.action);
        const double ratio = std::exp(logp - smp.old_log_prob);
        const double a = smp.advantage;
        const double surrogate = clipped_surrogate(ratio, a, cfg.clip);
        if (first_minibatch) {
          stats.first_step_max_ratio_error =
              std::max(stats.first_step_max_ratio_error, std::abs(ratio - 1.0));
        }
        ploss -= surrogate * inv_n;
        mb_ratio += ratio;
        const bool active = ratio * a <= std::clamp(ratio, 1.0 - cfg.clip,
                                                    1.0 + cfg.clip) * a;
        if (!active) mb_clipped += 1.0;
        if (active && a != 0.0) {
          // d(-ratio * A)/d(logp) = -ratio * A.
          const double dlogp = -ratio * a * inv_n;
          for (std::size_t i = 0; i < adim; ++i) {
            const double inv_var = std::exp(-2.0 * policy.head.log_std[i]);
            const double diff = smp.action[i] - mean[i];
            upstream[i] = dlogp * diff * inv_var;
            g_std[i] += dlogp * (diff * diff * inv_var - 1.0);
          }
          accumulate_gradients(policy.fbc, tape, upstream, g_fbc);
        }

        const double v = forward(value_net, smp.features, &tape)[0];
        const double err = v - smp.target;
        vloss += 0.5 * err * err * inv_n;
        const double vup[1] = {err * inv_n};
        accumulate_gradients(value_net, tape, vup, g_val);
      }
      first_minibatch = false;

      if (!std::isfinite(ploss) || !std::isfinite(vloss) ||
          !finite_all(g_fbc) || !finite_all(g_std) || !finite_all(g_val)) {
        ++stats.skipped_minibatches;
        continue;
      }
      adam_update(policy.fbc.params(), g_fbc, opt.fbc, cfg.actor_lr);
      adam_update(policy.head.log_std, g_std, opt.log_std, cfg.actor_lr);
      adam_update(value_net.params(), g_val, opt.value, cfg.critic_lr);

      ratio_sum += mb_ratio;
      clipped += mb_clipped;
      ploss_sum += ploss * static_cast<double>(end - start);
      vloss_sum += vloss * static_cast<double>(end - start);
      seen += end - start;
    }
  }
  if (seen > 0) {
    const double n = static_cast<double>(seen);
    stats.mean_ratio = ratio_sum / n;
    stats.clip_fraction = clipped / n;
    stats.policy_loss = ploss_sum / n;
    stats.value_loss = vloss_sum / n;
  }
  return stats;
}

}  // namespace stb
