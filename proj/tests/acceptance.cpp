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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>
#include <unistd.h>

#include "stb/bounds.hpp"
#include "stb/config.hpp"
#include "stb/feasible.hpp"
#include "stb/initstate.hpp"
#include "stb/nn.hpp"
#include "stb/reference.hpp"
#include "stb/rlcore.hpp"
#include "stb/style.hpp"
#include "stb/training.hpp"

namespace fs = std::filesystem;
using namespace stb;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 fmt::format("stbound_acceptance_{}", ::getpid());
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

RunConfig load(const std::string& name, std::uint64_t seed) {
  RunConfig cfg = parse_config(fs::path(STB_CONFIG_DIR) / name);
  cfg.seed = seed;
  cfg.workers = 1;
  cfg.out = scratch() / fmt::format("{}_{}", name, seed);
  return cfg;
}

// ---------------------------------------------------------------------------
// 1, 2: reachability

Outcome shrinkage() {
  const ToyProblem toy;
  const std::vector<std::vector<ToyBound>> sets{{}, {toy.b1}, {toy.b1, toy.b2}};
  bool ok = true;
  std::string detail;
  double default_secs = 0.0;
  for (int factor : {1, 2}) {
    const GridSpec g = GridSpec{}.refined(factor);
    const auto t0 = Clock::now();
    std::vector<double> vol;
    ReachGrid last(g);
    for (const auto& extra : sets) {
      last = toy_feasible_region(g, toy, extra);
      vol.push_back(region_volume(last));
    }
    if (factor == 1) default_secs = seconds_since(t0);
    ok = ok && vol[0] > vol[1] && vol[1] > vol[2];
    detail += fmt::format("x{} volumes {:.5f} > {:.5f} > {:.5f}; ", factor,
                          vol[0], vol[1], vol[2]);
    for (const ToyBound& b : {toy.b1, toy.b2}) {
      const BoxOccupancy occ = box_occupancy(last, b);
      ok = ok && occ.marked < occ.box_cells;
      detail += fmt::format("box {}/{} ", occ.marked, occ.box_cells);
    }
    detail += "; ";
  }
  ok = ok && default_secs < 10.0;
  detail += fmt::format("default grid {:.2f} s", default_secs);
  return {ok, detail};
}

Outcome bang_bang_extremal() {
  // Independent oracle: integrate the +a, -a, +a trajectory finely and take
  // the largest |x| it visits.
  const ToyProblem toy;
  const double T = 5.0;
  const int n = 2000000;
  const double h = T / n;
  double x = 0.0;
  double v = 0.0;
  double oracle = 0.0;
  for (int k = 0; k < n; ++k) {
    const double t = (k + 0.5) * h;
    const double a = (t < T / 4 || t > 3 * T / 4) ? toy.a_max : -toy.a_max;
    x += v * h + 0.5 * a * h * h;
    v += a * h;
    oracle = std::max(oracle, std::abs(x));
  }
  const GridSpec g;
  const ReachGrid r = toy_feasible_region(g, toy, {});
  double widest = 0.0;
  for (int k = 0; k <= g.nt; ++k) {
    for (int i = 0; i < g.nx; ++i) {
      for (int j = 0; j < g.nv; ++j) {
        if (r.at(k, i, j)) widest = std::max(widest, std::abs(g.x_center(i)));
      }
    }
  }
  const bool ok = std::abs(oracle - 3.125) < 1e-6 &&
                  std::abs(widest - oracle) <= g.dx();
  return {ok, fmt::format("region max |x| {:.4f}, trajectory {:.6f}, cell {:.3f}",
                          widest, oracle, g.dx())};
}

// ---------------------------------------------------------------------------
// 3, 4, 9: learning to complete

struct LearnRun {
  std::int64_t samples_to_target = -1;  // -1: target never reached
  double best_completion = 0.0;
  double secs = 0.0;
};

LearnRun learn(const RunConfig& cfg,
               const std::function<void(const Trainer&)>& on_epoch = {}) {
  const auto t0 = Clock::now();
  Trainer trainer(cfg);
  LearnRun run;
  while (!trainer.finished()) {
    const EpochRecord rec = trainer.run_epoch();
    if (on_epoch) on_epoch(trainer);
    run.best_completion = std::max(run.best_completion, rec.completion);
    if (rec.completion >= cfg.train.stop_completion) {
      run.samples_to_target = rec.samples;
      break;
    }
  }
  run.secs = seconds_since(t0);
  return run;
}

std::string samples_str(std::int64_t s) {
  return s < 0 ? std::string("never") : std::to_string(s);
}

// Exhaustive replay of the termination contract on one episode.
bool contract_holds(const Environment& env, const Episode& ep,
                    std::string* why) {
  if (ep.aborted) return true;
  if (ep.total_reward() != static_cast<double>(ep.survived_steps())) {
    *why = fmt::format("return {} vs length {}", ep.total_reward(),
                       ep.survived_steps());
    return false;
  }
  const ReferenceTrack& track = env.track();
  auto within = [&](const SystemState& s) {
    return check_event(env.bounds(), track,
                       Event{s, std::min(s.t, track.horizon())})
        .within;
  };
  const std::size_t n = ep.steps.size();
  for (std::size_t i = 0; i < n; ++i) {
    const bool in = within(ep.steps[i].next_state);
    const bool last = i + 1 == n;
    if (ep.cause == TerminationCause::kBoundViolation && last) {
      if (in) {
        *why = "violation reported on a within step";
        return false;
      }
    } else if (!in) {
      *why = fmt::format("step {} of {} violated without terminating", i, n);
      return false;
    }
  }
  return true;
}

std::vector<LearnRun> g_learn_runs;
Outcome g_contract;

Outcome learning() {
  int passed = 0;
  std::string detail;
  std::size_t episodes = 0;
  std::size_t violations = 0;
  g_contract = {true, ""};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const RunConfig cfg = load("learn.cfg", seed);
    auto check = [&](const Trainer& t) {
      for (const Episode& ep : t.last_episodes()) {
        ++episodes;
        violations += ep.cause == TerminationCause::kBoundViolation;
        std::string why;
        if (g_contract.pass && !contract_holds(t.env(), ep, &why)) {
          g_contract = {false, why};
        }
      }
    };
    const LearnRun run = learn(cfg, check);
    g_learn_runs.push_back(run);
    const bool ok = run.samples_to_target > 0 &&
                    run.samples_to_target <= cfg.train.total_samples &&
                    run.secs < 300.0;
    passed += ok;
    detail += fmt::format("seed {}: {} samples ({:.0f} s); ", seed,
                          samples_str(run.samples_to_target), run.secs);
  }
  if (g_contract.pass) {
    g_contract.detail = fmt::format(
        "{} episodes checked, {} bound violations, all terminal at the first "
        "violating step",
        episodes, violations);
  }
  detail += fmt::format("{}/5 seeds reach 90%", passed);
  return {passed >= 4, detail};
}

Outcome termination_contract() { return g_contract; }

Outcome importance_benefit() {
  int wins = 0;
  std::string detail;
  const auto cost = [](const LearnRun& r) {
    return r.samples_to_target < 0 ? std::numeric_limits<std::int64_t>::max()
                                   : r.samples_to_target;
  };
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RunConfig imp = load("hard_segment.cfg", seed);
    imp.init.mode = InitMode::kImportance;
    RunConfig rsi = imp;
    rsi.init.mode = InitMode::kRsi;
    const LearnRun a = learn(imp);
    const LearnRun b = learn(rsi);
    const bool win = a.samples_to_target > 0 && cost(a) < cost(b);
    wins += win;
    detail += fmt::format("seed {}: importance {} vs uniform {}; ", seed,
                          samples_str(a.samples_to_target),
                          samples_str(b.samples_to_target));
  }
  detail += fmt::format("importance faster on {}/5", wins);
  return {wins >= 4, detail};
}

// ---------------------------------------------------------------------------
// 5, 6: numerics

Outcome gradient_check() {
  Rng rng = make_stream(2024);
  std::uniform_int_distribution<int> width(1, 8);
  std::uniform_int_distribution<int> depth(1, 3);
  std::normal_distribution<double> n01(0.0, 1.0);
  double worst = 0.0;
  std::size_t checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> sizes{width(rng)};
    for (int l = depth(rng); l > 0; --l) sizes.push_back(width(rng));
    sizes.push_back(width(rng));
    Mlp net(sizes);
    for (auto& p : net.params()) p = n01(rng);
    std::vector<double> x(sizes.front());
    for (auto& v : x) v = n01(rng);
    std::vector<double> up(sizes.back());
    for (auto& v : up) v = n01(rng);
    const std::vector<double> g = gradients(net, x, up);
    auto objective = [&](const Mlp& m) {
      const auto y = forward(m, x);
      return std::inner_product(y.begin(), y.end(), up.begin(), 0.0);
    };
    const double h = 1e-6;
    for (std::size_t i = 0; i < net.params().size(); ++i) {
      Mlp plus = net;
      Mlp minus = net;
      plus.params()[i] += h;
      minus.params()[i] -= h;
      const double fd = (objective(plus) - objective(minus)) / (2 * h);
      const double scale = std::max({std::abs(fd), std::abs(g[i]), 1e-6});
      worst = std::max(worst, std::abs(fd - g[i]) / scale);
      ++checked;
    }
  }
  return {worst <= 1e-4,
          fmt::format("{} parameters, worst relative error {:.2e}", checked,
                      worst)};
}

// Forward-view sums in extended precision.
std::vector<long double> forward_view_advantages(const std::vector<double>& r,
                                                 const std::vector<double>& v,
                                                 double boot, double gamma,
                                                 double lambda) {
  const std::size_t n = r.size();
  std::vector<long double> delta(n);
  for (std::size_t t = 0; t < n; ++t) {
    const long double next = t + 1 < n ? v[t + 1] : boot;
    delta[t] = r[t] + static_cast<long double>(gamma) * next - v[t];
  }
  std::vector<long double> adv(n, 0.0L);
  for (std::size_t t = 0; t < n; ++t) {
    long double w = 1.0L;
    for (std::size_t l = t; l < n; ++l) {
      adv[t] += w * delta[l];
      w *= static_cast<long double>(gamma) * lambda;
    }
  }
  return adv;
}

// Lambda-return as a weighted mix of n-step returns.
std::vector<long double> lambda_returns(const std::vector<double>& r,
                                        const std::vector<double>& v,
                                        double boot, double gamma,
                                        double lambda) {
  const std::size_t n = r.size();
  auto value = [&](std::size_t t) -> long double {
    return t < n ? v[t] : boot;
  };
  std::vector<long double> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t remaining = n - t;
    long double total = 0.0L;
    for (std::size_t k = 1; k <= remaining; ++k) {
      long double g = 0.0L;
      long double disc = 1.0L;
      for (std::size_t j = 0; j < k; ++j) {
        g += disc * r[t + j];
        disc *= gamma;
      }
      g += disc * value(t + k);
      const long double weight =
          k < remaining ? (1.0L - lambda) * std::pow((long double)lambda, k - 1)
                        : std::pow((long double)lambda, remaining - 1);
      total += weight * g;
    }
    out[t] = total;
  }
  return out;
}

Outcome gae_oracle() {
  Rng rng = make_stream(77);
  std::uniform_int_distribution<int> len(1, 60);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> n01(0.0, 1.0);
  double worst = 0.0;
  double worst_edge = 0.0;
  auto err = [](double a, long double b) {
    return static_cast<double>(std::abs(a - b) /
                               std::max(1.0L, std::abs(b)));
  };
  for (int ep = 0; ep < 100; ++ep) {
    const int n = len(rng);
    std::vector<double> r(n);
    std::vector<double> v(n);
    for (auto& x : r) x = n01(rng);
    for (auto& x : v) x = 5.0 * n01(rng);
    const double boot = ep % 3 == 0 ? 0.0 : 5.0 * n01(rng);
    const double gamma = 0.8 + 0.2 * unit(rng);
    for (double lambda : {unit(rng), 0.0, 1.0}) {
      const auto a = gae(r, v, boot, gamma, lambda);
      const auto tgt = td_lambda_targets(r, v, boot, gamma, lambda);
      const auto oracle_a = forward_view_advantages(r, v, boot, gamma, lambda);
      const auto oracle_g = lambda_returns(r, v, boot, gamma, lambda);
      double& w = (lambda == 0.0 || lambda == 1.0) ? worst_edge : worst;
      for (int t = 0; t < n; ++t) {
        w = std::max({w, err(a[t], oracle_a[t]), err(tgt[t], oracle_g[t])});
      }
      if (lambda == 0.0) {
        for (int t = 0; t < n; ++t) {
          const double next = t + 1 < n ? v[t + 1] : boot;
          worst_edge = std::max(worst_edge,
                                std::abs(a[t] - (r[t] + gamma * next - v[t])));
        }
      }
    }
  }
  return {worst <= 1e-12 && worst_edge <= 1e-12,
          fmt::format("100 episodes, worst error {:.1e}, lambda edges {:.1e}",
                      worst, worst_edge)};
}

// ---------------------------------------------------------------------------
// 7: formulas against extended-precision evaluations

long double spread(const std::vector<double>& w) {
  const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
  return static_cast<long double>(*hi) - *lo;
}

std::vector<long double> softmax_neg(const std::vector<double>& w,
                                     long double v) {
  std::vector<long double> e(w.size());
  long double sum = 0.0L;
  for (std::size_t i = 0; i < w.size(); ++i) {
    e[i] = std::exp(-static_cast<long double>(w[i]) / v);
    sum += e[i];
  }
  for (auto& x : e) x /= sum;
  return e;
}

Outcome formula_fidelity() {
  Rng rng = make_stream(31337);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> count(1, 12);
  double worst = 0.0;
  auto note = [&](double got, long double want) {
    worst = std::max(worst, static_cast<double>(std::abs(got - want)));
  };
  for (int trial = 0; trial < 200; ++trial) {
    const int n = count(rng);
    std::vector<double> w(n);
    const bool flat = trial % 10 == 0;
    for (auto& x : w) x = flat ? 7.5 : 50.0 * unit(rng) - 10.0;
    const double u = trial % 7 == 0 ? 1.0 : unit(rng);

    const auto p = segment_probabilities({w, u});
    const long double vs = spread(w) / 3.0L;
    const auto soft = vs > 0 ? softmax_neg(w, vs)
                             : std::vector<long double>(n, 1.0L / n);
    for (int k = 0; k < n; ++k) {
      note(p[k], vs > 0 ? (1.0L - u) * soft[k] + u / static_cast<long double>(n)
                        : 1.0L / n);
    }

    for (EliteSign sign : {EliteSign::kAsPrinted, EliteSign::kFavorHigh}) {
      const auto q = boltzmann_elite_probs(w, sign);
      std::vector<double> signed_w = w;
      if (sign == EliteSign::kFavorHigh) {
        for (auto& x : signed_w) x = -x;
      }
      const long double ve = spread(w);
      const auto want = ve > 0 ? softmax_neg(signed_w, ve)
                               : std::vector<long double>(n, 1.0L / n);
      for (int k = 0; k < n; ++k) note(q[k], want[k]);
    }

    StyleConfig cfg;
    cfg.e_min = 100.0 * unit(rng);
    cfg.e_max = cfg.e_min + 1.0 + 100.0 * unit(rng);
    cfg.alpha = 0.01 + unit(rng);
    const double e = 250.0 * unit(rng) - 20.0;
    const long double range = static_cast<long double>(cfg.e_max) - cfg.e_min;
    auto clamp01 = [](long double x) {
      return std::min(1.0L, std::max(0.0L, x));
    };
    cfg.mode = StyleMode::kEnergyDown;
    note(energy_reward(e, cfg), clamp01((cfg.e_max - (long double)e) / range));
    cfg.mode = StyleMode::kEnergyUp;
    note(energy_reward(e, cfg), clamp01(((long double)e - cfg.e_min) / range));

    const double vol = 2.0 * unit(rng);
    const long double decay = std::exp(-(long double)vol / cfg.alpha);
    cfg.mode = StyleMode::kVolumeDown;
    note(volume_reward(vol, cfg), decay);
    cfg.mode = StyleMode::kVolumeUp;
    note(volume_reward(vol, cfg), 1.0L - decay);

    const int dim = 1 + trial % 4;
    Matrix target(dim, dim);
    Matrix gram(dim, dim);
    long double frob = 0.0L;
    for (std::size_t i = 0; i < target.data.size(); ++i) {
      target.data[i] = unit(rng);
      gram.data[i] = trial % 11 == 0 ? target.data[i] : unit(rng);
      const long double d = (long double)target.data[i] - gram.data[i];
      frob += d * d;
    }
    note(gram_style_reward(target, gram, cfg.alpha),
         std::exp(-std::sqrt(frob) / cfg.alpha));

    StyleConfig reg;
    const double w0 = unit(rng);
    reg.reg_weights = {w0, 1.0 - w0};
    reg.reg_scales = {0.1 + unit(rng), 0.1 + unit(rng)};
    const std::vector<double> mag{3.0 * unit(rng), 3.0 * unit(rng)};
    note(regularization_reward(mag, reg),
         std::exp(-((long double)reg.reg_weights[0] * mag[0] /
                        reg.reg_scales[0] +
                    (long double)reg.reg_weights[1] * mag[1] /
                        reg.reg_scales[1])));
  }

  // Defaults surface in the echoed configuration.
  const RunConfig echoed = parse_config_text(
      emit_config(parse_config_text("", scratch())), scratch());
  const bool defaults =
      echoed.init.u == 0.2 && echoed.reward.style_cfg.e_min == 20.0 &&
      echoed.reward.style_cfg.e_max == 100.0 &&
      echoed.reward.style_cfg.alpha == 0.12 &&
      echoed.train.ppo.gamma == 0.95 && echoed.train.ppo.lambda == 0.95;
  return {worst <= 1e-12 && defaults,
          fmt::format("200 random cases, worst error {:.1e}; echoed defaults "
                      "u=0.2 E=[20,100] alpha=0.12 gamma=lambda=0.95: {}",
                      worst, defaults ? "present" : "MISSING")};
}

// ---------------------------------------------------------------------------
// 8: sampling statistics

Outcome sampling_statistics() {
  Rng rng = make_stream(8);
  const int draws = 100000;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> w(10);
  for (auto& x : w) x = 30.0 * unit(rng);
  const auto p = segment_probabilities({w, 0.2});
  std::vector<int> hits(p.size(), 0);
  for (int i = 0; i < draws; ++i) ++hits[sample_segment(p, rng)];
  double worst_sigma = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double sd = std::sqrt(draws * p[k] * (1.0 - p[k]));
    worst_sigma = std::max(worst_sigma, std::abs(hits[k] - draws * p[k]) / sd);
  }

  const RunConfig cfg = load("learn.cfg", 1);
  const auto ref = load_reference(cfg);
  const ReferenceTrack track(cfg.system, *ref);
  const double period = ref->cycle_duration();
  std::vector<int> decile(10, 0);
  for (int i = 0; i < draws; ++i) {
    const double t = rsi_sample(track, rng).t;
    ++decile[std::min(9, static_cast<int>(10.0 * t / period))];
  }
  double worst_decile = 0.0;
  for (int d : decile) {
    worst_decile = std::max(worst_decile, std::abs(d / double(draws) - 0.1));
  }
  return {worst_sigma <= 3.0 && worst_decile <= 0.01,
          fmt::format("segments worst {:.2f} sigma; RSI deciles worst "
                      "|f - 0.1| = {:.4f}",
                      worst_sigma, worst_decile)};
}

// ---------------------------------------------------------------------------
// 10: style trade-off

struct Trained {
  double completion = 0.0;
  double energy = 0.0;
};

Trained train_and_evaluate(const RunConfig& cfg) {
  Trainer trainer(cfg);
  while (!trainer.finished()) trainer.run_epoch();
  const EvalReport rep =
      evaluate(trainer.eval_env(), trainer.policy(), 100,
               cfg.train.ppo.max_steps, cfg.seed, 0, 1);
  return {rep.completion, rep.mean_energy};
}

Outcome style_tradeoff() {
  Trained plain{}, styled{}, unbounded{};
  std::string detail;
  const int seeds = 5;
  for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
    RunConfig base = load("learn.cfg", seed);
    base.train.stop_completion = 0.0;
    base.train.eval_every = 0;
    const Trained a = train_and_evaluate(base);
    const Trained b = train_and_evaluate(load("energy_down.cfg", seed));
    const Trained c = train_and_evaluate(load("unbounded_style.cfg", seed));
    for (auto [sum, x] : {std::pair{&plain, a}, {&styled, b}, {&unbounded, c}}) {
      sum->completion += x.completion / seeds;
      sum->energy += x.energy / seeds;
    }
    detail += fmt::format("seed {}: E {:.4f}/{:.4f} done {:.2f}/{:.2f}/{:.2f}; ",
                          seed, a.energy, b.energy, a.completion,
                          b.completion, c.completion);
  }
  const double drop = 1.0 - styled.energy / plain.energy;
  const bool ok = drop >= 0.10 && styled.completion >= 0.90 &&
                  unbounded.completion < styled.completion;
  detail += fmt::format(
      "mean energy {:.4f} -> {:.4f} ({:.1f}% lower), completion bounded style "
      "{:.2f}, unbounded w_s=0.8 {:.2f}",
      plain.energy, styled.energy, 100.0 * drop, styled.completion,
      unbounded.completion);
  return {ok, detail};
}

// ---------------------------------------------------------------------------
// 11: determinism across worker counts via the command line

std::vector<std::string> log_without_wall_time(const fs::path& csv) {
  std::ifstream in(csv);
  std::vector<std::string> rows;
  for (std::string line; std::getline(in, line);) {
    rows.push_back(line.substr(0, line.rfind(',')));
  }
  return rows;
}

Outcome determinism() {
  const fs::path cfg = fs::path(STB_CONFIG_DIR) / "learn.cfg";
  std::vector<std::vector<std::string>> logs;
  std::vector<std::string> ckpts;
  for (int workers : {1, 8}) {
    const fs::path out = scratch() / fmt::format("workers_{}", workers);
    const std::string cmd = fmt::format(
        "\"{}\" train --config \"{}\" --seed 3 --workers {} --out \"{}\" "
        "> \"{}\" 2>&1",
        STB_CLI, cfg.string(), workers, out.string(),
        (scratch() / fmt::format("workers_{}.log", workers)).string());
    if (std::system(cmd.c_str()) != 0) {
      return {false, fmt::format("command failed: {}", cmd)};
    }
    logs.push_back(log_without_wall_time(out / "epochs.csv"));
    std::ifstream in(out / "checkpoint.txt");
    std::stringstream buf;
    buf << in.rdbuf();
    ckpts.push_back(buf.str());
  }
  const bool ok = logs[0].size() > 1 && logs[0] == logs[1] &&
                  ckpts[0] == ckpts[1];
  return {ok, fmt::format("{} epoch rows, logs {}, checkpoints {}",
                          logs[0].size() - 1,
                          logs[0] == logs[1] ? "identical" : "differ",
                          ckpts[0] == ckpts[1] ? "identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
  };
  const std::vector<Criterion> all = {
      {1, "feasible-region shrinkage", shrinkage},
      {2, "bang-bang extremal", bang_bang_extremal},
      {3, "survival-only skill learning", learning},
      {4, "early-termination contract", termination_contract},
      {5, "gradient correctness", gradient_check},
      {6, "GAE / TD(lambda) oracle", gae_oracle},
      {7, "formula fidelity", formula_fidelity},
      {8, "sampling statistics", sampling_statistics},
      {9, "importance-sampling benefit", importance_benefit},
      {10, "style trade-off", style_tradeoff},
      {11, "determinism across workers", determinism},
  };
  // Optional criterion ids on the command line; 4 piggybacks on 3.
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  auto wanted = [&](int id) {
    return only.empty() ||
           std::find(only.begin(), only.end(), id) != only.end() ||
           (id == 3 && std::find(only.begin(), only.end(), 4) != only.end());
  };

  int failures = 0;
  for (const auto& c : all) {
    if (!wanted(c.id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    failures += !o.pass;
    std::printf("criterion %2d  %-30s %s  (%.1f s)  %s\n", c.id, c.name,
                o.pass ? "PASS" : "FAIL", seconds_since(t0),
                o.detail.c_str());
    std::fflush(stdout);
  }
  fs::remove_all(scratch());
  return failures == 0 ? 0 : 1;
}
