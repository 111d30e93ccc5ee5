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

#include "stb/app.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>

#include "stb/error.hpp"
#include "stb/feasible.hpp"
#include "stb/training.hpp"

#ifndef STB_BUILD_ID
#define STB_BUILD_ID "stbound-dev"
#endif

namespace stb {
namespace {

namespace fs = std::filesystem;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("run.out", "cannot write " + path.string());
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("run.out", "cannot create " + dir.string());
}

void write_buffer(const fs::path& path, const EliteBuffer& buffer,
                  SystemKind kind) {
  std::ofstream out = open_out(path);
  out << "segment,slot,t,w";
  for (const auto& n : coordinate_names(kind)) out << ',' << n;
  for (const auto& n : velocity_names(kind)) out << ',' << n;
  out << '\n';
  out.precision(17);
  for (std::size_t k = 0; k < buffer.segments.size(); ++k) {
    for (std::size_t s = 0; s < buffer.segments[k].size(); ++s) {
      const EliteEntry& e = buffer.segments[k][s];
      out << k << ',' << s << ',' << e.event.t << ',' << e.w;
      for (double q : e.event.state.q) out << ',' << q;
      for (double v : e.event.state.qdot) out << ',' << v;
      out << '\n';
    }
  }
}

void write_trajectory(const fs::path& path, const Environment& env,
                      const Episode& ep) {
  const SystemKind kind = env.spec().kind;
  std::vector<std::string> cols = coordinate_names(kind);
  for (const auto& n : velocity_names(kind)) cols.push_back(n);
  std::ofstream out = open_out(path);
  out << "step,t";
  for (const auto& c : cols) out << ',' << c;
  const std::size_t adim = ep.steps.empty() ? 1 : ep.steps[0].action.size();
  if (adim == 1) {
    out << ",action";
  } else {
    for (std::size_t i = 0; i < adim; ++i) out << ",action_" << i;
  }
  out << ",reward,violation\n";
  auto row = [&](int step, const SystemState& s) {
    out << step << ',' << num(s.t);
    for (double q : s.q) out << ',' << num(q);
    for (double v : s.qdot) out << ',' << num(v);
  };
  row(0, ep.start.state);
  for (std::size_t i = 0; i < adim; ++i) out << ',';
  out << ",";
  out << ','
      << (ep.steps.empty() && ep.cause == TerminationCause::kBoundViolation
              ? ep.violated_channel
              : "")
      << '\n';
  for (std::size_t k = 0; k < ep.steps.size(); ++k) {
    const Transition& t = ep.steps[k];
    row(static_cast<int>(k) + 1, t.next_state);
    for (double a : t.action) out << ',' << num(a);
    out << ',' << num(t.reward) << ',';
    if (t.cause == TerminationCause::kBoundViolation) out << t.violated_channel;
    out << '\n';
  }
}

// Three t-x panels: feasible cells, the e1/e2 events, the box bounds and
// (when available) the reference path.
std::string reach_svg(const std::vector<ReachGrid>& regions,
                      const ToyProblem& toy,
                      const std::vector<std::vector<ToyBound>>& extras,
                      const ReferenceMotion* reference) {
  const double pw = 360.0;
  const double ph = 260.0;
  const double margin = 40.0;
  const GridSpec& g = regions.front().spec();
  const double x_lo = std::max(g.x_lo, -4.0);
  const double x_hi = std::min(g.x_hi, 4.0);
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
      << regions.size() * (pw + margin) + margin << "\" height=\""
      << ph + 2 * margin << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (std::size_t p = 0; p < regions.size(); ++p) {
    const double ox = margin + p * (pw + margin);
    const double oy = margin;
    auto sx = [&](double t) { return ox + t / g.t_end * pw; };
    auto sy = [&](double x) { return oy + (x_hi - x) / (x_hi - x_lo) * ph; };
    svg << "<g>\n<rect x=\"" << ox << "\" y=\"" << oy << "\" width=\"" << pw
        << "\" height=\"" << ph << "\" fill=\"white\" stroke=\"black\"/>\n";
    const ReachGrid& r = regions[p];
    for (int k = 0; k < r.steps(); ++k) {
      int lo = g.nx;
      int hi = -1;
      for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.nv; ++j) {
          if (r.at(k, i, j)) {
            lo = std::min(lo, i);
            hi = std::max(hi, i);
            break;
          }
        }
      }
      if (hi < lo) continue;
      const double t0 = std::max(0.0, (k - 0.5) * g.dt());
      const double t1 = std::min(g.t_end, (k + 0.5) * g.dt());
      const double xa = std::clamp(g.x_lo + (hi + 1) * g.dx(), x_lo, x_hi);
      const double xb = std::clamp(g.x_lo + lo * g.dx(), x_lo, x_hi);
      svg << "<rect x=\"" << sx(t0) << "\" y=\"" << sy(xa) << "\" width=\""
          << sx(t1) - sx(t0) << "\" height=\"" << sy(xb) - sy(xa)
          << "\" fill=\"#9ecae1\"/>\n";
    }
    for (const auto& b : extras[p]) {
      svg << "<rect x=\"" << sx(b.t) - 3 << "\" y=\"" << sy(b.x_hi)
          << "\" width=\"6\" height=\"" << sy(b.x_lo) - sy(b.x_hi)
          << "\" fill=\"none\" stroke=\"red\" stroke-width=\"2\"/>\n";
    }
    for (const ToyBound& e : {toy.e1, toy.e2}) {
      svg << "<circle cx=\"" << sx(e.t) << "\" cy=\"" << sy(e.x_lo)
          << "\" r=\"4\" fill=\"red\"/>\n";
    }
    if (reference) {
      const int xi = reference->channel_index("x");
      if (xi >= 0) {
        svg << "<polyline fill=\"none\" stroke=\"black\" points=\"";
        for (int s = 0; s <= 200; ++s) {
          const double t = g.t_end * s / 200.0;
          const auto v = interpolate(*reference, phase_of(*reference, t));
          svg << sx(t) << ',' << sy(std::clamp(v[xi], x_lo, x_hi)) << ' ';
        }
        svg << "\"/>\n";
      }
    }
    svg << "<text x=\"" << ox << "\" y=\"" << oy - 8 << "\">bounds: e1, e2";
    if (extras[p].size() >= 1) svg << ", b1";
    if (extras[p].size() >= 2) svg << ", b2";
    svg << "</text>\n<text x=\"" << ox + pw / 2 << "\" y=\"" << oy + ph + 28
        << "\">t (s)</text>\n<text x=\"" << ox - 30 << "\" y=\"" << oy + ph / 2
        << "\">x (m)</text>\n</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

const char* build_id() { return STB_BUILD_ID; }

int guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
}

RunConfig load_run_config(const fs::path& path, const Overrides& o) {
  RunConfig cfg = parse_config(path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.out = *o.out;
  if (o.workers) {
    if (*o.workers < 0) throw ConfigError("run.workers", "must be >= 0");
    cfg.workers = *o.workers;
  }
  return cfg;
}

std::string manifest(const RunConfig& cfg, const std::string& command) {
  std::ostringstream m;
  m << "# stbound run manifest\n"
    << "# command: " << command << "\n"
    << "# build: " << build_id() << "\n"
    << "# seed: " << cfg.seed << "\n"
    << "# workers: " << effective_workers(cfg) << "\n\n"
    << emit_config(cfg);
  return m.str();
}

int run_train(const RunConfig& cfg, std::ostream& log) {
  ensure_dir(cfg.out);
  {
    std::ofstream m = open_out(cfg.out / "manifest.txt");
    m << manifest(cfg, "train");
  }
  log << emit_config(cfg);
  Trainer trainer(cfg);
  std::ofstream csv = open_out(cfg.out / "epochs.csv");
  csv << epoch_log_header() << '\n';
  const fs::path ckpt_path = cfg.out / "checkpoint.txt";
  trainer.checkpoint().write(ckpt_path);
  try {
    while (!trainer.finished()) {
      const EpochRecord rec = trainer.run_epoch();
      csv << format_epoch(rec) << '\n' << std::flush;
      log << "epoch " << rec.epoch << " samples " << rec.samples
          << " mean_length " << num(rec.mean_length) << " mean_return "
          << num(rec.mean_return);
      if (rec.completion >= 0.0) log << " completion " << num(rec.completion);
      log << '\n';
      if (cfg.train.checkpoint_every > 0 &&
          rec.epoch % cfg.train.checkpoint_every == 0) {
        trainer.checkpoint().write(ckpt_path);
      }
      if (cfg.train.stop_completion > 0.0 &&
          rec.completion >= cfg.train.stop_completion) {
        break;
      }
    }
  } catch (const NumericalError& e) {
    log << "stopping: " << e.what() << "; last good checkpoint kept at "
        << ckpt_path.string() << '\n';
    throw;
  }
  trainer.checkpoint().write(ckpt_path);
  trainer.checkpoint().write(cfg.out / "policy.txt");
  if (cfg.init.mode == InitMode::kEvolve) {
    write_buffer(cfg.out / "buffer.csv", trainer.buffer(), cfg.system.kind);
  }
  return kExitOk;
}

int run_eval(const RunConfig& cfg, const fs::path& checkpoint, int episodes,
             std::ostream& log) {
  if (episodes <= 0) throw ConfigError("episodes", "must be > 0");
  if (checkpoint.empty()) throw ConfigError("checkpoint", "path required");
  auto reference = load_reference(cfg);
  Environment env = make_environment(cfg, reference, true);
  Rng rng = make_stream(cfg.seed);
  PolicyNet policy = make_policy(cfg, reference, rng);
  Checkpoint ckpt;
  try {
    ckpt = Checkpoint::read(checkpoint);
  } catch (const std::exception& e) {
    throw ConfigError("checkpoint", e.what());
  }
  load_checkpoint(ckpt, policy, nullptr);

  std::vector<EvalEpisode> runs;
  const EvalReport rep =
      evaluate(env, policy, episodes, cfg.train.ppo.max_steps, cfg.seed, 0,
               effective_workers(cfg), &runs);
  const fs::path dir = cfg.out / "eval";
  ensure_dir(dir);
  for (std::size_t i = 0; i < runs.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "traj_%03zu.csv", i);
    write_trajectory(dir / name, env, runs[i].episode);
  }
  std::ostringstream s;
  s << "episodes " << rep.episodes << '\n'
    << "completion " << num(rep.completion) << '\n'
    << "mean_length " << num(rep.mean_length) << '\n'
    << "mean_energy " << num(rep.mean_energy) << '\n';
  for (const auto& d : rep.max_deviation) {
    s << "max_deviation " << d.channel << ' ' << num(d.max_abs) << '\n';
  }
  for (const auto& [ch, n] : rep.violations) {
    s << "violations " << ch << ' ' << n << '\n';
  }
  open_out(dir / "summary.txt") << s.str();
  log << s.str();
  return kExitOk;
}

int run_reach(const RunConfig& cfg, std::ostream& log) {
  if (cfg.system.kind != SystemKind::kDoubleIntegrator1D) {
    throw ConfigError("system.kind",
                      "reachability needs double_integrator, got " +
                          std::string(to_string(cfg.system.kind)));
  }
  ensure_dir(cfg.out);
  {
    std::ofstream m = open_out(cfg.out / "manifest.txt");
    m << manifest(cfg, "reach");
  }
  ToyProblem toy;
  toy.a_max = cfg.system.action_limits.at(0);
  toy.e2.t = cfg.reach.t_end;
  const std::vector<std::vector<ToyBound>> extras = {
      {}, {toy.b1}, {toy.b1, toy.b2}};
  std::vector<ReachGrid> regions;
  std::ofstream vol = open_out(cfg.out / "volumes.csv");
  vol << "bounds,volume,cells\n";
  const char* labels[] = {"e1_e2", "e1_e2_b1", "e1_e2_b1_b2"};
  for (std::size_t p = 0; p < extras.size(); ++p) {
    ReachGrid r = toy_feasible_region(cfg.reach, toy, extras[p]);
    std::ofstream csv =
        open_out(cfg.out / (std::string("region_") + labels[p] + ".csv"));
    csv << "step,x_index,v_index\n";
    for (int k = 0; k < r.steps(); ++k) {
      for (int i = 0; i < cfg.reach.nx; ++i) {
        for (int j = 0; j < cfg.reach.nv; ++j) {
          if (r.at(k, i, j)) csv << k << ',' << i << ',' << j << '\n';
        }
      }
    }
    const double v = region_volume(r);
    vol << labels[p] << ',' << num(v) << ',' << r.count() << '\n';
    log << labels[p] << " volume " << num(v) << " cells " << r.count() << '\n';
    regions.push_back(std::move(r));
  }
  for (const ToyBound* b : {&toy.b1, &toy.b2}) {
    const BoxOccupancy occ = box_occupancy(regions.back(), *b);
    log << "box t=" << num(b->t) << " marked " << occ.marked << " of "
        << occ.box_cells << '\n';
  }
  std::shared_ptr<const ReferenceMotion> reference;
  if (!cfg.reference.empty()) reference = load_reference(cfg);
  open_out(cfg.out / "reach.svg")
      << reach_svg(regions, toy, extras, reference.get());
  return kExitOk;
}

std::vector<std::string> reference_generators() {
  return {"rest-to-rest", "pendulum-swing", "planar-circle"};
}

ReferenceMotion generate_reference(const std::string& name, int frames) {
  if (frames < 2) throw ConfigError("frames", "need at least 2 frames");
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  std::vector<std::string> channels;
  double period = 0.0;
  std::function<std::vector<double>(double)> sample;
  if (name == "rest-to-rest") {
    // Leaves the origin toward +x, swings through -x and returns at rest.
    const double a = 0.45;
    period = 5.0;
    const double w = kTwoPi / period;
    channels = {"x", "v"};
    sample = [=](double t) {
      return std::vector<double>{
          a * (std::sin(w * t) - 0.5 * std::sin(2 * w * t)),
          a * w * (std::cos(w * t) - std::cos(2 * w * t))};
    };
  } else if (name == "pendulum-swing") {
    const double amp = 0.6;
    period = 2.0;
    const double w = kTwoPi / period;
    channels = {"theta", "omega"};
    sample = [=](double t) {
      return std::vector<double>{amp * std::sin(w * t),
                                 amp * w * std::cos(w * t)};
    };
  } else if (name == "planar-circle") {
    const double r = 0.3;
    period = 4.0;
    const double w = kTwoPi / period;
    channels = {"x", "y", "vx", "vy"};
    sample = [=](double t) {
      return std::vector<double>{r * std::sin(w * t), r - r * std::cos(w * t),
                                 r * w * std::cos(w * t),
                                 r * w * std::sin(w * t)};
    };
  } else {
    throw ConfigError("gen-ref", "unknown generator '" + name + "'");
  }
  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  for (int k = 0; k < frames; ++k) {
    const double t = period * k / frames;
    times.push_back(t);
    rows.push_back(sample(t));
  }
  return ReferenceMotion(channels, times, rows, true, period);
}

int gen_ref(const std::string& name, int frames, const fs::path& out,
            std::ostream& log) {
  const ReferenceMotion m = generate_reference(name, frames);
  if (out.has_parent_path()) ensure_dir(out.parent_path());
  write_reference_csv(out, m);
  log << "wrote " << name << " (" << frames << " frames, cycle "
      << num(m.cycle_duration()) << " s) to " << out.string() << '\n';
  return kExitOk;
}

int inspect_buffer(const RunConfig& cfg, const fs::path& buffer,
                   std::ostream& log) {
  std::ifstream in(buffer);
  if (!in) throw ConfigError("buffer", "cannot read " + buffer.string());
  const int dof = cfg.system.dof();
  std::shared_ptr<const ReferenceMotion> reference;
  std::optional<ReferenceTrack> track;
  if (!cfg.reference.empty()) {
    reference = load_reference(cfg);
    track.emplace(cfg.system, *reference);
  }
  struct Summary {
    int n = 0;
    double w_sum = 0.0;
    double t_min = INFINITY;
    double t_max = -INFINITY;
    double drift = 0.0;  // max |q - q_ref(t)|
  };
  std::map<int, Summary> seg;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    if (static_cast<int>(v.size()) != 4 + 2 * dof) {
      throw ConfigError("buffer", "row width does not match the system");
    }
    Summary& s = seg[static_cast<int>(v[0])];
    ++s.n;
    s.w_sum += v[3];
    s.t_min = std::min(s.t_min, v[2]);
    s.t_max = std::max(s.t_max, v[2]);
    if (track) {
      const SystemState ref = track->state_at(v[2]);
      for (int d = 0; d < dof; ++d) {
        s.drift = std::max(s.drift, std::abs(v[4 + d] - ref.q[d]));
      }
    }
  }
  log << "segment,entries,mean_w,t_min,t_max,max_drift\n";
  for (const auto& [k, s] : seg) {
    log << k << ',' << s.n << ',' << num(s.w_sum / s.n) << ',' << num(s.t_min)
        << ',' << num(s.t_max) << ',' << (track ? num(s.drift) : "") << '\n';
  }
  return kExitOk;
}

}  // namespace stb
