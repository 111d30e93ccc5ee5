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

#include "stb/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include "stb/error.hpp"

namespace stb {
namespace {

namespace fs = std::filesystem;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& key, const std::string& s) {
  const std::string t = trim(s);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE ||
      std::isnan(v)) {
    throw ConfigError(key, "expected a number, got '" + t + "'");
  }
  return v;
}

double to_finite(const std::string& key, const std::string& s) {
  const double v = to_double(key, s);
  if (!std::isfinite(v)) throw ConfigError(key, "must be finite");
  return v;
}

std::int64_t to_int(const std::string& key, const std::string& s) {
  const std::string t = trim(s);
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE) {
    throw ConfigError(key, "expected an integer, got '" + t + "'");
  }
  return v;
}

int to_int32(const std::string& key, const std::string& s) {
  const std::int64_t v = to_int(key, s);
  if (v < INT32_MIN || v > INT32_MAX) throw ConfigError(key, "out of range");
  return static_cast<int>(v);
}

std::uint64_t to_u64(const std::string& key, const std::string& s) {
  const std::string t = trim(s);
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
  if (t.empty() || t[0] == '-' || end != t.c_str() + t.size() ||
      errno == ERANGE) {
    throw ConfigError(key, "expected an unsigned integer, got '" + t + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& s) {
  const std::string t = trim(s);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + t + "'");
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

template <typename T, typename F>
std::string join(const std::vector<T>& v, F f) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += f(v[i]);
  }
  return out;
}

std::vector<double> to_doubles(const std::string& key, const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) out.push_back(to_finite(key, item));
  return out;
}

fs::path to_path(const std::string& s, const fs::path& base) {
  const std::string t = trim(s);
  if (t.empty()) return {};
  fs::path p(t);
  if (p.is_relative()) p = base / p;
  return p.lexically_normal();
}

std::string_view to_string(Actuation a) {
  return a == Actuation::kDirect ? "direct" : "pd_servo";
}

Actuation actuation_from_string(const std::string& key, std::string_view s) {
  if (s == "direct") return Actuation::kDirect;
  if (s == "pd_servo") return Actuation::kPdServo;
  throw ConfigError(key, "expected direct or pd_servo");
}

// "[(t0, s0), (t1, s1)]" or a scalar ("inf" allowed).
SigmaSchedule to_sigma(const std::string& key, const std::string& s) {
  const std::string t = trim(s);
  try {
    if (t.empty() || t.front() != '[') return SigmaSchedule(to_double(key, t));
    if (t.back() != ']') throw ConfigError(key, "unterminated table");
    std::string body = t.substr(1, t.size() - 2);
    std::vector<std::pair<double, double>> table;
    std::size_t pos = 0;
    while (true) {
      const auto open = body.find('(', pos);
      if (open == std::string::npos) {
        if (!trim(body.substr(pos)).empty()) {
          throw ConfigError(key, "malformed table");
        }
        break;
      }
      const auto close = body.find(')', open);
      if (close == std::string::npos) throw ConfigError(key, "missing ')'");
      const auto parts = split(body.substr(open + 1, close - open - 1), ',');
      if (parts.size() != 2) throw ConfigError(key, "entries are (t, sigma)");
      table.emplace_back(to_finite(key, parts[0]), to_double(key, parts[1]));
      pos = close + 1;
      const auto comma = body.find_first_not_of(" \t", pos);
      if (comma != std::string::npos && body[comma] == ',') pos = comma + 1;
    }
    return SigmaSchedule(std::move(table));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key, e.what());
  }
}

std::string fmt_sigma(const SigmaSchedule& s) {
  if (!s.tabulated()) return fmt_double(s.constant());
  return "[" +
         join(s.table(),
              [](const std::pair<double, double>& p) {
                return "(" + fmt_double(p.first) + ", " +
                       fmt_double(p.second) + ")";
              }) +
         "]";
}

// "<coord> <op> <value> @ [t_a, t_b]"
ForbiddenRegion to_forbidden(const std::string& key, const std::string& name,
                             const std::string& s) {
  ForbiddenRegion r;
  r.name = name;
  const auto at = s.find('@');
  if (at == std::string::npos) throw ConfigError(key, "missing '@ [t_a, t_b]'");
  std::istringstream pred(s.substr(0, at));
  std::string op;
  std::string value;
  std::string rest;
  if (!(pred >> r.coordinate >> op >> value) || (pred >> rest)) {
    throw ConfigError(key, "expected '<coord> <op> <value>'");
  }
  try {
    r.op = compare_op_from_string(op);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key, e.what());
  }
  r.value = to_finite(key, value);
  std::string window = trim(s.substr(at + 1));
  if (window.size() < 2 || window.front() != '[' || window.back() != ']') {
    throw ConfigError(key, "window must be [t_a, t_b]");
  }
  const auto ends = split(window.substr(1, window.size() - 2), ',');
  if (ends.size() != 2) throw ConfigError(key, "window must be [t_a, t_b]");
  r.t_begin = to_finite(key, ends[0]);
  r.t_end = to_finite(key, ends[1]);
  if (r.t_end < r.t_begin) throw ConfigError(key, "t_b < t_a");
  return r;
}

struct Field {
  std::function<void(RunConfig&, const std::string&, const fs::path&)> set;
  std::function<std::string(const RunConfig&)> get;
};

using Schema = std::vector<std::pair<std::string, Field>>;

#define STB_DOUBLE(key, member)                                            \
  {key,                                                                    \
   {[](RunConfig& c, const std::string& v, const fs::path&) {              \
      c.member = to_finite(key, v);                                        \
    },                                                                     \
    [](const RunConfig& c) { return fmt_double(c.member); }}}
#define STB_INT(key, member)                                               \
  {key,                                                                    \
   {[](RunConfig& c, const std::string& v, const fs::path&) {              \
      c.member = to_int32(key, v);                                         \
    },                                                                     \
    [](const RunConfig& c) { return std::to_string(c.member); }}}
#define STB_BOOL(key, member)                                              \
  {key,                                                                    \
   {[](RunConfig& c, const std::string& v, const fs::path&) {              \
      c.member = to_bool(key, v);                                          \
    },                                                                     \
    [](const RunConfig& c) { return fmt_bool(c.member); }}}
#define STB_PATH(key, member)                                              \
  {key,                                                                    \
   {[](RunConfig& c, const std::string& v, const fs::path& base) {         \
      c.member = to_path(v, base);                                         \
    },                                                                     \
    [](const RunConfig& c) { return c.member.string(); }}}

const Schema& schema() {
  static const Schema kSchema = {
      // system.kind is applied first; see parse_config_text.
      {"system.kind",
       {[](RunConfig& c, const std::string& v, const fs::path&) {
          try {
            c.system = default_spec(system_kind_from_string(trim(v)));
          } catch (const std::invalid_argument& e) {
            throw ConfigError("system.kind", e.what());
          }
        },
        [](const RunConfig& c) { return std::string(to_string(c.system.kind)); }}},
      STB_DOUBLE("system.mass", system.mass),
      STB_DOUBLE("system.length", system.length),
      STB_DOUBLE("system.gravity", system.gravity),
      STB_DOUBLE("system.damping", system.damping),
      {"system.action_limit",
       {[](RunConfig& c, const std::string& v, const fs::path&) {
          c.system.action_limits = to_doubles("system.action_limit", v);
        },
        [](const RunConfig& c) {
          return join(c.system.action_limits, fmt_double);
        }}},
      STB_DOUBLE("system.dt", system.dt),
      STB_INT("system.substeps", system.control_substeps),
      {"system.actuation",
       {[](RunConfig& c, const std::string& v, const fs::path&) {
          c.system.actuation = actuation_from_string("system.actuation", trim(v));
        },
        [](const RunConfig& c) {
          return std::string(to_string(c.system.actuation));
        }}},
      STB_DOUBLE("system.kp", system.kp),
      STB_DOUBLE("system.kd", system.kd),

      STB_PATH("reference.path", reference),
      STB_BOOL("reference.cyclic", cyclic),
      STB_DOUBLE("reference.cycle", cycle),
      {"reference.action_channels",
       {[](RunConfig& c, const std::string& v, const fs::path&) {
          c.action_channels = split(v, ',');
        },
        [](const RunConfig& c) {
          return join(c.action_channels, [](const std::string& s) { return s; });
        }}},

      {"bounds.preset",
       {[](RunConfig& c, const std::string& v, const fs::path&) {
          c.bounds_preset = trim(v);
        },
        [](const RunConfig& c) { return c.bounds_preset; }}},

      STB_DOUBLE("train.gamma", train.ppo.gamma),
      STB_DOUBLE("train.lambda", train.ppo.lambda),
      STB_DOUBLE("train.clip", train.ppo.clip),
      STB_DOUBLE("train.actor_lr", train.ppo.actor_lr),
      STB_DOUBLE("train.critic_lr", train.ppo.critic_lr),
      STB_INT("train.samples_per_epoch", train.ppo.samples_per_epoch),
      STB_INT("train.minibatch", train.ppo.minibatch),
      STB_INT("train.max_steps", train.ppo.max_steps),
      STB_INT("train.update_epochs", train.ppo.update_epochs),
      {"train.total_samples",
       {[](RunConfig& c, const std::string& v, const fs::path&) {
          c.train.total_samples = to_int("train.total_samples", v);
        },
        [](const RunConfig& c) { return std::to_string(c.train.total_samples); }}},
      {"train.hidden",
       {[](RunConfig& c, const std::string& v, const fs::path&) {
          c.train.hidden.clear();
          for (const auto& s : split(v, ',')) {
            c.train.hidden.push_back(to_int32("train.hidden", s));
          }
        },
        [](const RunConfig& c) {
          return join(c.train.hidden, [](int h) { return std::to_string(h); });
        }}},
      STB_DOUBLE("train.init_std", train.init_std),
      STB_BOOL("train.terminate_on_bounds", train.terminate_on_bounds),
      STB_INT("train.eval_every", train.eval_every),
      STB_INT("train.eval_episodes", train.eval_episodes),
      STB_DOUBLE("train.stop_completion", train.stop_completion),
      STB_INT("train.checkpoint_every", train.checkpoint_every),

      STB_BOOL("reward.style", reward.style),
      STB_BOOL("reward.imitation", reward.imitation),

      {"style.mode",
       {[](RunConfig& c, const std::string& v, const fs::path&) {
          try {
            c.reward.style_cfg.mode = style_mode_from_string(trim(v));
          } catch (const std::invalid_argument& e) {
            throw ConfigError("style.mode", e.what());
          }
        },
        [](const RunConfig& c) {
          return std::string(to_string(c.reward.style_cfg.mode));
        }}},
      STB_DOUBLE("style.emin", reward.style_cfg.e_min),
      STB_DOUBLE("style.emax", reward.style_cfg.e_max),
      STB_DOUBLE("style.alpha", reward.style_cfg.alpha),
      STB_DOUBLE("style.ws", reward.w_s),
      STB_BOOL("style.reg", reward.regularize),
      {"style.reg_w",
       {[](RunConfig& c, const std::string& v, const fs::path&) {
          c.reward.style_cfg.reg_weights = to_doubles("style.reg_w", v);
        },
        [](const RunConfig& c) {
          return join(c.reward.style_cfg.reg_weights, fmt_double);
        }}},
      {"style.reg_beta",
       {[](RunConfig& c, const std::string& v, const fs::path&) {
          c.reward.style_cfg.reg_scales = to_doubles("style.reg_beta", v);
        },
        [](const RunConfig& c) {
          return join(c.reward.style_cfg.reg_scales, fmt_double);
        }}},
      STB_PATH("style.gram_target", reward.gram_target),

      {"init.mode",
       {[](RunConfig& c, const std::string& v, const fs::path&) {
          try {
            c.init.mode = init_mode_from_string(trim(v));
          } catch (const std::invalid_argument& e) {
            throw ConfigError("init.mode", e.what());
          }
        },
        [](const RunConfig& c) { return std::string(to_string(c.init.mode)); }}},
      STB_INT("init.segments", init.segments),
      STB_DOUBLE("init.u", init.u),
      STB_INT("init.buffer", init.buffer),
      {"init.elite_sign",
       {[](RunConfig& c, const std::string& v, const fs::path&) {
          try {
            c.init.elite_sign = elite_sign_from_string(trim(v));
          } catch (const std::invalid_argument& e) {
            throw ConfigError("init.elite_sign", e.what());
          }
        },
        [](const RunConfig& c) {
          return std::string(to_string(c.init.elite_sign));
        }}},
      STB_DOUBLE("init.avg", init.avg),

      STB_DOUBLE("reach.x_lo", reach.x_lo),
      STB_DOUBLE("reach.x_hi", reach.x_hi),
      STB_DOUBLE("reach.v_lo", reach.v_lo),
      STB_DOUBLE("reach.v_hi", reach.v_hi),
      STB_INT("reach.nx", reach.nx),
      STB_INT("reach.nv", reach.nv),
      STB_INT("reach.nt", reach.nt),
      STB_DOUBLE("reach.t_end", reach.t_end),

      {"run.seed",
       {[](RunConfig& c, const std::string& v, const fs::path&) {
          c.seed = to_u64("run.seed", v);
        },
        [](const RunConfig& c) { return std::to_string(c.seed); }}},
      STB_INT("run.workers", workers),
      STB_PATH("run.out", out),
  };
  return kSchema;
}

#undef STB_DOUBLE
#undef STB_INT
#undef STB_BOOL
#undef STB_PATH

const Field* find_field(const std::string& key) {
  for (const auto& [k, f] : schema()) {
    if (k == key) return &f;
  }
  return nullptr;
}

template <typename F>
void wrap(const std::string& key, F&& f) {
  try {
    f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key, e.what());
  }
}

void validate(const RunConfig& c) {
  wrap("system", [&] { c.system.validate(); });
  wrap("train", [&] { c.train.ppo.validate(); });
  wrap("style", [&] { c.reward.style_cfg.validate(); });
  wrap("reach", [&] { c.reach.validate(); });

  if (c.cycle < 0.0) throw ConfigError("reference.cycle", "must be >= 0");
  if (!c.reference.empty() && !fs::is_regular_file(c.reference)) {
    throw ConfigError("reference.path",
                      "file not found: " + c.reference.string());
  }
  if (!c.action_channels.empty() &&
      static_cast<int>(c.action_channels.size()) != c.system.dof()) {
    throw ConfigError("reference.action_channels",
                      "need one channel per degree of freedom");
  }
  if (c.bounds_preset != "none") {
    wrap("bounds.preset",
         [&] { (void)preset_bounds(c.bounds_preset, c.system.kind); });
  }
  for (const auto& o : c.bound_overrides) {
    wrap("bound." + o.channel, [&] { (void)find_channel(c.system.kind, o.channel); });
  }
  for (const auto& r : c.forbidden) {
    if (!has_coordinate(c.system.kind, r.coordinate)) {
      throw ConfigError("forbid." + r.name,
                        "unknown coordinate '" + r.coordinate + "'");
    }
  }
  if (c.train.total_samples < 0) {
    throw ConfigError("train.total_samples", "must be >= 0");
  }
  if (c.train.hidden.empty() ||
      std::any_of(c.train.hidden.begin(), c.train.hidden.end(),
                  [](int h) { return h <= 0; })) {
    throw ConfigError("train.hidden", "need positive layer sizes");
  }
  if (!(c.train.init_std > 0.0)) {
    throw ConfigError("train.init_std", "must be > 0");
  }
  if (c.train.eval_every < 0) throw ConfigError("train.eval_every", "must be >= 0");
  if (c.train.eval_episodes <= 0) {
    throw ConfigError("train.eval_episodes", "must be > 0");
  }
  if (c.train.stop_completion < 0.0 || c.train.stop_completion > 1.0) {
    throw ConfigError("train.stop_completion", "must lie in [0, 1]");
  }
  if (c.train.checkpoint_every < 0) {
    throw ConfigError("train.checkpoint_every", "must be >= 0");
  }
  if (c.reward.w_s < 0.0 || c.reward.w_s > 1.0) {
    throw ConfigError("style.ws", "must lie in [0, 1]");
  }
  if (c.reward.regularize && c.reward.style_cfg.reg_weights.size() != 2) {
    throw ConfigError("style.reg_w", "toy regularizer takes two weights");
  }
  if (c.reward.style && c.reward.style_cfg.mode == StyleMode::kGram) {
    if (c.reward.gram_target.empty()) {
      throw ConfigError("style.gram_target", "required for gram mode");
    }
  }
  if (!c.reward.gram_target.empty() &&
      !fs::is_regular_file(c.reward.gram_target)) {
    throw ConfigError("style.gram_target",
                      "file not found: " + c.reward.gram_target.string());
  }
  if (c.init.segments <= 0) throw ConfigError("init.segments", "must be > 0");
  if (c.init.u < 0.0 || c.init.u > 1.0) {
    throw ConfigError("init.u", "must lie in [0, 1]");
  }
  if (c.init.buffer <= 0) throw ConfigError("init.buffer", "must be > 0");
  if (c.init.avg < 0.0 || c.init.avg >= 1.0) {
    throw ConfigError("init.avg", "must lie in [0, 1)");
  }
  if (c.workers < 0) throw ConfigError("run.workers", "must be >= 0");
}

}  // namespace

std::string_view to_string(InitMode mode) {
  switch (mode) {
    case InitMode::kRsi:
      return "rsi";
    case InitMode::kImportance:
      return "importance";
    case InitMode::kEvolve:
      return "evolve";
  }
  return "?";
}

InitMode init_mode_from_string(std::string_view s) {
  if (s == "rsi") return InitMode::kRsi;
  if (s == "importance") return InitMode::kImportance;
  if (s == "evolve") return InitMode::kEvolve;
  throw std::invalid_argument("unknown init mode '" + std::string(s) + "'");
}

RunConfig parse_config_text(std::string_view text, const fs::path& base_dir) {
  struct Entry {
    std::string key;
    std::string value;
  };
  std::vector<Entry> entries;
  std::map<std::string, int> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", "line " + std::to_string(lineno) +
                                ": expected 'key = value'");
    }
    Entry e{trim(line.substr(0, eq)), trim(line.substr(eq + 1))};
    if (e.key.empty()) {
      throw ConfigError("", "line " + std::to_string(lineno) + ": empty key");
    }
    if (seen.count(e.key)) throw ConfigError(e.key, "duplicate key");
    seen[e.key] = lineno;
    entries.push_back(std::move(e));
  }

  RunConfig cfg;
  cfg.out = to_path(cfg.out.string(), base_dir);
  // The system kind selects per-system defaults that later keys refine.
  for (const auto& e : entries) {
    if (e.key == "system.kind") find_field(e.key)->set(cfg, e.value, base_dir);
  }
  for (const auto& e : entries) {
    if (e.key == "system.kind") continue;
    if (e.key.rfind("bound.", 0) == 0) {
      const std::string ch = e.key.substr(6);
      if (ch.empty()) throw ConfigError(e.key, "missing channel name");
      cfg.bound_overrides.push_back({ch, to_sigma(e.key, e.value)});
      continue;
    }
    if (e.key.rfind("forbid.", 0) == 0) {
      const std::string name = e.key.substr(7);
      if (name.empty()) throw ConfigError(e.key, "missing region name");
      cfg.forbidden.push_back(to_forbidden(e.key, name, e.value));
      continue;
    }
    const Field* f = find_field(e.key);
    if (!f) throw ConfigError(e.key, "unknown key");
    f->set(cfg, e.value, base_dir);
  }
  validate(cfg);
  return cfg;
}

RunConfig parse_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  fs::path base = path.parent_path();
  if (base.empty()) base = ".";
  return parse_config_text(buf.str(), fs::absolute(base));
}

std::string emit_config(const RunConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& [key, field] : schema()) {
    const std::string sec = key.substr(0, key.find('.'));
    if (sec != section) {
      if (!section.empty()) out += '\n';
      section = sec;
    }
    out += key + " = " + field.get(cfg) + '\n';
  }
  if (!cfg.bound_overrides.empty()) out += '\n';
  for (const auto& o : cfg.bound_overrides) {
    out += "bound." + o.channel + " = " + fmt_sigma(o.sigma) + '\n';
  }
  if (!cfg.forbidden.empty()) out += '\n';
  for (const auto& r : cfg.forbidden) {
    out += "forbid." + r.name + " = " + r.coordinate + " " +
           std::string(to_string(r.op)) + " " + fmt_double(r.value) + " @ [" +
           fmt_double(r.t_begin) + ", " + fmt_double(r.t_end) + "]\n";
  }
  // Effective bound set, for the record only.
  out += "\n# resolved bounds\n";
  const SpacetimeBoundSet b = resolved_bounds(cfg);
  for (const auto& ch : b.channels) {
    out += "#   " + ch.channel.name + " = " + fmt_sigma(ch.sigma) + '\n';
  }
  return out;
}

SpacetimeBoundSet resolved_bounds(const RunConfig& cfg) {
  SpacetimeBoundSet b;
  if (cfg.bounds_preset != "none") {
    wrap("bounds.preset",
         [&] { b = preset_bounds(cfg.bounds_preset, cfg.system.kind); });
  }
  for (const auto& o : cfg.bound_overrides) {
    wrap("bound." + o.channel,
         [&] { b.set(find_channel(cfg.system.kind, o.channel), o.sigma); });
  }
  b.forbidden = cfg.forbidden;
  return b;
}

int effective_workers(const RunConfig& cfg) {
  if (cfg.workers > 0) return cfg.workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace stb
