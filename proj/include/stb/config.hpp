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

#ifndef STB_CONFIG_HPP_
#define STB_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "stb/bounds.hpp"
#include "stb/dynsys.hpp"
#include "stb/feasible.hpp"
#include "stb/initstate.hpp"
#include "stb/rlcore.hpp"
#include "stb/style.hpp"

namespace stb {

enum class InitMode { kRsi, kImportance, kEvolve };

std::string_view to_string(InitMode mode);
InitMode init_mode_from_string(std::string_view s);

struct InitConfig {
  InitMode mode = InitMode::kRsi;
  int segments = 10;
  double u = 0.2;
  int buffer = 32;
  EliteSign elite_sign = EliteSign::kAsPrinted;
  double avg = 0.9;  // EMA factor of per-segment return estimates

  bool operator==(const InitConfig&) const = default;
};

struct TrainingConfig {
  TrainConfig ppo;
  std::int64_t total_samples = 200000;
  std::vector<int> hidden{64, 64};
  double init_std = 0.3;
  bool terminate_on_bounds = true;
  int eval_every = 0;  // epochs; 0 disables periodic evaluation
  int eval_episodes = 100;
  double stop_completion = 0.0;  // stop once eval completion reaches it
  int checkpoint_every = 10;

  bool operator==(const TrainingConfig&) const = default;
};

struct RewardConfig {
  bool style = false;
  bool imitation = false;
  bool regularize = false;
  double w_s = 0.5;
  StyleConfig style_cfg;
  std::filesystem::path gram_target;

  bool operator==(const RewardConfig&) const = default;
};

struct BoundOverride {
  std::string channel;
  SigmaSchedule sigma;

  bool operator==(const BoundOverride&) const = default;
};

struct RunConfig {
  SystemSpec system;
  std::filesystem::path reference;
  bool cyclic = true;
  double cycle = 0.0;  // 0 selects the reference default
  std::vector<std::string> action_channels;  // empty: coordinate names
  std::string bounds_preset = "default";
  std::vector<BoundOverride> bound_overrides;
  std::vector<ForbiddenRegion> forbidden;
  TrainingConfig train;
  RewardConfig reward;
  InitConfig init;
  GridSpec reach;
  std::uint64_t seed = 1;
  int workers = 0;  // 0: hardware concurrency
  std::filesystem::path out = "out";

  bool operator==(const RunConfig&) const = default;
};

// Line-based `section.key = value`; `#` starts a comment. Relative paths
// resolve against the config file's directory. Throws ConfigError naming the
// offending key.
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(std::string_view text,
                            const std::filesystem::path& base_dir);

// Every field, defaults included; parse_config_text(emit_config(c)) == c.
std::string emit_config(const RunConfig& cfg);

// Preset plus per-channel overrides plus forbidden regions.
SpacetimeBoundSet resolved_bounds(const RunConfig& cfg);

int effective_workers(const RunConfig& cfg);

}  // namespace stb

#endif  // STB_CONFIG_HPP_
