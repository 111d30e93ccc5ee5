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

#ifndef STB_APP_HPP_
#define STB_APP_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stb/config.hpp"
#include "stb/reference.hpp"

namespace stb {

enum ExitCode { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3 };

// Maps ConfigError / std::invalid_argument to 2 and NumericalError to 3,
// printing the message to `err`.
int guarded(const std::function<int()>& body, std::ostream& err);

// Applies --seed / --out / --workers on top of a parsed config.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<int> workers;
};
RunConfig load_run_config(const std::filesystem::path& path,
                          const Overrides& overrides);

// Writes the epoch log, checkpoints, final policy and a manifest under
// cfg.out.
int run_train(const RunConfig& cfg, std::ostream& log);

// Deterministic evaluation of a checkpoint; summary plus one trajectory CSV
// per episode under cfg.out/eval.
int run_eval(const RunConfig& cfg, const std::filesystem::path& checkpoint,
             int episodes, std::ostream& log);

// Toy reachability study: region CSVs, volumes and an SVG under cfg.out.
int run_reach(const RunConfig& cfg, std::ostream& log);

// Synthetic references: rest-to-rest, pendulum-swing, planar-circle.
ReferenceMotion generate_reference(const std::string& name, int frames);
std::vector<std::string> reference_generators();
int gen_ref(const std::string& name, int frames,
            const std::filesystem::path& out, std::ostream& log);

// Per-segment summary of an elite-buffer dump.
int inspect_buffer(const RunConfig& cfg, const std::filesystem::path& buffer,
                   std::ostream& log);

// Run manifest: config echo, seed, worker count and build identifier.
std::string manifest(const RunConfig& cfg, const std::string& command);
const char* build_id();

}  // namespace stb

#endif  // STB_APP_HPP_
