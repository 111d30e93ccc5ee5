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

// stbound: train, evaluate and analyze spacetime-bounded controllers.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "stb/app.hpp"

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> workers;

  void attach(CLI::App* cmd, bool config_required) {
    auto* c = cmd->add_option("--config", config, "run configuration file");
    if (config_required) c->required();
    cmd->add_option("--seed", seed, "override run.seed");
    cmd->add_option("--out", out, "override run.out");
    cmd->add_option("--workers", workers, "worker threads (0: all cores)");
  }

  stb::RunConfig load() const {
    stb::Overrides o;
    o.seed = seed;
    if (out) o.out = *out;
    o.workers = workers;
    return stb::load_run_config(config, o);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spacetime-bounded motion control toolkit"};
  app.require_subcommand(1);

  Common train_opts;
  auto* train = app.add_subcommand("train", "train a policy");
  train_opts.attach(train, true);

  Common eval_opts;
  std::string checkpoint;
  int episodes = 100;
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval_opts.attach(eval, true);
  eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  eval->add_option("--episodes", episodes, "evaluation episodes");

  Common reach_opts;
  auto* reach = app.add_subcommand("reach", "toy feasible-region study");
  reach_opts.attach(reach, true);

  std::string generator;
  std::string ref_out = "reference.csv";
  int frames = 150;
  auto* gen = app.add_subcommand("gen-ref", "write a synthetic reference");
  gen->add_option("motion", generator, "generator name")
      ->required()
      ->check(CLI::IsMember(stb::reference_generators()));
  gen->add_option("--out", ref_out, "output CSV");
  gen->add_option("--frames", frames, "frames per cycle");

  Common buf_opts;
  std::string buffer;
  auto* inspect = app.add_subcommand("inspect-buffer", "summarize an elite buffer");
  buf_opts.attach(inspect, true);
  inspect->add_option("--buffer", buffer, "buffer CSV (default: <out>/buffer.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : stb::kExitConfig;
  }

  return stb::guarded(
      [&]() -> int {
        if (*train) return stb::run_train(train_opts.load(), std::cout);
        if (*eval) {
          return stb::run_eval(eval_opts.load(), checkpoint, episodes,
                               std::cout);
        }
        if (*reach) return stb::run_reach(reach_opts.load(), std::cout);
        if (*gen) return stb::gen_ref(generator, frames, ref_out, std::cout);
        const stb::RunConfig cfg = buf_opts.load();
        const std::filesystem::path path =
            buffer.empty() ? cfg.out / "buffer.csv" : std::filesystem::path(buffer);
        return stb::inspect_buffer(cfg, path, std::cout);
      },
      std::cerr);
}
