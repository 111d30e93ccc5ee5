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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "stb/app.hpp"
#include "stb/error.hpp"

namespace stb {
namespace {

namespace fs = std::filesystem;

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  return lines;
}

class TrainingTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / "stb_training_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::ostringstream log;
    ASSERT_EQ(gen_ref("rest-to-rest", 150, dir_ / "ref.csv", log), 0);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Keys in `extra` replace the defaults below.
  RunConfig small(const std::string& extra = "") const {
    std::map<std::string, std::string> kv = {
        {"reference.path", "ref.csv"},     {"train.samples_per_epoch", "300"},
        {"train.minibatch", "64"},         {"train.update_epochs", "2"},
        {"train.total_samples", "600"},    {"train.hidden", "8, 8"},
        {"train.checkpoint_every", "1"},   {"run.out", "out"}};
    std::istringstream in(extra);
    for (std::string line; std::getline(in, line);) {
      const auto eq = line.find(" = ");
      if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 3);
    }
    std::string text;
    for (const auto& [k, v] : kv) text += k + " = " + v + "\n";
    return parse_config_text(text, dir_);
  }

  fs::path dir_;
};

std::string without_wall_time(EpochRecord r) {
  r.wall_time = 0.0;
  return format_epoch(r);
}

TEST_F(TrainingTest, ZeroBudgetWritesHeaderOnly) {
  const RunConfig cfg = small("train.total_samples = 0\n");
  std::ostringstream log;
  EXPECT_EQ(run_train(cfg, log), 0);
  const auto lines = read_lines(cfg.out / "epochs.csv");
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_EQ(lines[0], epoch_log_header());
  EXPECT_TRUE(fs::exists(cfg.out / "manifest.txt"));
}

TEST_F(TrainingTest, EpochsIgnoreWorkerCount) {
  for (const char* mode : {"rsi", "importance", "evolve"}) {
    const std::string init = std::string("init.mode = ") + mode + "\n";
    RunConfig one = small(init + "run.workers = 1\n");
    RunConfig three = small(init + "run.workers = 3\n");
    Trainer a(one), b(three);
    while (!a.finished()) {
      ASSERT_FALSE(b.finished());
      EXPECT_EQ(without_wall_time(a.run_epoch()),
                without_wall_time(b.run_epoch()))
          << mode;
    }
    EXPECT_TRUE(b.finished());
    EXPECT_EQ(a.checkpoint().tensors, b.checkpoint().tensors) << mode;
    EXPECT_EQ(a.segment_returns(), b.segment_returns()) << mode;
  }
}

TEST_F(TrainingTest, SamplesAccumulatePerEpoch) {
  Trainer t(small());
  const EpochRecord r = t.run_epoch();
  EXPECT_EQ(r.epoch, 1);
  EXPECT_GE(r.samples, 300);
  EXPECT_EQ(r.samples, t.samples());
  std::int64_t steps = 0;
  for (const auto& ep : t.last_episodes()) steps += ep.steps.size();
  EXPECT_EQ(steps, r.samples);
}

TEST_F(TrainingTest, CheckpointRoundTripAndMismatch) {
  Trainer t(small());
  t.run_epoch();
  const fs::path p = dir_ / "ckpt.txt";
  t.checkpoint().write(p);

  Trainer fresh(small());
  fresh.restore(Checkpoint::read(p));
  EXPECT_EQ(fresh.checkpoint().tensors, t.checkpoint().tensors);

  Trainer wider(small("train.hidden = 16\n"));
  EXPECT_THROW(wider.restore(Checkpoint::read(p)), ConfigError);
}

TEST_F(TrainingTest, EvaluationIsDeterministic) {
  Trainer t(small());
  const EvalReport a = t.evaluate_now(6);
  const EvalReport b = t.evaluate_now(6);
  EXPECT_EQ(a.episodes, 6);
  EXPECT_EQ(a.completion, b.completion);
  EXPECT_EQ(a.mean_length, b.mean_length);
  EXPECT_GE(a.completion, 0.0);
  EXPECT_LE(a.completion, 1.0);
}

TEST_F(TrainingTest, TrainThenEvalWritesTrajectories) {
  const RunConfig cfg = small();
  std::ostringstream log;
  ASSERT_EQ(run_train(cfg, log), 0);
  const auto lines = read_lines(cfg.out / "epochs.csv");
  EXPECT_EQ(lines.size(), 3u);
  ASSERT_TRUE(fs::exists(cfg.out / "checkpoint.txt"));
  ASSERT_EQ(run_eval(cfg, cfg.out / "checkpoint.txt", 3, log), 0);
  const auto traj = read_lines(cfg.out / "eval" / "traj_000.csv");
  ASSERT_GE(traj.size(), 2u);
  EXPECT_EQ(traj[0], "step,t,x,v,action,reward,violation");
  EXPECT_TRUE(fs::exists(cfg.out / "eval" / "summary.txt"));
}

TEST_F(TrainingTest, EvolveRunWritesInspectableBuffer) {
  const RunConfig cfg = small("init.mode = evolve\n");
  std::ostringstream log;
  ASSERT_EQ(run_train(cfg, log), 0);
  ASSERT_TRUE(fs::exists(cfg.out / "buffer.csv"));
  std::ostringstream out;
  EXPECT_EQ(inspect_buffer(cfg, cfg.out / "buffer.csv", out), 0);
  EXPECT_NE(out.str().find("segment"), std::string::npos);
}

TEST_F(TrainingTest, ReachRegionsShrinkAsBoundsAccumulate) {
  RunConfig cfg = small("reach.nx = 60\nreach.nv = 60\nreach.nt = 40\n");
  std::ostringstream log;
  ASSERT_EQ(run_reach(cfg, log), 0);
  const auto lines = read_lines(cfg.out / "volumes.csv");
  ASSERT_EQ(lines.size(), 4u);
  std::vector<double> v;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    v.push_back(std::stod(lines[i].substr(lines[i].find(',') + 1)));
  }
  EXPECT_GT(v[0], v[1]);
  EXPECT_GT(v[1], v[2]);
  EXPECT_TRUE(fs::exists(cfg.out / "reach.svg"));

  cfg.system = default_spec(SystemKind::kPendulum);
  EXPECT_THROW(run_reach(cfg, log), ConfigError);
}

TEST(AppTest, GuardedMapsErrorsToExitCodes) {
  std::ostringstream err;
  EXPECT_EQ(guarded([] { return 0; }, err), kExitOk);
  EXPECT_EQ(guarded([]() -> int { throw ConfigError("train.gamma", "bad"); },
                    err),
            kExitConfig);
  EXPECT_NE(err.str().find("train.gamma"), std::string::npos);
  EXPECT_EQ(guarded([]() -> int { throw NumericalError("nan"); }, err),
            kExitNumerical);
}

TEST(AppTest, GeneratedReferencesAreCyclic) {
  for (const auto& name : reference_generators()) {
    const ReferenceMotion m = generate_reference(name, 120);
    EXPECT_EQ(m.frame_count(), 120u) << name;
    EXPECT_GT(m.cycle_duration(), 0.0) << name;
  }
  EXPECT_THROW(generate_reference("moonwalk", 10), ConfigError);
}

}  // namespace
}  // namespace stb
