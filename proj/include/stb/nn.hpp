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

#ifndef STB_NN_HPP_
#define STB_NN_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace stb {

using Rng = std::mt19937_64;

// Independent, reproducible stream for (seed, a, b).
Rng make_stream(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0);

// Dense network: rectifier on hidden layers, identity output. Parameters of
// all layers live in one flat vector (per layer: row-major weights, then
// biases) so optimizers and checkpoints can treat them uniformly.
class Mlp {
 public:
  Mlp() = default;
  // Zero-initialized parameters.
  explicit Mlp(std::vector<int> layer_sizes);

  // Weights uniform in +-1/sqrt(fan_in), zero biases, output layer weights
  // additionally scaled by output_scale.
  static Mlp initialized(std::vector<int> layer_sizes, Rng& rng,
                         double output_scale = 0.01);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int layers() const { return static_cast<int>(sizes_.size()) - 1; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  std::size_t weight_offset(int layer) const { return offsets_[layer]; }
  std::size_t bias_offset(int layer) const {
    return offsets_[layer] +
           static_cast<std::size_t>(sizes_[layer]) * sizes_[layer + 1];
  }

  bool operator==(const Mlp&) const = default;

 private:
  std::vector<int> sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

// Post-activation values of every layer, input first.
struct MlpTape {
  std::vector<std::vector<double>> activations;
};

// Throws std::invalid_argument on input dimension mismatch.
std::vector<double> forward(const Mlp& net, std::span<const double> input,
                            MlpTape* tape = nullptr);

// Adds d(output . upstream)/d(params) into grad (same length as params).
void accumulate_gradients(const Mlp& net, const MlpTape& tape,
                          std::span<const double> upstream,
                          std::span<double> grad);

std::vector<double> gradients(const Mlp& net, std::span<const double> input,
                              std::span<const double> upstream);

struct AdamState {
  AdamState() = default;
  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected adaptive-moment step (descent on grads).
void adam_update(std::span<double> params, std::span<const double> grads,
                 AdamState& state, double lr);

// State-independent diagonal Gaussian around a network mean.
struct GaussianHead {
  std::vector<double> log_std;

  bool operator==(const GaussianHead&) const = default;
};

double gaussian_log_prob(const GaussianHead& head,
                         std::span<const double> mean,
                         std::span<const double> action);

// Named flat tensors, stored as text with hex-float values so a reload is
// bit-exact:
//
//   stbound-checkpoint,1
//   <name>,<count>,<v0>,<v1>,...
//
// One line per tensor, names sorted.
struct Checkpoint {
  static constexpr int kVersion = 1;
  std::map<std::string, std::vector<double>> tensors;

  const std::vector<double>& at(const std::string& name) const;
  void write(const std::filesystem::path& path) const;
  static Checkpoint read(const std::filesystem::path& path);
};

}  // namespace stb

#endif  // STB_NN_HPP_
