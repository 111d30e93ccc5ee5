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

#include "stb/nn.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace stb {

Rng make_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a),
                    static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b),
                    static_cast<std::uint32_t>(b >> 32)};
  return Rng(seq);
}

Mlp::Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) {
    throw std::invalid_argument("mlp needs at least input and output sizes");
  }
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] <= 0 || sizes_[l + 1] <= 0) {
      throw std::invalid_argument("mlp layer sizes must be positive");
    }
    offsets_.push_back(offset);
    offset += static_cast<std::size_t>(sizes_[l]) * sizes_[l + 1] +
              static_cast<std::size_t>(sizes_[l + 1]);
  }
  params_.assign(offset, 0.0);
}

Mlp Mlp::initialized(std::vector<int> layer_sizes, Rng& rng,
                     double output_scale) {
  Mlp net(std::move(layer_sizes));
  for (int l = 0; l < net.layers(); ++l) {
    const int fan_in = net.sizes_[l];
    const double limit = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-limit, limit);
    const double scale = (l + 1 == net.layers()) ? output_scale : 1.0;
    const std::size_t w0 = net.weight_offset(l);
    const std::size_t count =
        static_cast<std::size_t>(fan_in) * net.sizes_[l + 1];
    for (std::size_t i = 0; i < count; ++i) {
      net.params_[w0 + i] = scale * dist(rng);
    }
  }
  return net;
}

std::vector<double> forward(const Mlp& net, std::span<const double> input,
                            MlpTape* tape) {
  if (static_cast<int>(input.size()) != net.input_size()) {
    throw std::invalid_argument("mlp input has " +
                                std::to_string(input.size()) +
                                " entries, expected " +
                                std::to_string(net.input_size()));
  }
  const auto& sizes = net.layer_sizes();
  const auto& p = net.params();
  std::vector<double> x(input.begin(), input.end());
  if (tape) {
    tape->activations.clear();
    tape->activations.push_back(x);
  }
  for (int l = 0; l < net.layers(); ++l) {
    const int in = sizes[l];
    const int out = sizes[l + 1];
    const double* w = p.data() + net.weight_offset(l);
    const double* b = p.data() + net.bias_offset(l);
    std::vector<double> y(out);
    const bool hidden = l + 1 < net.layers();
    for (int r = 0; r < out; ++r) {
      double acc = b[r];
      const double* row = w + static_cast<std::size_t>(r) * in;
      for (int c = 0; c < in; ++c) acc += row[c] * x[c];
      y[r] = hidden ? std::max(acc, 0.0) : acc;
    }
    x = std::move(y);
    if (tape) tape->activations.push_back(x);
  }
  return x;
}

void accumulate_gradients(const Mlp& net, const MlpTape& tape,
                          std::span<const double> upstream,
                          std::span<double> grad) {
  if (static_cast<int>(upstream.size()) != net.output_size() ||
      grad.size() != net.params().size() ||
      static_cast<int>(tape.activations.size()) != net.layers() + 1) {
    throw std::invalid_argument("gradient shapes do not match the network");
  }
  const auto& sizes = net.layer_sizes();
  const auto& p = net.params();
  std::vector<double> delta(upstream.begin(), upstream.end());
  for (int l = net.layers() - 1; l >= 0; --l) {
    const int in = sizes[l];
    const int out = sizes[l + 1];
    const std::vector<double>& x = tape.activations[l];
    const double* w = p.data() + net.weight_offset(l);
    double* gw = grad.data() + net.weight_offset(l);
    double* gb = grad.data() + net.bias_offset(l);
    std::vector<double> back(l > 0 ? in : 0, 0.0);
    for (int r = 0; r < out; ++r) {
      const double d = delta[r];
      if (d == 0.0) continue;
      gb[r] += d;
      double* grow = gw + static_cast<std::size_t>(r) * in;
      const double* wrow = w + static_cast<std::size_t>(r) * in;
      for (int c = 0; c < in; ++c) grow[c] += d * x[c];
      if (l > 0) {
        for (int c = 0; c < in; ++c) back[c] += d * wrow[c];
      }
    }
    if (l > 0) {
      // Rectifier gate of the layer below.
      for (int c = 0; c < in; ++c) {
        if (!(x[c] > 0.0)) back[c] = 0.0;
      }
      delta = std::move(back);
    }
  }
}

std::vector<double> gradients(const Mlp& net, std::span<const double> input,
                              std::span<const double> upstream) {
  MlpTape tape;
  forward(net, input, &tape);
  std::vector<double> grad(net.params().size(), 0.0);
  accumulate_gradients(net, tape, upstream, grad);
  return grad;
}

void adam_update(std::span<double> params, std::span<const double> grads,
                 AdamState& st, double lr) {
  if (lr < 0.0) throw std::invalid_argument("learning rate must be >= 0");
  if (grads.size() != params.size() || st.m.size() != params.size() ||
      st.v.size() != params.size()) {
    throw std::invalid_argument("adam shapes do not match");
  }
  ++st.step;
  const double c1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    st.m[i] = st.beta1 * st.m[i] + (1.0 - st.beta1) * grads[i];
    st.v[i] = st.beta2 * st.v[i] + (1.0 - st.beta2) * grads[i] * grads[i];
    const double mhat = st.m[i] / c1;
    const double vhat = st.v[i] / c2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + st.eps);
  }
}

double gaussian_log_prob(const GaussianHead& head,
                         std::span<const double> mean,
                         std::span<const double> action) {
  if (mean.size() != action.size() || head.log_std.size() != mean.size()) {
    throw std::invalid_argument("gaussian_log_prob: dimension mismatch");
  }
  const double half_log_two_pi = 0.5 * std::log(2.0 * std::numbers::pi);
  double lp = 0.0;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    const double z = (action[i] - mean[i]) * std::exp(-head.log_std[i]);
    lp += -0.5 * z * z - head.log_std[i] - half_log_two_pi;
  }
  return lp;
}

const std::vector<double>& Checkpoint::at(const std::string& name) const {
  const auto it = tensors.find(name);
  if (it == tensors.end()) {
    throw std::invalid_argument("checkpoint lacks tensor '" + name + "'");
  }
  return it->second;
}

void Checkpoint::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "stbound-checkpoint," << kVersion << '\n';
  char buf[64];
  for (const auto& [name, values] : tensors) {
    out << name << ',' << values.size();
    for (double v : values) {
      std::snprintf(buf, sizeof buf, "%a", v);
      out << ',' << buf;
    }
    out << '\n';
  }
}

Checkpoint Checkpoint::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open checkpoint '" + path.string() +
                                "'");
  }
  std::string line;
  std::getline(in, line);
  if (line != "stbound-checkpoint," + std::to_string(kVersion)) {
    throw std::invalid_argument("unsupported checkpoint header '" + line +
                                "'");
  }
  Checkpoint ck;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string name;
    std::string cell;
    std::getline(ss, name, ',');
    std::getline(ss, cell, ',');
    const std::size_t count = std::stoul(cell);
    std::vector<double> values;
    values.reserve(count);
    while (std::getline(ss, cell, ',')) {
      values.push_back(std::strtod(cell.c_str(), nullptr));
    }
    if (values.size() != count) {
      throw std::invalid_argument("checkpoint tensor '" + name +
                                  "' is truncated");
    }
    ck.tensors[name] = std::move(values);
  }
  return ck;
}

}  // namespace stb
