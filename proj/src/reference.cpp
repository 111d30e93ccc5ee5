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

#include "stb/reference.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace stb {

Phase::Phase(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::invalid_argument("phase must lie in [0, 1]");
  }
}

ReferenceMotion::ReferenceMotion(std::vector<std::string> channels,
                                 std::vector<double> times,
                                 std::vector<std::vector<double>> frames,
                                 bool cyclic, double cycle_duration)
    : channels_(std::move(channels)),
      times_(std::move(times)),
      frames_(std::move(frames)),
      cyclic_(cyclic) {
  if (times_.empty()) throw std::invalid_argument("reference has no frames");
  if (times_.size() != frames_.size()) {
    throw std::invalid_argument("reference times/frames size mismatch");
  }
  if (times_.front() != 0.0) {
    throw std::invalid_argument("first reference frame must be at t=0");
  }
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (!(times_[i] > times_[i - 1])) {
      throw std::invalid_argument("reference frame times must increase");
    }
  }
  for (const auto& frame : frames_) {
    if (frame.size() != channels_.size()) {
      throw std::invalid_argument("reference frame has wrong channel count");
    }
  }
  const double last = times_.back();
  if (cycle_duration <= 0.0) {
    cycle_duration =
        (cyclic_ && times_.size() > 1)
            ? last + last / static_cast<double>(times_.size() - 1)
            : last;
  }
  if (cycle_duration < last || (cyclic_ && times_.size() > 1 &&
                                cycle_duration <= last)) {
    throw std::invalid_argument("cycle duration shorter than the frames");
  }
  cycle_duration_ = cycle_duration;
}

int ReferenceMotion::channel_index(std::string_view name) const {
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    if (channels_[i] == name) return static_cast<int>(i);
  }
  return -1;
}

Phase phase_of(const ReferenceMotion& motion, double t) {
  const double period = motion.cycle_duration();
  if (!(period > 0.0)) {
    throw std::invalid_argument("phase undefined for zero cycle duration");
  }
  if (t < 0.0) throw std::invalid_argument("phase_of needs t >= 0");
  if (motion.cyclic()) {
    const double p = std::fmod(t, period) / period;
    return Phase(std::clamp(p, 0.0, 1.0));
  }
  return Phase(std::min(t / period, 1.0));
}

std::vector<double> interpolate(const ReferenceMotion& motion, Phase phase) {
  const auto& times = motion.times();
  const auto& frames = motion.frames();
  if (times.size() == 1) return frames.front();
  const double t = phase.value() * motion.cycle_duration();

  const auto upper = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t i = static_cast<std::size_t>(upper - times.begin()) - 1;

  std::size_t j = i + 1;
  double t0 = times[i];
  double t1 = 0.0;
  if (j < times.size()) {
    t1 = times[j];
  } else if (motion.cyclic()) {
    j = 0;
    t1 = motion.cycle_duration();
  } else {
    return frames.back();
  }
  const double s = (t - t0) / (t1 - t0);
  if (s <= 0.0) return frames[i];
  std::vector<double> out(frames[i].size());
  for (std::size_t c = 0; c < out.size(); ++c) {
    out[c] = frames[i][c] + s * (frames[j][c] - frames[i][c]);
  }
  return out;
}

std::vector<int> resolve_channels(const ReferenceMotion& motion,
                                  std::span<const std::string> names) {
  std::vector<int> out;
  out.reserve(names.size());
  for (const auto& name : names) {
    const int idx = motion.channel_index(name);
    if (idx < 0) {
      throw std::invalid_argument("reference lacks channel '" + name + "'");
    }
    out.push_back(idx);
  }
  return out;
}

std::vector<double> ffc_action(const ReferenceMotion& motion,
                               std::span<const int> action_channels,
                               Phase phase) {
  const std::vector<double> values = interpolate(motion, phase);
  std::vector<double> out;
  out.reserve(action_channels.size());
  for (int idx : action_channels) out.push_back(values.at(idx));
  return out;
}

ReferenceMotion load_reference_csv(const std::filesystem::path& path,
                                   bool cyclic, double cycle_duration) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open reference '" + path.string() +
                                "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("reference file is empty");
  }
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cell.erase(0, cell.find_first_not_of(" \t\r"));
      cell.erase(cell.find_last_not_of(" \t\r") + 1);
      header.push_back(cell);
    }
  }
  if (header.empty() || header.front() != "t") {
    throw std::invalid_argument("reference header must start with 't'");
  }
  std::vector<std::string> channels(header.begin() + 1, header.end());
  std::vector<double> times;
  std::vector<std::vector<double>> frames;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::invalid_argument("reference line " +
                                    std::to_string(line_no) +
                                    ": bad number '" + cell + "'");
      }
    }
    if (row.size() != header.size()) {
      throw std::invalid_argument("reference line " + std::to_string(line_no) +
                                  ": wrong column count");
    }
    times.push_back(row.front());
    frames.emplace_back(row.begin() + 1, row.end());
  }
  return ReferenceMotion(std::move(channels), std::move(times),
                         std::move(frames), cyclic, cycle_duration);
}

void write_reference_csv(const std::filesystem::path& path,
                         const ReferenceMotion& motion) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write '" + path.string() + "'");
  }
  out << "t";
  for (const auto& c : motion.channels()) out << ',' << c;
  out << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < motion.frame_count(); ++i) {
    out << motion.times()[i];
    for (double v : motion.frames()[i]) out << ',' << v;
    out << '\n';
  }
}

ReferenceTrack::ReferenceTrack(SystemSpec spec, ReferenceMotion motion)
    : spec_(std::move(spec)), motion_(std::move(motion)) {
  const auto coords = coordinate_names(spec_.kind);
  coord_channels_ = resolve_channels(motion_, coords);
  for (const auto& name : velocity_names(spec_.kind)) {
    vel_channels_.push_back(motion_.channel_index(name));
  }
}

double ReferenceTrack::local_time(double t) const {
  if (!motion_.cyclic()) return t;
  return std::fmod(t, motion_.cycle_duration());
}

double ReferenceTrack::horizon() const {
  return motion_.cyclic() ? std::numeric_limits<double>::infinity()
                          : motion_.cycle_duration();
}

SystemState ReferenceTrack::state_at(double t) const {
  const std::vector<double> values = interpolate(motion_, phase_of(motion_, t));
  SystemState s;
  s.t = t;
  for (int idx : coord_channels_) s.q.push_back(values[idx]);
  bool need_diff = false;
  for (int idx : vel_channels_) need_diff |= idx < 0;
  std::vector<double> diff;
  if (need_diff) {
    const double h = 1e-4 * motion_.cycle_duration();
    const double lo = motion_.cyclic() ? t - h : std::max(0.0, t - h);
    const double hi = t + h;
    auto at = [&](double tt) {
      if (motion_.cyclic() && tt < 0.0) tt += motion_.cycle_duration();
      return interpolate(motion_, phase_of(motion_, tt));
    };
    const auto a = at(lo);
    const auto b = at(hi);
    for (int idx : coord_channels_) {
      diff.push_back((b[idx] - a[idx]) / (hi - lo));
    }
  }
  for (std::size_t i = 0; i < vel_channels_.size(); ++i) {
    s.qdot.push_back(vel_channels_[i] >= 0 ? values[vel_channels_[i]]
                                           : diff[i]);
  }
  return s;
}

}  // namespace stb
