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

#ifndef STB_STYLE_HPP_
#define STB_STYLE_HPP_

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stb {

enum class StyleMode { kEnergyUp, kEnergyDown, kVolumeUp, kVolumeDown, kGram };

std::string_view to_string(StyleMode mode);
StyleMode style_mode_from_string(std::string_view s);

struct StyleConfig {
  StyleMode mode = StyleMode::kEnergyDown;
  double e_min = 20.0;   // J
  double e_max = 100.0;  // J
  double alpha = 0.12;   // volume (m^2/m^3) or Gram-distance scale
  // Regularizer: weights sum to 1, one scale per term.
  std::vector<double> reg_weights{0.5, 0.5};
  std::vector<double> reg_scales{1.0, 1.0};

  void validate() const;
  bool operator==(const StyleConfig&) const = default;
};

// Row-major time x channels matrix.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(std::size_t(r) * c, 0.0) {}
  bool operator==(const Matrix&) const = default;
  double& operator()(int r, int c) { return data[std::size_t(r) * cols + c]; }
  double operator()(int r, int c) const {
    return data[std::size_t(r) * cols + c];
  }
};

using Vec3 = std::array<double, 3>;

// Sum of 1/2 m |v - v_frame|^2 with an explicit reference-frame velocity.
double kinematic_energy(std::span<const double> masses,
                        std::span<const Vec3> velocities,
                        const Vec3& frame_velocity);
// Same, in the frame moving with the mass-weighted mean velocity.
double kinematic_energy(std::span<const double> masses,
                        std::span<const Vec3> velocities);

double energy_reward(double energy, const StyleConfig& cfg);

// Hull area of 2D points and hull volume of 3D points. Degenerate
// (collinear/coplanar) hulls measure zero.
double convex_hull_area(std::span<const std::array<double, 2>> points);
double convex_hull_volume(std::span<const Vec3> points);

double volume_reward(double volume, const StyleConfig& cfg);

// G = F^T F / T.
Matrix gram_matrix(const Matrix& features);

// exp(-||G_s - G||_F / alpha). Throws on shape mismatch.
double gram_style_reward(const Matrix& target, const Matrix& gram,
                         double alpha);

// exp(-sum_i w_i a_i / beta_i).
double regularization_reward(std::span<const double> magnitudes,
                             const StyleConfig& cfg);

inline double style_total(double style, double regularizer) {
  return style * regularizer;
}

Matrix load_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Matrix& m);

}  // namespace stb

#endif  // STB_STYLE_HPP_
