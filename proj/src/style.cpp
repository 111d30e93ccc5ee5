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

#include "stb/style.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace stb {
namespace {

using Point2 = std::array<double, 2>;

double cross2(const Point2& o, const Point2& a, const Point2& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

Vec3 sub(const Vec3& a, const Vec3& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
Vec3 cross3(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}
double dot3(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
double norm3(const Vec3& a) { return std::sqrt(dot3(a, a)); }

}  // namespace

std::string_view to_string(StyleMode mode) {
  switch (mode) {
    case StyleMode::kEnergyUp:
      return "energy_up";
    case StyleMode::kEnergyDown:
      return "energy_down";
    case StyleMode::kVolumeUp:
      return "volume_up";
    case StyleMode::kVolumeDown:
      return "volume_down";
    case StyleMode::kGram:
      return "gram";
  }
  return "?";
}

StyleMode style_mode_from_string(std::string_view s) {
  if (s == "energy_up") return StyleMode::kEnergyUp;
  if (s == "energy_down") return StyleMode::kEnergyDown;
  if (s == "volume_up") return StyleMode::kVolumeUp;
  if (s == "volume_down") return StyleMode::kVolumeDown;
  if (s == "gram") return StyleMode::kGram;
  throw std::invalid_argument("unknown style mode '" + std::string(s) + "'");
}

void StyleConfig::validate() const {
  if (!(e_min < e_max)) throw std::invalid_argument("need e_min < e_max");
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  if (reg_weights.size() != reg_scales.size() || reg_weights.empty()) {
    throw std::invalid_argument("regularizer weights/scales size mismatch");
  }
  double sum = 0.0;
  for (double w : reg_weights) sum += w;
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("regularizer weights must sum to 1");
  }
  for (double b : reg_scales) {
    if (!(b > 0.0)) throw std::invalid_argument("regularizer scales > 0");
  }
}

double kinematic_energy(std::span<const double> masses,
                        std::span<const Vec3> velocities,
                        const Vec3& frame_velocity) {
  if (masses.size() != velocities.size()) {
    throw std::invalid_argument("kinematic_energy: size mismatch");
  }
  double e = 0.0;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    const Vec3 rel = sub(velocities[i], frame_velocity);
    e += 0.5 * masses[i] * dot3(rel, rel);
  }
  return e;
}

double kinematic_energy(std::span<const double> masses,
                        std::span<const Vec3> velocities) {
  if (masses.size() != velocities.size()) {
    throw std::invalid_argument("kinematic_energy: size mismatch");
  }
  Vec3 com{0.0, 0.0, 0.0};
  double total = 0.0;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    if (!(masses[i] > 0.0)) {
      throw std::invalid_argument("kinematic_energy: masses must be > 0");
    }
    total += masses[i];
    for (int d = 0; d < 3; ++d) com[d] += masses[i] * velocities[i][d];
  }
  if (total > 0.0) {
    for (double& c : com) c /= total;
  }
  return kinematic_energy(masses, velocities, com);
}

double energy_reward(double energy, const StyleConfig& cfg) {
  const double range = cfg.e_max - cfg.e_min;
  switch (cfg.mode) {
    case StyleMode::kEnergyDown:
      return std::clamp((cfg.e_max - energy) / range, 0.0, 1.0);
    case StyleMode::kEnergyUp:
      return std::clamp((energy - cfg.e_min) / range, 0.0, 1.0);
    default:
      throw std::invalid_argument("energy_reward needs an energy mode");
  }
}

double convex_hull_area(std::span<const Point2> points) {
  std::vector<Point2> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return 0.0;
  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross2(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    twice += a[0] * b[1] - b[0] * a[1];
  }
  return 0.5 * std::abs(twice);
}

// Incremental hull over a canonically sorted copy of the points.
double convex_hull_volume(std::span<const Vec3> points) {
  std::vector<Vec3> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 4) return 0.0;

  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, norm3(sub(p, pts[0])));
  if (scale == 0.0) return 0.0;
  const double eps = 1e-12 * scale;

  // Initial simplex.
  std::size_t i1 = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (norm3(sub(pts[i], pts[0])) > norm3(sub(pts[i1], pts[0]))) i1 = i;
  }
  const Vec3 axis = sub(pts[i1], pts[0]);
  std::size_t i2 = 0;
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = norm3(cross3(axis, sub(pts[i], pts[0]))) / norm3(axis);
    if (d > best) {
      best = d;
      i2 = i;
    }
  }
  if (best <= eps) return 0.0;  // collinear
  const Vec3 normal = cross3(axis, sub(pts[i2], pts[0]));
  std::size_t i3 = 0;
  best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = std::abs(dot3(normal, sub(pts[i], pts[0]))) /
                     norm3(normal);
    if (d > best) {
      best = d;
      i3 = i;
    }
  }
  if (best <= eps) return 0.0;  // coplanar

  struct Face {
    std::size_t a, b, c;
    Vec3 n;
    double offset;
  };
  Vec3 inner{0.0, 0.0, 0.0};
  for (std::size_t id : {std::size_t{0}, i1, i2, i3}) {
    for (int d = 0; d < 3; ++d) inner[d] += 0.25 * pts[id][d];
  }
  auto make_face = [&](std::size_t a, std::size_t b, std::size_t c) {
    Vec3 n = cross3(sub(pts[b], pts[a]), sub(pts[c], pts[a]));
    if (dot3(n, sub(inner, pts[a])) > 0.0) {
      std::swap(b, c);
      n = {-n[0], -n[1], -n[2]};
    }
    const double len = norm3(n);
    for (double& x : n) x /= len;
    return Face{a, b, c, n, dot3(n, pts[a])};
  };
  std::vector<Face> faces{make_face(0, i1, i2), make_face(0, i1, i3),
                          make_face(0, i2, i3), make_face(i1, i2, i3)};

  for (std::size_t p = 0; p < pts.size(); ++p) {
    if (p == 0 || p == i1 || p == i2 || p == i3) continue;
    std::vector<char> visible(faces.size(), 0);
    bool any = false;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (dot3(faces[f].n, pts[p]) - faces[f].offset > eps) {
        visible[f] = 1;
        any = true;
      }
    }
    if (!any) continue;
    std::set<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (!visible[f]) continue;
      const Face& fc = faces[f];
      edges.insert({fc.a, fc.b});
      edges.insert({fc.b, fc.c});
      edges.insert({fc.c, fc.a});
    }
    std::vector<Face> next;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (!visible[f]) next.push_back(faces[f]);
    }
    for (const auto& [a, b] : edges) {
      if (edges.count({b, a})) continue;  // interior to the visible patch
      next.push_back(make_face(a, b, p));
    }
    faces = std::move(next);
  }

  double vol = 0.0;
  for (const auto& f : faces) {
    vol += dot3(pts[f.a], cross3(pts[f.b], pts[f.c]));
  }
  return std::abs(vol) / 6.0;
}

double volume_reward(double volume, const StyleConfig& cfg) {
  const double decay = std::exp(-volume / cfg.alpha);
  switch (cfg.mode) {
    case StyleMode::kVolumeDown:
      return decay;
    case StyleMode::kVolumeUp:
      return 1.0 - decay;
    default:
      throw std::invalid_argument("volume_reward needs a volume mode");
  }
}

Matrix gram_matrix(const Matrix& f) {
  if (f.rows <= 0) throw std::invalid_argument("gram_matrix: empty window");
  Matrix g(f.cols, f.cols);
  for (int a = 0; a < f.cols; ++a) {
    for (int b = a; b < f.cols; ++b) {
      double s = 0.0;
      for (int t = 0; t < f.rows; ++t) s += f(t, a) * f(t, b);
      g(a, b) = s / f.rows;
      g(b, a) = g(a, b);
    }
  }
  return g;
}

double gram_style_reward(const Matrix& target, const Matrix& gram,
                         double alpha) {
  if (target.rows != gram.rows || target.cols != gram.cols) {
    throw std::invalid_argument("gram_style_reward: shape mismatch");
  }
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  double sq = 0.0;
  for (std::size_t i = 0; i < gram.data.size(); ++i) {
    const double d = target.data[i] - gram.data[i];
    sq += d * d;
  }
  return std::exp(-std::sqrt(sq) / alpha);
}

double regularization_reward(std::span<const double> magnitudes,
                             const StyleConfig& cfg) {
  if (magnitudes.size() != cfg.reg_weights.size()) {
    throw std::invalid_argument("regularizer expects " +
                                std::to_string(cfg.reg_weights.size()) +
                                " terms");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < magnitudes.size(); ++i) {
    s += cfg.reg_weights[i] * magnitudes[i] / cfg.reg_scales[i];
  }
  return std::exp(-s);
}

Matrix load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open matrix '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("matrix file is empty");
  Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (int r = 0; r < m.rows; ++r) {
    if (static_cast<int>(rows[r].size()) != m.cols) {
      throw std::invalid_argument("matrix rows differ in length");
    }
    for (int c = 0; c < m.cols; ++c) m(r, c) = rows[r][c];
  }
  return m;
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << std::setprecision(17);
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) out << (c ? "," : "") << m(r, c);
    out << '\n';
  }
}

}  // namespace stb
