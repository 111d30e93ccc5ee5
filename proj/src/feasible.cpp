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

#include "stb/feasible.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace stb {
namespace {

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x - o.x) * (b.v - o.v) - (a.v - o.v) * (b.x - o.x);
}

// Keeps the part of `poly` where axis-coordinate `keep_ge ? >= : <=` c.
// Crossing points are snapped onto the clip line.
ConvexPolygon clip_axis(const ConvexPolygon& poly, bool along_x, double c,
                        bool keep_ge) {
  if (poly.empty()) return poly;
  auto coord = [&](const Vec2& p) { return along_x ? p.x : p.v; };
  auto inside = [&](const Vec2& p) {
    return keep_ge ? coord(p) >= c : coord(p) <= c;
  };
  ConvexPolygon out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& cur = poly[i];
    const Vec2& nxt = poly[(i + 1) % n];
    const bool cin = inside(cur);
    const bool nin = inside(nxt);
    if (cin) out.push_back(cur);
    if (cin != nin) {
      const double s = (c - coord(cur)) / (coord(nxt) - coord(cur));
      Vec2 p{cur.x + s * (nxt.x - cur.x), cur.v + s * (nxt.v - cur.v)};
      if (along_x) {
        p.x = c;
      } else {
        p.v = c;
      }
      out.push_back(p);
    }
  }
  return out;
}

ConvexPolygon clip_box(const ConvexPolygon& poly, double x_lo, double x_hi,
                       double v_lo, double v_hi) {
  ConvexPolygon p = clip_axis(poly, true, x_lo, true);
  p = clip_axis(p, true, x_hi, false);
  p = clip_axis(p, false, v_lo, true);
  p = clip_axis(p, false, v_hi, false);
  return convex_hull(std::move(p));
}

ConvexPolygon clip_bounds_at(const GridSpec& grid, ConvexPolygon poly, int k,
                             const std::vector<ToyBound>& bounds) {
  poly = clip_box(poly, grid.x_lo, grid.x_hi, grid.v_lo, grid.v_hi);
  for (const auto& b : bounds) {
    if (poly.empty()) break;
    if (grid.step_of(b.t) == k) {
      poly = clip_box(poly, b.x_lo, b.x_hi, b.v_lo, b.v_hi);
    }
  }
  return poly;
}

ConvexPolygon box_polygon(const ToyBound& b) {
  return convex_hull({{b.x_lo, b.v_lo},
                      {b.x_hi, b.v_lo},
                      {b.x_hi, b.v_hi},
                      {b.x_lo, b.v_hi}});
}

}  // namespace

void GridSpec::validate() const {
  if (!(x_hi > x_lo) || !(v_hi > v_lo)) {
    throw std::invalid_argument("grid ranges must be nonempty");
  }
  if (nx < 2 || nv < 2 || nt < 2) {
    throw std::invalid_argument("grid needs at least 2 cells per axis");
  }
  if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
}

int GridSpec::x_index(double x) const {
  const int i =
      static_cast<int>(std::floor((x - x_lo) * nx / (x_hi - x_lo)));
  return std::clamp(i, 0, nx - 1);
}

int GridSpec::v_index(double v) const {
  const int j =
      static_cast<int>(std::floor((v - v_lo) * nv / (v_hi - v_lo)));
  return std::clamp(j, 0, nv - 1);
}

int GridSpec::step_of(double t) const {
  if (t < -1e-12 || t > t_end + 1e-12) {
    throw std::invalid_argument("bound time outside [0, t_end]");
  }
  return static_cast<int>(std::lround(t / dt()));
}

GridSpec GridSpec::refined(int factor) const {
  GridSpec g = *this;
  g.nx *= factor;
  g.nv *= factor;
  g.nt *= factor;
  return g;
}

void ToyBound::validate(const GridSpec& grid) const {
  if (!(x_lo <= x_hi) || !(v_lo <= v_hi)) {
    throw std::invalid_argument("toy bound box is inverted");
  }
  if (t < 0.0 || t > grid.t_end + 1e-12) {
    throw std::invalid_argument("toy bound time outside [0, t_end]");
  }
}

ReachGrid::ReachGrid(const GridSpec& spec) : spec_(spec) {
  spec_.validate();
  const std::size_t cells =
      static_cast<std::size_t>(spec_.nx) * static_cast<std::size_t>(spec_.nv);
  words_per_step_ = (cells + 63) / 64;
  words_.assign(words_per_step_ * static_cast<std::size_t>(steps()), 0);
}

std::size_t ReachGrid::bit(int i, int j) const {
  return static_cast<std::size_t>(i) * static_cast<std::size_t>(spec_.nv) +
         static_cast<std::size_t>(j);
}

bool ReachGrid::at(int k, int i, int j) const {
  const std::size_t b = bit(i, j);
  return (words_[words_per_step_ * k + b / 64] >> (b % 64)) & 1u;
}

void ReachGrid::set(int k, int i, int j) {
  const std::size_t b = bit(i, j);
  words_[words_per_step_ * k + b / 64] |= std::uint64_t{1} << (b % 64);
}

std::size_t ReachGrid::count(int k) const {
  std::size_t n = 0;
  for (std::size_t w = 0; w < words_per_step_; ++w) {
    n += std::popcount(words_[words_per_step_ * k + w]);
  }
  return n;
}

std::size_t ReachGrid::count() const {
  std::size_t n = 0;
  for (auto w : words_) n += std::popcount(w);
  return n;
}

ConvexPolygon convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x < b.x || (a.x == b.x && a.v < b.v);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec2& a, const Vec2& b) {
                          return a.x == b.x && a.v == b.v;
                        }),
            pts.end());
  if (pts.size() <= 2) return pts;
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

std::vector<ConvexPolygon> forward_sets(const GridSpec& grid, double a_max,
                                        const ToyBound& start,
                                        const std::vector<ToyBound>& bounds) {
  grid.validate();
  start.validate(grid);
  if (grid.step_of(start.t) != 0) {
    throw std::invalid_argument("forward reach must start at t=0");
  }
  if (a_max < 0.0) throw std::invalid_argument("a_max must be >= 0");
  for (const auto& b : bounds) b.validate(grid);
  const double dt = grid.dt();
  const Vec2 input{0.5 * dt * dt * a_max, dt * a_max};

  std::vector<ConvexPolygon> sets(grid.nt + 1);
  sets[0] = clip_bounds_at(grid, box_polygon(start), 0, bounds);
  if (sets[0].empty()) {
    throw std::invalid_argument("start set is empty inside the grid");
  }
  for (int k = 1; k <= grid.nt; ++k) {
    const ConvexPolygon& prev = sets[k - 1];
    if (prev.empty()) break;
    std::vector<Vec2> pts;
    pts.reserve(prev.size() * 2);
    for (const auto& p : prev) {
      const Vec2 moved{p.x + p.v * dt, p.v};
      pts.push_back({moved.x - input.x, moved.v - input.v});
      pts.push_back({moved.x + input.x, moved.v + input.v});
    }
    sets[k] = clip_bounds_at(grid, convex_hull(std::move(pts)), k, bounds);
  }
  return sets;
}

std::vector<ConvexPolygon> backward_sets(const GridSpec& grid, double a_max,
                                         const ToyBound& end,
                                         const std::vector<ToyBound>& bounds) {
  grid.validate();
  end.validate(grid);
  if (grid.step_of(end.t) != grid.nt) {
    throw std::invalid_argument("backward reach must end at t_end");
  }
  if (a_max < 0.0) throw std::invalid_argument("a_max must be >= 0");
  for (const auto& b : bounds) b.validate(grid);
  const double dt = grid.dt();
  const Vec2 input{0.5 * dt * dt * a_max, dt * a_max};

  std::vector<ConvexPolygon> sets(grid.nt + 1);
  sets[grid.nt] = clip_bounds_at(grid, box_polygon(end), grid.nt, bounds);
  if (sets[grid.nt].empty()) {
    throw std::invalid_argument("end set is empty inside the grid");
  }
  for (int k = grid.nt - 1; k >= 0; --k) {
    const ConvexPolygon& next = sets[k + 1];
    if (next.empty()) break;
    std::vector<Vec2> pts;
    pts.reserve(next.size() * 2);
    for (const auto& p : next) {
      for (double sign : {-1.0, 1.0}) {
        const Vec2 shifted{p.x - sign * input.x, p.v - sign * input.v};
        pts.push_back({shifted.x - shifted.v * dt, shifted.v});
      }
    }
    sets[k] = clip_bounds_at(grid, convex_hull(std::move(pts)), k, bounds);
  }
  return sets;
}

// Marks every cell whose closed extent meets the polygon. Polygon and cell
// edges that coincide up to rounding count as touching, so states on the
// boundary of a reachable set stay marked. A single point marks only its
// containing cell.
ReachGrid rasterize(const GridSpec& grid,
                    const std::vector<ConvexPolygon>& sets) {
  ReachGrid out(grid);
  const double dv = grid.dv();
  const double ex = 1e-9 * grid.dx();
  const double ev = 1e-9 * dv;
  for (int k = 0; k <= grid.nt && k < static_cast<int>(sets.size()); ++k) {
    const ConvexPolygon& poly = sets[k];
    if (poly.empty()) continue;
    if (poly.size() == 1) {
      out.set(k, grid.x_index(poly[0].x), grid.v_index(poly[0].v));
      continue;
    }
    double vmin = poly.front().v;
    double vmax = vmin;
    for (const auto& p : poly) {
      vmin = std::min(vmin, p.v);
      vmax = std::max(vmax, p.v);
    }
    const int j0 = grid.v_index(vmin - ev);
    const int j1 = grid.v_index(vmax + ev);
    const std::size_t n = poly.size();
    for (int j = j0; j <= j1; ++j) {
      const double a = std::max(grid.v_lo + j * dv - ev, vmin);
      const double b = std::min(grid.v_lo + (j + 1) * dv + ev, vmax);
      if (a > b) continue;
      double xmin = INFINITY;
      double xmax = -INFINITY;
      for (std::size_t e = 0; e < n; ++e) {
        const Vec2& p = poly[e];
        const Vec2& q = poly[(e + 1) % n];
        if (p.v >= a && p.v <= b) {
          xmin = std::min(xmin, p.x);
          xmax = std::max(xmax, p.x);
        }
        if (p.v == q.v) continue;
        for (double level : {a, b}) {
          if ((p.v - level) * (q.v - level) < 0.0) {
            const double s = (level - p.v) / (q.v - p.v);
            const double x = p.x + s * (q.x - p.x);
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
          }
        }
      }
      if (xmin > xmax) continue;
      const int i0 = grid.x_index(xmin - ex);
      const int i1 = grid.x_index(xmax + ex);
      for (int i = i0; i <= i1; ++i) out.set(k, i, j);
    }
  }
  return out;
}

ReachGrid forward_reach(const GridSpec& grid, double a_max,
                        const ToyBound& start,
                        const std::vector<ToyBound>& bounds) {
  return rasterize(grid, forward_sets(grid, a_max, start, bounds));
}

ReachGrid backward_reach(const GridSpec& grid, double a_max,
                         const ToyBound& end,
                         const std::vector<ToyBound>& bounds) {
  return rasterize(grid, backward_sets(grid, a_max, end, bounds));
}

ReachGrid feasible_region(const ReachGrid& fwd, const ReachGrid& bwd) {
  if (!(fwd.spec() == bwd.spec())) {
    throw std::invalid_argument("feasible_region: grid shape mismatch");
  }
  ReachGrid out(fwd.spec());
  for (std::size_t w = 0; w < out.words_.size(); ++w) {
    out.words_[w] = fwd.words_[w] & bwd.words_[w];
  }
  return out;
}

double region_volume(const ReachGrid& region) {
  const GridSpec& g = region.spec();
  const double total = static_cast<double>(g.nx) * g.nv * (g.nt + 1);
  return static_cast<double>(region.count()) / total;
}

ReachGrid toy_feasible_region(const GridSpec& grid, const ToyProblem& toy,
                              const std::vector<ToyBound>& extra) {
  std::vector<ToyBound> fwd_bounds = extra;
  fwd_bounds.push_back(toy.e2);
  std::vector<ToyBound> bwd_bounds = extra;
  bwd_bounds.push_back(toy.e1);
  return feasible_region(forward_reach(grid, toy.a_max, toy.e1, fwd_bounds),
                         backward_reach(grid, toy.a_max, toy.e2, bwd_bounds));
}

BoxOccupancy box_occupancy(const ReachGrid& region, const ToyBound& box) {
  const GridSpec& g = region.spec();
  const int k = g.step_of(box.t);
  BoxOccupancy occ;
  for (int i = 0; i < g.nx; ++i) {
    const double x = g.x_center(i);
    if (x < box.x_lo || x > box.x_hi) continue;
    for (int j = 0; j < g.nv; ++j) {
      const double v = g.v_center(j);
      if (v < box.v_lo || v > box.v_hi) continue;
      ++occ.box_cells;
      if (region.at(k, i, j)) ++occ.marked;
    }
  }
  return occ;
}

}  // namespace stb
