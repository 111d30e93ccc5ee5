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

#ifndef STB_FEASIBLE_HPP_
#define STB_FEASIBLE_HPP_

#include <cstdint>
#include <vector>

namespace stb {

// Discretized (x, v, t) spacetime of the 1D double integrator. Cell (i, j)
// covers [x_i, x_i+1) x [v_j, v_j+1); step k sits at t = k * t_end / nt.
struct GridSpec {
  double x_lo = -6.0;
  double x_hi = 6.0;
  double v_lo = -6.0;
  double v_hi = 6.0;
  int nx = 240;
  int nv = 240;
  int nt = 250;
  double t_end = 5.0;

  void validate() const;
  double dx() const { return (x_hi - x_lo) / nx; }
  double dv() const { return (v_hi - v_lo) / nv; }
  double dt() const { return t_end / nt; }
  int x_index(double x) const;
  int v_index(double v) const;
  double x_center(int i) const { return x_lo + (i + 0.5) * dx(); }
  double v_center(int j) const { return v_lo + (j + 0.5) * dv(); }
  // Nearest step to time t; throws when t lies outside [0, t_end].
  int step_of(double t) const;
  GridSpec refined(int factor) const;

  bool operator==(const GridSpec&) const = default;
};

// A box {x in [x_lo, x_hi], v in [v_lo, v_hi]} at one time; point events are
// degenerate boxes.
struct ToyBound {
  double x_lo = 0.0;
  double x_hi = 0.0;
  double v_lo = 0.0;
  double v_hi = 0.0;
  double t = 0.0;

  static ToyBound point(double x, double v, double t) {
    return {x, x, v, v, t};
  }
  static ToyBound box(double x_lo, double x_hi, double v_lo, double v_hi,
                      double t) {
    return {x_lo, x_hi, v_lo, v_hi, t};
  }
  void validate(const GridSpec& grid) const;
};

// Per-step boolean occupancy, bit-packed.
class ReachGrid {
 public:
  explicit ReachGrid(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  int steps() const { return spec_.nt + 1; }
  bool at(int k, int i, int j) const;
  void set(int k, int i, int j);
  std::size_t count(int k) const;
  std::size_t count() const;
  bool empty_at(int k) const { return count(k) == 0; }

  friend ReachGrid feasible_region(const ReachGrid& fwd, const ReachGrid& bwd);

 private:
  std::size_t bit(int i, int j) const;

  GridSpec spec_;
  std::size_t words_per_step_ = 0;
  std::vector<std::uint64_t> words_;
};

struct Vec2 {
  double x = 0.0;
  double v = 0.0;
};

// Convex set in (x, v), vertices counter-clockwise; one or two vertices for
// degenerate sets, none when empty.
using ConvexPolygon = std::vector<Vec2>;

ConvexPolygon convex_hull(std::vector<Vec2> points);

// Exact reachable sets per step under the zero-order-hold double integrator
// update x' = x + v dt + a dt^2 / 2, v' = v + a dt with |a| <= a_max,
// intersected with the grid window and every bound active at that step.
std::vector<ConvexPolygon> forward_sets(const GridSpec& grid, double a_max,
                                        const ToyBound& start,
                                        const std::vector<ToyBound>& bounds);
std::vector<ConvexPolygon> backward_sets(const GridSpec& grid, double a_max,
                                         const ToyBound& end,
                                         const std::vector<ToyBound>& bounds);

// Marks every cell that intersects the step's set.
ReachGrid rasterize(const GridSpec& grid,
                    const std::vector<ConvexPolygon>& sets);

ReachGrid forward_reach(const GridSpec& grid, double a_max,
                        const ToyBound& start,
                        const std::vector<ToyBound>& bounds);
ReachGrid backward_reach(const GridSpec& grid, double a_max,
                         const ToyBound& end,
                         const std::vector<ToyBound>& bounds);

// Cellwise intersection; throws std::invalid_argument on grid mismatch.
ReachGrid feasible_region(const ReachGrid& fwd, const ReachGrid& bwd);

// Fraction of marked cells over all steps.
double region_volume(const ReachGrid& region);

// The rest-to-rest toy problem: e1 = (0, 0, 0), e2 = (0, 0, 5), and the two
// intermediate boxes at T/3 and 2T/3.
struct ToyProblem {
  ToyBound e1 = ToyBound::point(0.0, 0.0, 0.0);
  ToyBound e2 = ToyBound::point(0.0, 0.0, 5.0);
  ToyBound b1 = ToyBound::box(0.5, 2.5, -1.0, 1.0, 5.0 / 3.0);
  ToyBound b2 = ToyBound::box(-2.5, -0.5, -1.0, 1.0, 10.0 / 3.0);
  double a_max = 2.0;
};

// Feasible region for e1 -> e2 under the extra bounds.
ReachGrid toy_feasible_region(const GridSpec& grid, const ToyProblem& toy,
                              const std::vector<ToyBound>& extra);

// Cells inside a box bound at its step, and how many of them are marked.
struct BoxOccupancy {
  std::size_t box_cells = 0;
  std::size_t marked = 0;
};
BoxOccupancy box_occupancy(const ReachGrid& region, const ToyBound& box);

}  // namespace stb

#endif  // STB_FEASIBLE_HPP_
