/*
 *  Copyright 2026 The plaplab Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 */

#pragma once

// Uniform tensor grids over the space-time cylinder, nodal fields,
// central difference stencils and trapezoidal quadrature.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "plaplab/error.hpp"

namespace plaplab {

/// Spatial vector; components beyond the grid dimension are zero.
using Vec = std::array<double, 2>;
/// Spatial point.
using Point = std::array<double, 2>;
/// Spatial node multi-index; the second entry is 0 in one dimension.
using Node = std::array<int, 2>;

inline double dot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm_sq(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm_sq(a)); }

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  int cells = 8;

  double step() const { return (hi - lo) / cells; }
  double node(int i) const { return lo + i * step(); }
  double length() const { return hi - lo; }
};

/// Discretized cylinder (x_lo, x_hi)^n x (t_lo, t_hi) with n in {1, 2}.
class Grid {
 public:
  Grid() = default;

  Grid(int dim, std::array<Axis, 2> space, Axis time)
      : dim_(dim), space_(space), time_(time) {
    require(dim == 1 || dim == 2, ErrorKind::invalid_parameter,
            "grid dimension must be 1 or 2");
    if (dim == 1) space_[1] = Axis{0.0, 0.0, 0};
    for (int a = 0; a < dim; ++a) {
      require(space_[a].cells >= 8, ErrorKind::invalid_parameter,
              "grid needs at least 8 cells per spatial axis");
      require(space_[a].hi > space_[a].lo, ErrorKind::invalid_parameter,
              "spatial extent must be positive");
    }
    require(time_.cells >= 8, ErrorKind::invalid_parameter,
            "grid needs at least 8 time steps");
    require(time_.hi > time_.lo, ErrorKind::invalid_parameter,
            "time interval must be positive");
  }

  static Grid line(double x_lo, double x_hi, int nx, double t_lo, double t_hi, int nt) {
    return Grid(1, {Axis{x_lo, x_hi, nx}, Axis{}}, Axis{t_lo, t_hi, nt});
  }

  static Grid square(double x_lo, double x_hi, int nx, double y_lo, double y_hi, int ny,
                     double t_lo, double t_hi, int nt) {
    return Grid(2, {Axis{x_lo, x_hi, nx}, Axis{y_lo, y_hi, ny}}, Axis{t_lo, t_hi, nt});
  }

  int dim() const { return dim_; }
  const Axis& axis(int a) const { return space_[a]; }
  const Axis& time() const { return time_; }
  double h(int a) const { return space_[a].step(); }
  double tau() const { return time_.step(); }

  /// Node count along spatial axis a (1 for an absent axis).
  int nodes(int a) const { return a < dim_ ? space_[a].cells + 1 : 1; }
  int levels() const { return time_.cells + 1; }
  std::size_t spatial_size() const {
    return static_cast<std::size_t>(nodes(0)) * static_cast<std::size_t>(nodes(1));
  }
  std::size_t size() const { return spatial_size() * static_cast<std::size_t>(levels()); }

  std::size_t spatial_index(const Node& n) const {
    return static_cast<std::size_t>(n[0]) * static_cast<std::size_t>(nodes(1)) +
           static_cast<std::size_t>(n[1]);
  }
  std::size_t index(int level, const Node& n) const {
    return static_cast<std::size_t>(level) * spatial_size() + spatial_index(n);
  }
  Node node_of(std::size_t spatial) const {
    const auto n1 = static_cast<std::size_t>(nodes(1));
    return {static_cast<int>(spatial / n1), static_cast<int>(spatial % n1)};
  }

  Point point(const Node& n) const {
    return {space_[0].node(n[0]), dim_ == 2 ? space_[1].node(n[1]) : 0.0};
  }
  double t(int level) const { return time_.node(level); }

  /// True when the node lies at least `margin` cells away from every lateral side.
  bool interior(const Node& n, int margin = 1) const {
    for (int a = 0; a < dim_; ++a) {
      if (n[a] < margin || n[a] > space_[a].cells - margin) return false;
    }
    return true;
  }
  bool on_lateral_boundary(const Node& n) const { return !interior(n, 1); }

  double spatial_measure() const {
    double m = 1.0;
    for (int a = 0; a < dim_; ++a) m *= space_[a].length();
    return m;
  }
  double measure() const { return spatial_measure() * time_.length(); }

  /// Same extents with every cell count multiplied by `factor`.
  Grid refined(int factor) const {
    auto s = space_;
    for (int a = 0; a < dim_; ++a) s[a].cells *= factor;
    auto tm = time_;
    tm.cells *= factor;
    return Grid(dim_, s, tm);
  }

  bool same_shape(const Grid& o) const {
    if (dim_ != o.dim_ || time_.cells != o.time_.cells) return false;
    for (int a = 0; a < dim_; ++a)
      if (space_[a].cells != o.space_[a].cells) return false;
    return true;
  }

 private:
  int dim_ = 1;
  std::array<Axis, 2> space_{Axis{}, Axis{0.0, 0.0, 0}};
  Axis time_{};
};

/// Nodal values u(x, t) on every node of a grid, laid out [level][i0][i1].
struct SpaceTimeField {
  Grid grid;
  std::vector<double> values;

  SpaceTimeField() = default;
  explicit SpaceTimeField(const Grid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
  SpaceTimeField(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    require(values.size() == grid.size(), ErrorKind::shape_mismatch,
            "field value count does not match grid node count");
  }

  double& operator()(int level, const Node& n) { return values[grid.index(level, n)]; }
  double operator()(int level, const Node& n) const { return values[grid.index(level, n)]; }

  std::span<double> slice(int level) {
    return {values.data() + static_cast<std::size_t>(level) * grid.spatial_size(),
            grid.spatial_size()};
  }
  std::span<const double> slice(int level) const {
    return {values.data() + static_cast<std::size_t>(level) * grid.spatial_size(),
            grid.spatial_size()};
  }

  bool all_finite() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
  }
  double max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
};

template <class F>
SpaceTimeField sample(const Grid& g, F&& f) {
  SpaceTimeField out(g);
  for (int l = 0; l < g.levels(); ++l)
    for (std::size_t s = 0; s < g.spatial_size(); ++s) {
      const Node n = g.node_of(s);
      out.values[g.index(l, n)] = f(g.point(n), g.t(l));
    }
  return out;
}

inline void require_same_grid(const SpaceTimeField& a, const SpaceTimeField& b) {
  require(a.grid.same_shape(b.grid), ErrorKind::shape_mismatch, "fields live on different grids");
}

// ---------------------------------------------------------------------------
// Regions

struct IndexRange {
  int lo = 0;
  int hi = 0;  // inclusive
  int count() const { return hi - lo + 1; }
};

/// Axis-aligned sub-box of the node index space.
struct Region {
  std::array<IndexRange, 2> space{};
  IndexRange time{};

  bool contains(int level, const Node& n) const {
    return level >= time.lo && level <= time.hi && n[0] >= space[0].lo && n[0] <= space[0].hi &&
           n[1] >= space[1].lo && n[1] <= space[1].hi;
  }
  std::size_t size() const {
    return static_cast<std::size_t>(space[0].count()) * space[1].count() * time.count();
  }
};

inline void validate(const Grid& g, const Region& r, bool interior = false) {
  for (int a = 0; a < 2; ++a) {
    const int last = g.nodes(a) - 1;
    require(r.space[a].lo <= r.space[a].hi, ErrorKind::invalid_parameter, "empty region");
    require(r.space[a].lo >= 0 && r.space[a].hi <= last, ErrorKind::out_of_domain,
            "region exceeds the grid");
    if (interior && a < g.dim())
      require(r.space[a].lo > 0 && r.space[a].hi < last, ErrorKind::out_of_domain,
              "interior region touches the lateral boundary");
  }
  require(r.time.lo <= r.time.hi, ErrorKind::invalid_parameter, "empty region");
  require(r.time.lo >= 0 && r.time.hi < g.levels(), ErrorKind::out_of_domain,
          "region exceeds the time levels");
  if (interior)
    require(r.time.lo > 0 && r.time.hi < g.levels() - 1, ErrorKind::out_of_domain,
            "interior region touches the initial or final level");
}

inline Region full_region(const Grid& g) {
  return Region{{IndexRange{0, g.nodes(0) - 1}, IndexRange{0, g.nodes(1) - 1}},
                IndexRange{0, g.levels() - 1}};
}

/// Interior box leaving `space_margin` cells at every lateral side and
/// `time_margin` levels at both ends.
inline Region interior_region(const Grid& g, int space_margin = 2, int time_margin = 1) {
  Region r = full_region(g);
  for (int a = 0; a < g.dim(); ++a) {
    r.space[a].lo = space_margin;
    r.space[a].hi = g.axis(a).cells - space_margin;
  }
  r.time.lo = time_margin;
  r.time.hi = g.time().cells - time_margin;
  validate(g, r, space_margin > 0 && time_margin > 0);
  return r;
}

/// Region covering the nodes whose coordinates fall into the given box.
inline Region region_from_box(const Grid& g, std::array<std::array<double, 2>, 2> box,
                              std::array<double, 2> time_box) {
  auto to_range = [](const Axis& ax, double lo, double hi) {
    const double hstep = ax.step();
    int i0 = static_cast<int>(std::ceil((lo - ax.lo) / hstep - 1e-9));
    int i1 = static_cast<int>(std::floor((hi - ax.lo) / hstep + 1e-9));
    i0 = std::clamp(i0, 0, ax.cells);
    i1 = std::clamp(i1, 0, ax.cells);
    return IndexRange{i0, i1};
  };
  Region r = full_region(g);
  for (int a = 0; a < g.dim(); ++a) r.space[a] = to_range(g.axis(a), box[a][0], box[a][1]);
  r.time = to_range(g.time(), time_box[0], time_box[1]);
  validate(g, r);
  return r;
}

// ---------------------------------------------------------------------------
// Summation and quadrature

/// Pairwise (tree) summation with a fixed split order.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 16) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

namespace detail {

inline double trapezoid_weight(const IndexRange& r, int i, double h) {
  if (r.lo == r.hi) return 1.0;  // collapsed axis
  return (i == r.lo || i == r.hi) ? 0.5 * h : h;
}

}  // namespace detail

/// Tensor-product trapezoidal rule over `region`; `integrand(level, node)`
/// is sampled at every node of the region in [level][i0][i1] order.
template <class F>
double integrate(const Grid& g, const Region& region, F&& integrand) {
  std::vector<double> terms;
  terms.reserve(region.size());
  const IndexRange collapsed{0, 0};
  for (int l = region.time.lo; l <= region.time.hi; ++l) {
    const double wt = detail::trapezoid_weight(region.time, l, g.tau());
    for (int i = region.space[0].lo; i <= region.space[0].hi; ++i) {
      const double w0 = detail::trapezoid_weight(region.space[0], i, g.h(0));
      for (int j = region.space[1].lo; j <= region.space[1].hi; ++j) {
        const double w1 = g.dim() == 2 ? detail::trapezoid_weight(region.space[1], j, g.h(1))
                                       : detail::trapezoid_weight(collapsed, 0, 1.0);
        terms.push_back(wt * w0 * w1 * integrand(l, Node{i, j}));
      }
    }
  }
  return pairwise_sum(terms);
}

/// Spatial trapezoidal rule over the region's spatial box at one level.
template <class F>
double integrate_space(const Grid& g, const Region& region, int level, F&& integrand) {
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(region.space[0].count()) * region.space[1].count());
  for (int i = region.space[0].lo; i <= region.space[0].hi; ++i) {
    const double w0 = detail::trapezoid_weight(region.space[0], i, g.h(0));
    for (int j = region.space[1].lo; j <= region.space[1].hi; ++j) {
      const double w1 = g.dim() == 2 ? detail::trapezoid_weight(region.space[1], j, g.h(1)) : 1.0;
      terms.push_back(w0 * w1 * integrand(level, Node{i, j}));
    }
  }
  return pairwise_sum(terms);
}

/// Quadrature of samples stored region-locally in [level][i0][i1] order.
inline double spacetime_integral(const Grid& g, const Region& region,
                                 std::span<const double> samples) {
  validate(g, region);
  require(samples.size() == region.size(), ErrorKind::shape_mismatch,
          "integrand sample count does not match the region");
  const auto n0 = static_cast<std::size_t>(region.space[0].count());
  const auto n1 = static_cast<std::size_t>(region.space[1].count());
  return integrate(g, region, [&](int l, const Node& n) {
    const std::size_t k = (static_cast<std::size_t>(l - region.time.lo) * n0 +
                           static_cast<std::size_t>(n[0] - region.space[0].lo)) * n1 +
                          static_cast<std::size_t>(n[1] - region.space[1].lo);
    return samples[k];
  });
}

// ---------------------------------------------------------------------------
// Difference stencils

namespace detail {

inline Node shifted(Node n, int axis, int by) {
  n[axis] += by;
  return n;
}

/// Central gradient; caller guarantees the node is interior.
inline Vec central_gradient(std::span<const double> slice, const Grid& g, const Node& n) {
  Vec out{0.0, 0.0};
  for (int a = 0; a < g.dim(); ++a) {
    const double up = slice[g.spatial_index(shifted(n, a, 1))];
    const double dn = slice[g.spatial_index(shifted(n, a, -1))];
    out[a] = (up - dn) / (2.0 * g.h(a));
  }
  return out;
}

/// Central gradient at interior nodes, second-order one-sided at the sides.
inline Vec any_gradient(std::span<const double> slice, const Grid& g, const Node& n) {
  Vec out{0.0, 0.0};
  for (int a = 0; a < g.dim(); ++a) {
    const int last = g.axis(a).cells;
    const double h = g.h(a);
    auto v = [&](int by) { return slice[g.spatial_index(shifted(n, a, by))]; };
    if (n[a] == 0) {
      out[a] = (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * h);
    } else if (n[a] == last) {
      out[a] = (3.0 * v(0) - 4.0 * v(-1) + v(-2)) / (2.0 * h);
    } else {
      out[a] = (v(1) - v(-1)) / (2.0 * h);
    }
  }
  return out;
}

/// Second derivatives (u_xx, u_yy, u_xy) at an interior node.
inline std::array<double, 3> central_hessian(std::span<const double> slice, const Grid& g,
                                             const Node& n) {
  std::array<double, 3> d{0.0, 0.0, 0.0};
  const double c = slice[g.spatial_index(n)];
  for (int a = 0; a < g.dim(); ++a) {
    const double up = slice[g.spatial_index(shifted(n, a, 1))];
    const double dn = slice[g.spatial_index(shifted(n, a, -1))];
    d[a] = (up - 2.0 * c + dn) / (g.h(a) * g.h(a));
  }
  if (g.dim() == 2) {
    auto v = [&](int di, int dj) { return slice[g.spatial_index(Node{n[0] + di, n[1] + dj})]; };
    d[2] = (v(1, 1) - v(1, -1) - v(-1, 1) + v(-1, -1)) / (4.0 * g.h(0) * g.h(1));
  }
  return d;
}

inline double frobenius_sq(const std::array<double, 3>& d) {
  return d[0] * d[0] + d[1] * d[1] + 2.0 * d[2] * d[2];
}

inline void require_level(const Grid& g, int level) {
  require(level >= 0 && level < g.levels(), ErrorKind::out_of_domain, "time level out of range");
}

}  // namespace detail

/// Central second-order gradient at a strictly interior node.
inline Vec gradient(const SpaceTimeField& field, const Node& node, int level) {
  detail::require_level(field.grid, level);
  require(field.grid.interior(node, 1), ErrorKind::out_of_domain,
          "gradient requested at a boundary node");
  return detail::central_gradient(field.slice(level), field.grid, node);
}

/// Squared Frobenius norm of the discrete Hessian; mixed entries use the
/// four-point cross stencil and are counted twice.
inline double hessian_frobenius_sq(const SpaceTimeField& field, const Node& node, int level) {
  detail::require_level(field.grid, level);
  require(field.grid.interior(node, 1), ErrorKind::out_of_domain,
          "hessian requested without a one-cell margin");
  return detail::frobenius_sq(detail::central_hessian(field.slice(level), field.grid, node));
}

/// Gradient at every node (one-sided second order on the lateral sides).
inline std::vector<Vec> gradient_field(const SpaceTimeField& field) {
  const Grid& g = field.grid;
  std::vector<Vec> out(g.size());
  for (int l = 0; l < g.levels(); ++l) {
    auto slice = field.slice(l);
    for (std::size_t s = 0; s < g.spatial_size(); ++s)
      out[l * g.spatial_size() + s] = detail::any_gradient(slice, g, g.node_of(s));
  }
  return out;
}

/// Time difference quotient: centered at inner levels, second-order
/// one-sided at the first and last level.
inline SpaceTimeField time_derivative_field(const SpaceTimeField& field) {
  const Grid& g = field.grid;
  require(g.time().cells >= 2, ErrorKind::invalid_parameter, "need at least two time steps");
  SpaceTimeField out(g);
  const int last = g.levels() - 1;
  const double tau = g.tau();
  for (int l = 0; l <= last; ++l) {
    for (std::size_t s = 0; s < g.spatial_size(); ++s) {
      auto v = [&](int lev) { return field.values[lev * g.spatial_size() + s]; };
      double d;
      if (l == 0) {
        d = (4.0 * (v(1) - v(0)) - (v(2) - v(0))) / (2.0 * tau);
      } else if (l == last) {
        d = (4.0 * (v(last) - v(last - 1)) - (v(last) - v(last - 2))) / (2.0 * tau);
      } else {
        d = (v(l + 1) - v(l - 1)) / (2.0 * tau);
      }
      out.values[l * g.spatial_size() + s] = d;
    }
  }
  return out;
}

/// (integral of |f|^q over the region)^(1/q).
template <class F>
double lp_norm_of(const Grid& g, const Region& region, double q, F&& magnitude) {
  require(q >= 1.0, ErrorKind::invalid_exponent, "L^q norm needs q >= 1");
  const double integral = integrate(g, region, [&](int l, const Node& n) {
    return std::pow(std::abs(magnitude(l, n)), q);
  });
  return std::pow(integral, 1.0 / q);
}

inline double lp_norm(const SpaceTimeField& field, double q, const Region& region) {
  validate(field.grid, region);
  return lp_norm_of(field.grid, region, q,
                    [&](int l, const Node& n) { return field(l, n); });
}

/// L^q norm of |grad u| using the all-node gradient reconstruction.
inline double gradient_lp_norm(const SpaceTimeField& field, double q, const Region& region) {
  validate(field.grid, region);
  require(q >= 1.0, ErrorKind::invalid_exponent, "L^q norm needs q >= 1");
  const auto grad = gradient_field(field);
  const Grid& g = field.grid;
  return lp_norm_of(g, region, q, [&](int l, const Node& n) { return norm(grad[g.index(l, n)]); });
}

}  // namespace plaplab
