#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hmclq {

/// Uniform rectangular grid over the truncated position box [-L,L]^d, d <= 2.
/// Nodes are flattened row-major (axis 0 slowest). Trapezoid weights per node
/// double as the quadrature metric for all integrals on the grid.
class Grid {
public:
  Grid(int dim, std::vector<double> half_extent, std::vector<int> points)
      : dim_(dim), half_extent_(std::move(half_extent)), points_(std::move(points)) {
    if (dim_ < 1 || dim_ > 2) throw std::invalid_argument("Grid: dim must be 1 or 2");
    if (static_cast<int>(half_extent_.size()) != dim_ ||
        static_cast<int>(points_.size()) != dim_)
      throw std::invalid_argument("Grid: extent/points size mismatch with dim");
    for (int a = 0; a < dim_; ++a) {
      if (points_[a] < 16) throw std::invalid_argument("Grid: need at least 16 points per axis");
      if (!(half_extent_[a] > 0)) throw std::invalid_argument("Grid: extent must be positive");
    }
  }

  Grid(double half_extent, int points) : Grid(1, {half_extent}, {points}) {}

  int dim() const { return dim_; }
  int points(int axis) const { return points_[axis]; }
  double half_extent(int axis) const { return half_extent_[axis]; }
  double spacing(int axis) const {
    return 2.0 * half_extent_[axis] / (points_[axis] - 1);
  }
  double node(int axis, int i) const {
    return -half_extent_[axis] + i * spacing(axis);
  }

  std::size_t size() const {
    std::size_t n = 1;
    for (int a = 0; a < dim_; ++a) n *= static_cast<std::size_t>(points_[a]);
    return n;
  }

  /// Trapezoid quadrature weight of a single axis node.
  double axis_weight(int axis, int i) const {
    double w = spacing(axis);
    return (i == 0 || i == points_[axis] - 1) ? 0.5 * w : w;
  }

  /// Product trapezoid weight of a flattened node.
  double weight(std::size_t flat) const {
    double w = 1.0;
    for (int a = dim_ - 1; a >= 0; --a) {
      int i = static_cast<int>(flat % points_[a]);
      flat /= points_[a];
      w *= axis_weight(a, i);
    }
    return w;
  }

  std::vector<double> coords(std::size_t flat) const {
    std::vector<double> x(dim_);
    for (int a = dim_ - 1; a >= 0; --a) {
      int i = static_cast<int>(flat % points_[a]);
      flat /= points_[a];
      x[a] = node(a, i);
    }
    return x;
  }

  std::size_t flat_index(const std::vector<int>& idx) const {
    std::size_t f = 0;
    for (int a = 0; a < dim_; ++a) f = f * points_[a] + idx[a];
    return f;
  }

  bool contains(const std::vector<double>& x) const {
    for (int a = 0; a < dim_; ++a)
      if (std::abs(x[a]) > half_extent_[a]) return false;
    return true;
  }

  bool operator==(const Grid& o) const {
    return dim_ == o.dim_ && half_extent_ == o.half_extent_ && points_ == o.points_;
  }
  bool operator!=(const Grid& o) const { return !(*this == o); }

private:
  int dim_;
  std::vector<double> half_extent_;
  std::vector<int> points_;
};

/// Density sampled at the grid nodes. Values must be finite and, unless the
/// signed diagnostic path is explicitly requested, nonnegative.
class GridDensity {
public:
  GridDensity(Grid grid, std::vector<double> values, bool allow_signed = false)
      : grid_(std::move(grid)), values_(std::move(values)), signed_(allow_signed) {
    if (values_.size() != grid_.size())
      throw std::invalid_argument("GridDensity: value count does not match grid");
    for (double v : values_) {
      if (!std::isfinite(v)) throw std::invalid_argument("GridDensity: non-finite value");
      if (!signed_ && v < 0.0)
        throw std::invalid_argument("GridDensity: negative value in unsigned density");
    }
  }

  const Grid& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  bool is_signed() const { return signed_; }

  /// Trapezoid integral over the box.
  double integral() const {
    double s = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) s += grid_.weight(i) * values_[i];
    return s;
  }

private:
  Grid grid_;
  std::vector<double> values_;
  bool signed_;
};

namespace detail {

/// Multilinear interpolation of nodal values, zero outside the box.
inline double interpolate(const Grid& g, const std::vector<double>& values,
                          const double* x) {
  int lo[2];
  double frac[2];
  for (int a = 0; a < g.dim(); ++a) {
    double L = g.half_extent(a);
    if (x[a] < -L || x[a] > L) return 0.0;
    double u = (x[a] + L) / g.spacing(a);
    int i = static_cast<int>(u);
    if (i >= g.points(a) - 1) i = g.points(a) - 2;
    lo[a] = i;
    frac[a] = u - i;
  }
  if (g.dim() == 1) {
    std::size_t i = static_cast<std::size_t>(lo[0]);
    return values[i] * (1.0 - frac[0]) + values[i + 1] * frac[0];
  }
  const int n1 = g.points(1);
  std::size_t base = static_cast<std::size_t>(lo[0]) * n1 + lo[1];
  double v00 = values[base], v01 = values[base + 1];
  double v10 = values[base + n1], v11 = values[base + n1 + 1];
  double r0 = v00 * (1.0 - frac[1]) + v01 * frac[1];
  double r1 = v10 * (1.0 - frac[1]) + v11 * frac[1];
  return r0 * (1.0 - frac[0]) + r1 * frac[0];
}

} // namespace detail

/// Cell-averaged indicator of the box [a,b] (per axis), so the trapezoid
/// integral reproduces the true volume regardless of edge alignment.
inline GridDensity uniform_density(const Grid& g, const std::vector<double>& a,
                                   const std::vector<double>& b) {
  std::vector<double> v(g.size(), 1.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto x = g.coords(i);
    for (int ax = 0; ax < g.dim(); ++ax) {
      double h = g.spacing(ax);
      double lo = x[ax] - 0.5 * h, hi = x[ax] + 0.5 * h;
      double ov = std::min(hi, b[ax]) - std::max(lo, a[ax]);
      v[i] *= std::max(0.0, ov) / h;
    }
  }
  return GridDensity(g, std::move(v));
}

inline GridDensity uniform_density(const Grid& g, double a, double b) {
  return uniform_density(g, std::vector<double>{a}, std::vector<double>{b});
}

} // namespace hmclq
