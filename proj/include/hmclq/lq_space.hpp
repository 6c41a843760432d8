#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hmclq/densities.hpp"
#include "hmclq/grid.hpp"

namespace hmclq {

/// Conjugate exponents q, p > 1 with q + p = q*p.
struct ExponentPair {
  double q;
  double p;

  explicit ExponentPair(double q_) : q(q_), p(q_ / (q_ - 1.0)) {
    if (!(q > 1.0)) throw std::invalid_argument("ExponentPair: q must exceed 1");
  }

  double conjugacy_defect() const { return std::abs(q + p - q * p); }
};

/// Discretized weighted L^q machinery over the truncated box: the norm
/// ||h||_q^q = int |h/f|^q f, the pairing <a,b> = int a b / f, the conjugacy
/// map h* = h (|h|/f)^(q-2) and the fixed-ray coefficient alpha = int h/int f,
/// all under the grid trapezoid rule. Nodes where f underflows the floor are
/// excluded from likelihood quotients; a nonzero density value there is a
/// domain error.
class WeightedSpace {
public:
  static constexpr double f_floor = 1e-300;

  WeightedSpace(Grid grid, const TargetDensity& target)
      : grid_(std::move(grid)), fvals_(grid_.size()), wts_(grid_.size()) {
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      fvals_[i] = target.f(grid_.coords(i));
      wts_[i] = grid_.weight(i);
    }
  }

  const Grid& grid() const { return grid_; }
  const std::vector<double>& f_values() const { return fvals_; }
  const std::vector<double>& weights() const { return wts_; }

  double integral(const GridDensity& h) const {
    check_grid(h);
    double s = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) s += wts_[i] * h[i];
    return s;
  }

  double integral_f() const {
    double s = 0.0;
    for (std::size_t i = 0; i < fvals_.size(); ++i) s += wts_[i] * fvals_[i];
    return s;
  }

  double norm(const GridDensity& h, const ExponentPair& e) const {
    check_grid(h);
    double s = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      double r = ratio(h[i], i);
      if (r == 0.0) continue;
      s += wts_[i] * std::pow(std::abs(r), e.q) * fvals_[i];
    }
    return std::pow(s, 1.0 / e.q);
  }

  double pairing(const GridDensity& a, const GridDensity& b) const {
    check_grid(a);
    if (a.grid() != b.grid())
      throw std::invalid_argument("pairing: densities on different grids");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0.0 || b[i] == 0.0) continue;
      if (fvals_[i] < f_floor)
        throw std::domain_error("pairing: nonzero density where f is below floor");
      s += wts_[i] * a[i] * b[i] / fvals_[i];
    }
    return s;
  }

  /// h* = h (|h|/f)^(q-2), computed as sign(h) |h|^(q-1) f^(2-q) so that
  /// zeros of h stay zeros for every q > 1.
  GridDensity conjugate(const GridDensity& h, const ExponentPair& e) const {
    check_grid(h);
    std::vector<double> v(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
      double hi = h[i];
      if (hi == 0.0) {
        v[i] = 0.0;
        continue;
      }
      if (fvals_[i] < f_floor)
        throw std::domain_error("conjugate: nonzero density where f is below floor");
      double mag = std::pow(std::abs(hi), e.q - 1.0) * std::pow(fvals_[i], 2.0 - e.q);
      v[i] = hi < 0.0 ? -mag : mag;
    }
    return GridDensity(h.grid(), std::move(v), h.is_signed());
  }

  double alpha(const GridDensity& h) const { return integral(h) / integral_f(); }

  GridDensity f_density() const {
    return GridDensity(grid_, fvals_);
  }

private:
  double ratio(double hv, std::size_t i) const {
    if (hv == 0.0) return 0.0;
    if (fvals_[i] < f_floor)
      throw std::domain_error("norm: nonzero density where f is below floor");
    return hv / fvals_[i];
  }

  void check_grid(const GridDensity& h) const {
    if (h.grid() != grid_)
      throw std::invalid_argument("WeightedSpace: density grid mismatch");
  }

  Grid grid_;
  std::vector<double> fvals_;
  std::vector<double> wts_;
};

inline double lq_norm(const GridDensity& h, const TargetDensity& f, const ExponentPair& e) {
  return WeightedSpace(h.grid(), f).norm(h, e);
}

inline double pairing(const GridDensity& a, const GridDensity& b, const TargetDensity& f) {
  return WeightedSpace(a.grid(), f).pairing(a, b);
}

inline GridDensity conjugate(const GridDensity& h, const TargetDensity& f,
                             const ExponentPair& e) {
  return WeightedSpace(h.grid(), f).conjugate(h, e);
}

inline double alpha(const GridDensity& h, const TargetDensity& f) {
  return WeightedSpace(h.grid(), f).alpha(h);
}

} // namespace hmclq
