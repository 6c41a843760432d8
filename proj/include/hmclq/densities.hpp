#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmclq/grid.hpp"
#include "hmclq/quadrature.hpp"

namespace hmclq {

/// Unnormalized target density f >= 0 on the truncated box [-L,L]^d,
/// strictly positive in the interior. Gradient of -log f is analytic for
/// the built-ins; absent gradients fall back to central differences.
struct TargetDensity {
  std::string name;
  int dim = 1;
  double half_extent = 8.0;
  std::function<double(const std::vector<double>&)> log_f;
  std::function<std::vector<double>(const std::vector<double>&)> grad_neg_log;
  bool standard_gaussian = false;

  double f(const std::vector<double>& q) const { return std::exp(log_f(q)); }

  std::vector<double> potential_gradient(const std::vector<double>& q) const {
    if (grad_neg_log) return grad_neg_log(q);
    // central difference of -log f, step 1e-5
    std::vector<double> g(q.size()), x = q;
    const double h = 1e-5;
    for (std::size_t a = 0; a < q.size(); ++a) {
      x[a] = q[a] + h;
      double up = -log_f(x);
      x[a] = q[a] - h;
      double dn = -log_f(x);
      x[a] = q[a];
      g[a] = (up - dn) / (2.0 * h);
    }
    return g;
  }

  Grid default_grid(int points_per_axis) const {
    return Grid(dim, std::vector<double>(dim, half_extent),
                std::vector<int>(dim, points_per_axis));
  }

  /// f sampled at the grid nodes.
  GridDensity on_grid(const Grid& g) const {
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = f(g.coords(i));
    return GridDensity(g, std::move(v));
  }
};

/// Normalized auxiliary density g > 0 on momentum space, product form across
/// axes. Carries its own per-axis quadrature (expectations against g) and a
/// per-axis sampler for the particle algorithms.
struct MomentumDensity {
  std::string name;
  int dim = 1;
  bool even = false;
  bool standard_gaussian = false;
  std::function<double(double)> log_g1;  // per-axis marginal, normalized
  std::function<double(double)> dneg_log_g1;  // d/dp of -log g1
  Quadrature1D quad;  // sum wphi(p) ~ integral of phi g1
  std::function<double(std::mt19937_64&)> sample1;

  double log_g(const std::vector<double>& p) const {
    double s = 0.0;
    for (double pa : p) s += log_g1(pa);
    return s;
  }
  double g(const std::vector<double>& p) const { return std::exp(log_g(p)); }

  std::vector<double> kinetic_gradient(const std::vector<double>& p) const {
    std::vector<double> g(p.size());
    for (std::size_t a = 0; a < p.size(); ++a) g[a] = dneg_log_g1(p[a]);
    return g;
  }

  std::vector<double> sample(std::mt19937_64& rng) const {
    std::vector<double> p(dim);
    for (int a = 0; a < dim; ++a) p[a] = sample1(rng);
    return p;
  }
};

// ---- built-in targets -------------------------------------------------

inline TargetDensity gaussian_target(int dim = 1) {
  TargetDensity t;
  t.name = dim == 1 ? "gaussian-1d" : "gaussian-2d";
  t.dim = dim;
  t.half_extent = 8.0;
  t.standard_gaussian = true;
  t.log_f = [](const std::vector<double>& q) {
    double s = 0.0;
    for (double qa : q) s -= 0.5 * qa * qa;
    return s;
  };
  t.grad_neg_log = [](const std::vector<double>& q) { return q; };
  return t;
}

/// f(q) = exp(-(q^2-1)^2), bimodal with wells at q = +-1.
inline TargetDensity double_well_target() {
  TargetDensity t;
  t.name = "double-well-1d";
  t.dim = 1;
  t.half_extent = 3.0;
  t.log_f = [](const std::vector<double>& q) {
    double u = q[0] * q[0] - 1.0;
    return -u * u;
  };
  t.grad_neg_log = [](const std::vector<double>& q) {
    return std::vector<double>{4.0 * q[0] * (q[0] * q[0] - 1.0)};
  };
  return t;
}

/// Asymmetric two-component Gaussian mixture.
inline TargetDensity gaussian_mixture_target() {
  TargetDensity t;
  t.name = "gaussian-mixture-1d";
  t.dim = 1;
  t.half_extent = 8.0;
  constexpr double w1 = 0.6, m1 = 1.0, s1 = 1.0;
  constexpr double w2 = 0.4, m2 = -1.5, s2 = 0.5;
  auto dens = [=](double q) {
    double a = (q - m1) / s1, b = (q - m2) / s2;
    return w1 / s1 * std::exp(-0.5 * a * a) + w2 / s2 * std::exp(-0.5 * b * b);
  };
  t.log_f = [=](const std::vector<double>& q) { return std::log(dens(q[0])); };
  t.grad_neg_log = [=](const std::vector<double>& q) {
    double a = (q[0] - m1) / s1, b = (q[0] - m2) / s2;
    double c1 = w1 / s1 * std::exp(-0.5 * a * a), c2 = w2 / s2 * std::exp(-0.5 * b * b);
    double dp = -c1 * a / s1 - c2 * b / s2;
    return std::vector<double>{-dp / (c1 + c2)};
  };
  return t;
}

// ---- built-in momentum densities --------------------------------------

inline MomentumDensity gaussian_momentum(int dim = 1, int quad_nodes = 129) {
  MomentumDensity m;
  m.name = "gaussian";
  m.dim = dim;
  m.even = true;
  m.standard_gaussian = true;
  const double c = -0.5 * std::log(2.0 * M_PI);
  m.log_g1 = [c](double p) { return c - 0.5 * p * p; };
  m.dneg_log_g1 = [](double p) { return p; };
  m.quad = gauss_hermite_normal(quad_nodes);
  m.sample1 = [](std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    return n(rng);
  };
  return m;
}

/// Student-t marginal, nu = 7: even, heavier tails than Gaussian.
inline MomentumDensity student_momentum(int dim = 1, int quad_nodes = 801) {
  MomentumDensity m;
  m.name = "student-7";
  m.dim = dim;
  m.even = true;
  constexpr double nu = 7.0;
  const double logC = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                      0.5 * std::log(nu * M_PI);
  m.log_g1 = [=](double p) {
    return logC - 0.5 * (nu + 1.0) * std::log1p(p * p / nu);
  };
  m.dneg_log_g1 = [=](double p) { return (nu + 1.0) * p / (nu + p * p); };
  const double box = 40.0;
  Quadrature1D tr = trapezoid_rule(box, quad_nodes);
  for (std::size_t j = 0; j < tr.size(); ++j)
    tr.weights[j] *= std::exp(m.log_g1(tr.nodes[j]));
  m.quad = std::move(tr);
  m.sample1 = [](std::mt19937_64& rng) {
    std::student_t_distribution<double> t(nu);
    return t(rng);
  };
  return m;
}

/// Deliberately non-even mixture; breaks T = T-adjoint and forces the
/// S = T-adjoint o T route in the diagnostics.
inline MomentumDensity skewed_momentum(int dim = 1, int quad_nodes = 601) {
  MomentumDensity m;
  m.name = "skewed-mixture";
  m.dim = dim;
  m.even = false;
  constexpr double w1 = 0.7, m1 = 0.5, s1 = 1.0;
  constexpr double w2 = 0.3, m2 = -1.2, s2 = 0.8;
  const double norm = 1.0 / std::sqrt(2.0 * M_PI);
  auto dens = [=](double p) {
    double a = (p - m1) / s1, b = (p - m2) / s2;
    return norm * (w1 / s1 * std::exp(-0.5 * a * a) + w2 / s2 * std::exp(-0.5 * b * b));
  };
  m.log_g1 = [=](double p) { return std::log(dens(p)); };
  m.dneg_log_g1 = [=](double p) {
    double a = (p - m1) / s1, b = (p - m2) / s2;
    double c1 = w1 / s1 * std::exp(-0.5 * a * a), c2 = w2 / s2 * std::exp(-0.5 * b * b);
    return (c1 * a / s1 + c2 * b / s2) / (c1 + c2);
  };
  const double box = 12.0;
  Quadrature1D tr = trapezoid_rule(box, quad_nodes);
  for (std::size_t j = 0; j < tr.size(); ++j)
    tr.weights[j] *= dens(tr.nodes[j]);
  m.quad = std::move(tr);
  m.sample1 = [=](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> n(0.0, 1.0);
    return u(rng) < w1 ? m1 + s1 * n(rng) : m2 + s2 * n(rng);
  };
  return m;
}

} // namespace hmclq
