#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace hmclq {

/// One-dimensional quadrature rule: sum_j weights[j] * phi(nodes[j])
/// approximates an integral whose meaning is fixed by the producer
/// (plain Lebesgue or against a probability weight).
struct Quadrature1D {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
  double max_abs_node() const {
    double m = 0.0;
    for (double x : nodes) m = std::max(m, std::abs(x));
    return m;
  }
};

/// Gauss-Hermite rule for the weight exp(-x^2) on the real line,
/// by Golub-Welsch on the Jacobi matrix of the Hermite recurrence.
inline Quadrature1D gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: n must be positive");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    double b = std::sqrt(0.5 * k);
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const double sqrt_pi = std::sqrt(M_PI);
  Quadrature1D q;
  q.nodes.resize(n);
  q.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    q.nodes[k] = es.eigenvalues()(k);
    double v = es.eigenvectors()(0, k);
    q.weights[k] = sqrt_pi * v * v;
  }
  return q;
}

/// Gauss-Hermite transformed to expectations against the standard normal:
/// sum w_j phi(p_j) ~ E_{p~N(0,1)} phi(p). Weights sum to 1.
inline Quadrature1D gauss_hermite_normal(int n) {
  Quadrature1D gh = gauss_hermite(n);
  const double inv_sqrt_pi = 1.0 / std::sqrt(M_PI);
  for (int k = 0; k < n; ++k) {
    gh.nodes[k] *= std::sqrt(2.0);
    gh.weights[k] *= inv_sqrt_pi;
  }
  return gh;
}

/// Plain trapezoid rule on [-L, L] with n nodes.
inline Quadrature1D trapezoid_rule(double L, int n) {
  if (n < 2) throw std::invalid_argument("trapezoid_rule: n must be >= 2");
  Quadrature1D q;
  q.nodes.resize(n);
  q.weights.resize(n);
  double h = 2.0 * L / (n - 1);
  for (int i = 0; i < n; ++i) {
    q.nodes[i] = -L + i * h;
    q.weights[i] = (i == 0 || i == n - 1) ? 0.5 * h : h;
  }
  return q;
}

} // namespace hmclq
