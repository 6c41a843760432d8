#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmclq/densities.hpp"

namespace hmclq {

struct PhasePoint {
  std::vector<double> q;
  std::vector<double> p;

  PhasePoint() = default;
  PhasePoint(std::vector<double> q_, std::vector<double> p_)
      : q(std::move(q_)), p(std::move(p_)) {
    if (q.size() != p.size() || q.empty())
      throw std::invalid_argument("PhasePoint: q and p must have equal dimension >= 1");
  }
  PhasePoint(double q1, double p1) : q{q1}, p{p1} {}

  int dim() const { return static_cast<int>(q.size()); }
  bool finite() const {
    for (double v : q) if (!std::isfinite(v)) return false;
    for (double v : p) if (!std::isfinite(v)) return false;
    return true;
  }
};

struct FlowDivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Energy -log(f(q) g(p)) of the separable Hamiltonian.
struct HamiltonianEnergy {
  TargetDensity target;
  MomentumDensity momentum;

  double operator()(const PhasePoint& x) const {
    return -target.log_f(x.q) - momentum.log_g(x.p);
  }
};

enum class FlowKind { ExactGaussianRotation, Leapfrog };

/// Invertible Hamiltonian motion H on phase space: either the closed-form
/// rotation for standard Gaussian f and g, or leapfrog for arbitrary smooth
/// log-densities (exactly reversible, volume preserving, energy preserved
/// only to O(step^2)).
class PhaseFlow {
public:
  PhaseFlow(FlowKind kind, double time, HamiltonianEnergy energy, int step_count = 0)
      : kind_(kind), time_(time), steps_(step_count), energy_(std::move(energy)) {
    if (!(time_ > 0)) throw std::invalid_argument("PhaseFlow: time must be positive");
    if (kind_ == FlowKind::Leapfrog && steps_ < 1)
      throw std::invalid_argument("PhaseFlow: leapfrog needs a positive step count");
    if (kind_ == FlowKind::ExactGaussianRotation &&
        (!energy_.target.standard_gaussian || !energy_.momentum.standard_gaussian))
      throw std::invalid_argument(
          "PhaseFlow: exact rotation requires standard Gaussian target and momentum");
  }

  FlowKind kind() const { return kind_; }
  double time() const { return time_; }
  int step_count() const { return steps_; }
  const HamiltonianEnergy& energy() const { return energy_; }
  double step_size() const { return steps_ > 0 ? time_ / steps_ : 0.0; }

  PhasePoint apply(const PhasePoint& x) const { return run(x, false); }
  PhasePoint apply_inverse(const PhasePoint& x) const { return run(x, true); }

private:
  PhasePoint run(PhasePoint x, bool inverse) const {
    if (kind_ == FlowKind::ExactGaussianRotation) {
      double c = std::cos(time_), s = std::sin(time_);
      if (inverse) s = -s;
      for (int a = 0; a < x.dim(); ++a) {
        double Q = c * x.q[a] + s * x.p[a];
        double P = -s * x.q[a] + c * x.p[a];
        x.q[a] = Q;
        x.p[a] = P;
      }
    } else {
      const double eps = inverse ? -step_size() : step_size();
      for (int k = 0; k < steps_; ++k) {
        half_kick(x, eps);
        drift(x, eps);
        half_kick(x, eps);
      }
    }
    if (!x.finite())
      throw FlowDivergenceError("PhaseFlow: non-finite coordinates (step too large?)");
    return x;
  }

  void half_kick(PhasePoint& x, double eps) const {
    auto gU = energy_.target.potential_gradient(x.q);
    for (int a = 0; a < x.dim(); ++a) x.p[a] -= 0.5 * eps * gU[a];
  }
  void drift(PhasePoint& x, double eps) const {
    auto gK = energy_.momentum.kinetic_gradient(x.p);
    for (int a = 0; a < x.dim(); ++a) x.q[a] += eps * gK[a];
  }

  FlowKind kind_;
  double time_;
  int steps_;
  HamiltonianEnergy energy_;
};

/// sigma(q,p) = (q,-p). Involution; for even g it conjugates H to its inverse.
inline PhasePoint momentum_flip(PhasePoint x) {
  for (double& v : x.p) v = -v;
  return x;
}

struct EnergyInvarianceReport {
  double max_deviation = 0.0;
  std::size_t samples = 0;
};

inline EnergyInvarianceReport check_energy_invariance(const PhaseFlow& flow,
                                                      const std::vector<PhasePoint>& samples) {
  EnergyInvarianceReport r;
  r.samples = samples.size();
  const auto& E = flow.energy();
  for (const auto& x : samples) {
    double d = std::abs(E(flow.apply(x)) - E(x));
    r.max_deviation = std::max(r.max_deviation, d);
  }
  return r;
}

} // namespace hmclq
