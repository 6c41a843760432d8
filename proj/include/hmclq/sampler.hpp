#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "hmclq/grid.hpp"
#include "hmclq/phase_flow.hpp"

namespace hmclq {

/// Positions of an ensemble of HMC particles, flattened row-major
/// (particle-major). Seed and generation are recorded so any run is
/// reproducible bit-for-bit.
struct ParticleEnsemble {
  int dim = 1;
  std::vector<double> positions;
  long generation = 0;
  std::uint64_t seed = 0;
  long resampled = 0;   // cumulative count of divergence resamples

  std::size_t count() const { return positions.size() / dim; }
  const double* particle(std::size_t i) const { return positions.data() + i * dim; }
};

enum class AcceptRule { None, MetropolisHastings };

struct ChainConfig {
  PhaseFlow flow;
  AcceptRule accept_rule = AcceptRule::None;
  /// Divergent particles are redrawn from this density when present,
  /// otherwise kept at their previous position.
  std::optional<GridDensity> reinit;

  ChainConfig(PhaseFlow f, AcceptRule rule) : flow(std::move(f)), accept_rule(rule) {
    if (flow.kind() == FlowKind::Leapfrog && accept_rule != AcceptRule::MetropolisHastings)
      throw std::invalid_argument(
          "ChainConfig: leapfrog requires the Metropolis-Hastings accept rule");
  }
};

namespace detail {

/// splitmix64; decorrelates per-particle streams from (seed, generation, index).
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::mt19937_64 particle_rng(std::uint64_t seed, long gen, std::size_t i) {
  return std::mt19937_64(mix64(seed ^ mix64(static_cast<std::uint64_t>(gen) ^
                                            mix64(static_cast<std::uint64_t>(i) + 1))));
}

} // namespace detail

/// Draw one position from a 1-d grid density (piecewise-linear between nodes)
/// by inverse CDF.
inline double sample_position(const GridDensity& h, std::mt19937_64& rng) {
  const Grid& g = h.grid();
  if (g.dim() != 1)
    throw std::invalid_argument("sample_position: 1-d densities only");
  const int n = g.points(0);
  const double dx = g.spacing(0);
  std::vector<double> cell_mass(n - 1);
  double total = 0.0;
  for (int c = 0; c < n - 1; ++c) {
    cell_mass[c] = 0.5 * dx * (h[c] + h[c + 1]);
    total += cell_mass[c];
  }
  if (!(total > 0.0)) throw std::invalid_argument("sample_position: zero-mass density");
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double u = uni(rng) * total;
  int c = 0;
  while (c < n - 2 && u > cell_mass[c]) u -= cell_mass[c++];
  // linear density v0 + (v1-v0) s on s in [0,1]; invert the cell CDF
  double v0 = h[c], v1 = h[c + 1];
  double frac = u / std::max(cell_mass[c], 1e-300);
  double s;
  if (std::abs(v1 - v0) < 1e-14 * (v0 + v1 + 1e-300)) {
    s = frac;
  } else {
    double a = 0.5 * (v1 - v0), b = v0, cc = -frac * (0.5 * (v0 + v1));
    double disc = std::max(0.0, b * b - 4.0 * a * cc);
    s = (-b + std::sqrt(disc)) / (2.0 * a);
    s = std::clamp(s, 0.0, 1.0);
  }
  return g.node(0, c) + s * dx;
}

inline ParticleEnsemble make_ensemble(const GridDensity& h0, std::size_t count,
                                      std::uint64_t seed) {
  ParticleEnsemble e;
  e.dim = h0.grid().dim();
  e.seed = seed;
  e.positions.resize(count * e.dim);
  for (std::size_t i = 0; i < count; ++i) {
    auto rng = detail::particle_rng(seed, -1, i);
    e.positions[i] = sample_position(h0, rng);
  }
  return e;
}

struct StepReport {
  double acceptance_rate = 1.0;
  long resampled = 0;
};

/// One HMC step of the whole ensemble: lift with p ~ g, move by the flow,
/// optionally Metropolis-accept, project back to position space. Particles
/// evolve on independent RNG streams, so the result does not depend on
/// evaluation order.
inline ParticleEnsemble hmc_step(const ChainConfig& cfg, const ParticleEnsemble& in,
                                 StepReport* report = nullptr) {
  const auto& E = cfg.flow.energy();
  ParticleEnsemble out = in;
  out.generation = in.generation + 1;
  std::size_t accepted = 0;
  long resampled = 0;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (std::size_t i = 0; i < in.count(); ++i) {
    auto rng = detail::particle_rng(in.seed, in.generation, i);
    std::vector<double> q(in.particle(i), in.particle(i) + in.dim);
    PhasePoint x(q, E.momentum.sample(rng));
    try {
      PhasePoint y = cfg.flow.apply(x);
      bool accept = true;
      if (cfg.accept_rule == AcceptRule::MetropolisHastings) {
        double logr = E(x) - E(y);
        accept = logr >= 0.0 || uni(rng) < std::exp(logr);
      }
      if (accept) {
        ++accepted;
        for (int a = 0; a < in.dim; ++a) out.positions[i * in.dim + a] = y.q[a];
      }
    } catch (const FlowDivergenceError&) {
      ++resampled;
      if (cfg.reinit) {
        out.positions[i * in.dim] = sample_position(*cfg.reinit, rng);
      }
    }
  }
  out.resampled = in.resampled + resampled;
  if (report) {
    report->acceptance_rate = static_cast<double>(accepted) / in.count();
    report->resampled = resampled;
  }
  return out;
}

struct HistogramResult {
  GridDensity density;
  std::size_t outliers = 0;
};

/// Nearest-node binning normalized so the grid quadrature of the result is 1.
/// Particles outside the box are excluded and counted.
inline HistogramResult histogram_density(const ParticleEnsemble& e, const Grid& g) {
  if (e.count() == 0) throw std::invalid_argument("histogram_density: empty ensemble");
  if (e.dim != g.dim()) throw std::invalid_argument("histogram_density: dimension mismatch");
  std::vector<double> counts(g.size(), 0.0);
  std::size_t outliers = 0, inside = 0;
  for (std::size_t i = 0; i < e.count(); ++i) {
    std::size_t flat = 0;
    bool ok = true;
    for (int a = 0; a < g.dim(); ++a) {
      double x = e.particle(i)[a];
      if (std::abs(x) > g.half_extent(a)) { ok = false; break; }
      int idx = static_cast<int>(std::lround((x + g.half_extent(a)) / g.spacing(a)));
      idx = std::clamp(idx, 0, g.points(a) - 1);
      flat = flat * g.points(a) + idx;
    }
    if (!ok) { ++outliers; continue; }
    counts[flat] += 1.0;
    ++inside;
  }
  if (inside == 0) throw std::invalid_argument("histogram_density: all particles outside box");
  for (std::size_t i = 0; i < counts.size(); ++i)
    counts[i] /= static_cast<double>(inside) * g.weight(i);
  return HistogramResult{GridDensity(g, std::move(counts)), outliers};
}

// ---- small test statistics used by the cross-validation ----------------

/// Two-sided Kolmogorov-Smirnov statistic against a reference CDF.
template <typename Cdf>
double ks_statistic(std::vector<double> samples, Cdf&& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double F = cdf(samples[i]);
    d = std::max(d, std::abs(F - i / n));
    d = std::max(d, std::abs((i + 1) / n - F));
  }
  return d;
}

inline double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Pearson chi-square statistic of observed counts against expected
/// probabilities (expected counts = prob * total).
inline double chi2_statistic(const std::vector<double>& counts,
                             const std::vector<double>& probs) {
  double total = 0.0;
  for (double c : counts) total += c;
  double stat = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    double exp = probs[i] * total;
    if (exp <= 0.0) continue;
    double d = counts[i] - exp;
    stat += d * d / exp;
  }
  return stat;
}

} // namespace hmclq
