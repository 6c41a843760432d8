#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hmclq/sampler.hpp"
#include "hmclq/transfer_op.hpp"

using namespace hmclq;

namespace {

PhaseFlow rotation(double t) {
  return PhaseFlow(FlowKind::ExactGaussianRotation, t,
                   HamiltonianEnergy{gaussian_target(1), gaussian_momentum(1)});
}

} // namespace

TEST_CASE("sampling a grid density reproduces its distribution") {
  Grid g(8.0, 512);
  TargetDensity f = gaussian_target(1);
  GridDensity fd = f.on_grid(g);
  std::mt19937_64 rng(99);
  std::vector<double> xs(20000);
  for (auto& x : xs) x = sample_position(fd, rng);
  // KS against the standard normal; 1% critical value is 1.628/sqrt(M)
  double d = ks_statistic(xs, standard_normal_cdf);
  CHECK(d < 1.628 / std::sqrt(20000.0));
}

TEST_CASE("quarter-turn HMC equilibrates to the Gaussian in one step") {
  Grid g(8.0, 256);
  GridDensity h0 = uniform_density(g, -1.0, 1.0);
  ParticleEnsemble e = make_ensemble(h0, 100000, 7);
  ChainConfig cfg(rotation(M_PI / 2), AcceptRule::None);
  StepReport rep;
  e = hmc_step(cfg, e, &rep);
  CHECK(rep.acceptance_rate == 1.0);
  std::vector<double> xs(e.positions);
  double d = ks_statistic(xs, standard_normal_cdf);
  CHECK(d < 1.628 / std::sqrt(100000.0));
}

TEST_CASE("Metropolis accepts every exact-flow proposal") {
  Grid g(8.0, 128);
  ParticleEnsemble e = make_ensemble(uniform_density(g, -2.0, 2.0), 5000, 3);
  ChainConfig cfg(rotation(1.0), AcceptRule::MetropolisHastings);
  StepReport rep;
  hmc_step(cfg, e, &rep);
  CHECK(rep.acceptance_rate == 1.0);
  CHECK(rep.resampled == 0);
}

TEST_CASE("runs are bit-reproducible for a fixed seed") {
  Grid g(8.0, 128);
  GridDensity h0 = uniform_density(g, -1.5, 0.5);
  auto run = [&] {
    ParticleEnsemble e = make_ensemble(h0, 2000, 12345);
    ChainConfig cfg(rotation(0.9), AcceptRule::None);
    for (int n = 0; n < 5; ++n) e = hmc_step(cfg, e);
    return e.positions;
  };
  auto a = run(), b = run();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

  ParticleEnsemble other = make_ensemble(h0, 2000, 54321);
  bool differs = false;
  ParticleEnsemble base = make_ensemble(h0, 2000, 12345);
  for (std::size_t i = 0; i < base.positions.size(); ++i)
    if (base.positions[i] != other.positions[i]) differs = true;
  CHECK(differs);
}

TEST_CASE("a single particle yields the inverse bin measure") {
  Grid g(4.0, 33);
  ParticleEnsemble e;
  e.dim = 1;
  e.positions = {0.1};
  HistogramResult h = histogram_density(e, g);
  // one interior bin carries everything: value = 1/weight so the quadrature is 1
  double sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) sum += g.weight(i) * h.density[i];
  CHECK(sum == Catch::Approx(1.0).margin(1e-12));
  CHECK(h.outliers == 0);
}

TEST_CASE("histogram counts outliers and excludes them from the normalization") {
  Grid g(1.0, 17);
  ParticleEnsemble e;
  e.dim = 1;
  e.positions = {0.0, 0.5, 3.0, -2.0};
  HistogramResult h = histogram_density(e, g);
  CHECK(h.outliers == 2);
  double sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) sum += g.weight(i) * h.density[i];
  CHECK(sum == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("leapfrog HMC samples the double-well target") {
  TargetDensity f = double_well_target();
  MomentumDensity mom = gaussian_momentum(1);
  PhaseFlow flow(FlowKind::Leapfrog, 1.0, HamiltonianEnergy{f, mom}, 25);
  ChainConfig cfg(flow, AcceptRule::MetropolisHastings);
  Grid g = f.default_grid(201);
  GridDensity fd = f.on_grid(g);
  ParticleEnsemble e = make_ensemble(fd, 40000, 2024);
  double acc = 0.0;
  for (int n = 0; n < 10; ++n) {
    StepReport rep;
    e = hmc_step(cfg, e, &rep);
    acc = rep.acceptance_rate;
  }
  CHECK(acc > 0.95);
  CHECK(acc < 1.0);
  // chi-square against the normalized target over 50 equal bins
  const int nb = 50;
  std::vector<double> counts(nb, 0.0), probs(nb, 0.0);
  double L = g.half_extent(0), bw = 2.0 * L / nb;
  double mass = fd.integral();
  for (double x : e.positions) {
    int b = std::clamp(static_cast<int>((x + L) / bw), 0, nb - 1);
    counts[b] += 1.0;
  }
  Quadrature1D fine = trapezoid_rule(L, 5001);
  for (std::size_t k = 0; k < fine.nodes.size(); ++k) {
    int b = std::clamp(static_cast<int>((fine.nodes[k] + L) / bw), 0, nb - 1);
    probs[b] += fine.weights[k] *
                std::exp(-std::pow(fine.nodes[k] * fine.nodes[k] - 1.0, 2)) / mass;
  }
  double stat = chi2_statistic(counts, probs);
  CHECK(stat < 74.919);  // 1% critical value at 49 degrees of freedom
}

TEST_CASE("ensemble histogram tracks the operator iterates") {
  Grid g(8.0, 256);
  PhaseFlow flow = rotation(1.0);
  TransferOperator op(flow, g);
  GridDensity h = uniform_density(g, -1.0, 1.0);
  ParticleEnsemble e = make_ensemble(h, 50000, 31);
  ChainConfig cfg(flow, AcceptRule::None);
  double mass = op.space().integral(h);
  for (int n = 1; n <= 5; ++n) {
    e = hmc_step(cfg, e);
    h = op.apply(h);
    HistogramResult hist = histogram_density(e, g);
    double l1 = 0.0, mc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      double w = g.weight(i);
      double p = w * h[i] / mass;
      l1 += std::abs(w * hist.density[i] - p);
      mc += std::sqrt(std::max(p * (1.0 - p), 0.0) / 50000.0);
    }
    CHECK(l1 < 3.0 * mc);
  }
}

TEST_CASE("chain configuration rejects leapfrog without Metropolis") {
  TargetDensity f = double_well_target();
  PhaseFlow flow(FlowKind::Leapfrog, 1.0,
                 HamiltonianEnergy{f, gaussian_momentum(1)}, 10);
  CHECK_THROWS_AS(ChainConfig(flow, AcceptRule::None), std::invalid_argument);
}
