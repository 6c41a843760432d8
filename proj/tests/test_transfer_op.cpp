#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "hmclq/transfer_op.hpp"

using namespace hmclq;

namespace {

TransferOperator gaussian_op(double t, int n = 257) {
  return TransferOperator(
      PhaseFlow(FlowKind::ExactGaussianRotation, t,
                HamiltonianEnergy{gaussian_target(1), gaussian_momentum(1)}),
      Grid(8.0, n));
}

TransferOperator leapfrog_op(int n = 129, int steps = 20) {
  TargetDensity f = double_well_target();
  return TransferOperator(
      PhaseFlow(FlowKind::Leapfrog, 1.0,
                HamiltonianEnergy{f, gaussian_momentum(1)}, steps),
      f.default_grid(n));
}

GridDensity bump(const WeightedSpace& sp, double c, double w) {
  const Grid& g = sp.grid();
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    double x = g.coords(i)[0];
    v[i] = std::exp(-0.5 * (x - c) * (x - c) / (w * w)) * sp.f_values()[i];
  }
  return GridDensity(g, std::move(v));
}

double rel_l2_diff(const WeightedSpace& sp, const GridDensity& a, const GridDensity& b) {
  ExponentPair two(2.0);
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return sp.norm(GridDensity(sp.grid(), std::move(d), true), two) /
         std::max(sp.norm(b, two), sp.norm(a, two));
}

} // namespace

TEST_CASE("f is a fixed point for exact and leapfrog flows") {
  for (double t : {0.3, 1.0, 2.0}) {
    TransferOperator op = gaussian_op(t);
    GridDensity fd = op.space().f_density();
    CHECK(rel_l2_diff(op.space(), op.apply(fd), fd) < 1e-8);
  }
  TransferOperator lf = leapfrog_op();
  GridDensity fd = lf.space().f_density();
  CHECK(rel_l2_diff(lf.space(), lf.apply(fd), fd) < 1e-10);
}

TEST_CASE("quarter turn collapses every density onto the fixed ray") {
  TransferOperator op = gaussian_op(M_PI / 2, 512);
  const WeightedSpace& sp = op.space();
  GridDensity h = bump(sp, 1.2, 0.6);
  GridDensity th = op.apply(h);
  double a = sp.alpha(h);
  GridDensity fd = sp.f_density();
  double worst = 0.0;
  for (std::size_t i = 0; i < th.size(); ++i)
    worst = std::max(worst, std::abs(th[i] - a * fd[i]));
  CHECK(worst < 1e-10);
}

TEST_CASE("the operator is linear and positivity preserving") {
  TransferOperator op = gaussian_op(1.0);
  const WeightedSpace& sp = op.space();
  GridDensity a = bump(sp, 0.5, 0.8), b = bump(sp, -1.0, 1.2);
  std::vector<double> comb(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) comb[i] = 2.0 * a[i] - 3.0 * b[i];
  GridDensity lhs = op.apply(GridDensity(sp.grid(), std::move(comb), true));
  GridDensity ta = op.apply(a), tb = op.apply(b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::abs(lhs[i] - (2.0 * ta[i] - 3.0 * tb[i])) < 1e-10);
    CHECK(ta[i] >= -1e-12);
  }
}

TEST_CASE("matrix assembly reproduces the operator action for both paths") {
  for (TransferOperator op : {gaussian_op(1.0, 129), leapfrog_op(65, 10)}) {
    const WeightedSpace& sp = op.space();
    GridDensity h = bump(sp, 0.4, 0.7);
    GridDensity direct = op.apply(h);
    OperatorMatrix M = op.assemble_matrix();
    Eigen::VectorXd v(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) v(i) = h[i];
    Eigen::VectorXd w = M.mat * v;
    for (std::size_t i = 0; i < h.size(); ++i)
      CHECK(std::abs(w(i) - direct[i]) < 1e-12);
  }
}

TEST_CASE("adjoint satisfies the duality pairing and equals T for even g") {
  TransferOperator op = gaussian_op(1.0, 513);
  const WeightedSpace& sp = op.space();
  GridDensity h = bump(sp, 0.8, 0.9), k = bump(sp, -0.6, 1.1);
  CHECK(std::abs(sp.pairing(op.apply(h), k) - sp.pairing(h, op.apply_adjoint(k))) <
        1e-10);
  REQUIRE(op.self_adjoint());
  GridDensity a = op.apply(h), b = op.apply_adjoint(h);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);
}

TEST_CASE("S = T-adjoint o T composes the two applications") {
  TransferOperator op = gaussian_op(0.8, 129);
  GridDensity h = bump(op.space(), -0.3, 0.8);
  GridDensity s1 = op.apply_S(h);
  GridDensity s2 = op.apply_adjoint(op.apply(h));
  for (std::size_t i = 0; i < s1.size(); ++i) CHECK(s1[i] == s2[i]);
}

TEST_CASE("a full turn is the identity") {
  TransferOperator op = gaussian_op(2.0 * M_PI, 257);
  REQUIRE(op.resonant());
  const WeightedSpace& sp = op.space();
  GridDensity h = bump(sp, 0.9, 0.7);
  GridDensity th = op.apply(h);
  CHECK(rel_l2_diff(sp, th, h) < 1e-6);
}

TEST_CASE("half turn reflects the density") {
  TransferOperator op = gaussian_op(M_PI, 257);
  REQUIRE(op.resonant());
  GridDensity h = bump(op.space(), 1.5, 0.5);
  GridDensity th = op.apply(h);
  const Grid& g = op.grid();
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(std::abs(th[i] - h[g.size() - 1 - i]) < 1e-12);
}

TEST_CASE("leading eigenpair of the assembled matrix is (1, f)") {
  TransferOperator op = gaussian_op(1.0, 257);
  OperatorMatrix M = op.assemble_matrix();
  const auto& f = op.space().f_values();
  Eigen::VectorXd v(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) v(i) = f[i];
  Eigen::VectorXd w = M.mat * v;
  CHECK((w - v).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("second singular value matches cos(t) in the weighted metric") {
  const double t = 1.0;
  TransferOperator op = gaussian_op(t, 257);
  const WeightedSpace& sp = op.space();
  const std::size_t n = sp.grid().size();
  Eigen::MatrixXd M = op.assemble_matrix().mat;
  Eigen::VectorXd s(n);
  for (std::size_t i = 0; i < n; ++i)
    s(i) = std::sqrt(sp.grid().weight(i) / sp.f_values()[i]);
  Eigen::MatrixXd B = s.asDiagonal() * M * s.cwiseInverse().asDiagonal();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(B);
  CHECK(svd.singularValues()(0) == Catch::Approx(1.0).margin(1e-8));
  CHECK(svd.singularValues()(1) == Catch::Approx(std::cos(t)).margin(1e-6));
}

TEST_CASE("coverage distinguishes mixing, resonant, and leapfrog flows") {
  CHECK(gaussian_op(1.0, 129).coverage() == 1.0);
  TransferOperator res = gaussian_op(M_PI, 129);
  CHECK(res.coverage() == Catch::Approx(1.0 / 129.0));
  double c = leapfrog_op(65, 10).coverage();
  CHECK(c > 0.0);
  CHECK(c <= 1.0);
}

TEST_CASE("the direct-form fixed-point defect vanishes for the exact flow") {
  CHECK(gaussian_op(1.0, 129).fixed_point_defect() < 1e-8);
  CHECK(leapfrog_op(65, 20).fixed_point_defect() > 1e-8);
}

TEST_CASE("one application never increases any tracked norm") {
  TransferOperator op = gaussian_op(1.0, 513);
  const WeightedSpace& sp = op.space();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> cd(-2.0, 2.0), wd(0.4, 2.0);
  for (int k = 0; k < 20; ++k) {
    GridDensity h = bump(sp, cd(rng), wd(rng));
    GridDensity th = op.apply(h);
    for (double q : {1.5, 2.0, 3.0, 4.0}) {
      ExponentPair e(q);
      CHECK(sp.norm(th, e) <= sp.norm(h, e) + 1e-9);
    }
  }
}

TEST_CASE("2d quarter turn collapses onto the fixed ray") {
  TargetDensity f = gaussian_target(2);
  TransferOperator op(
      PhaseFlow(FlowKind::ExactGaussianRotation, M_PI / 2,
                HamiltonianEnergy{f, gaussian_momentum(2)}),
      Grid(2, {8.0, 8.0}, {48, 48}));
  const WeightedSpace& sp = op.space();
  GridDensity h = uniform_density(sp.grid(), {-1.0, -0.5}, {1.0, 1.5});
  GridDensity th = op.apply(h);
  double a = sp.alpha(h);
  GridDensity fd = sp.f_density();
  double worst = 0.0;
  for (std::size_t i = 0; i < th.size(); ++i)
    worst = std::max(worst, std::abs(th[i] - a * fd[i]));
  CHECK(worst < 1e-8);
}
