#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hmclq/lq_space.hpp"
#include "hmclq/transfer_op.hpp"

namespace hmclq {

/// Canonical finite family of dual-space test elements for the weak
/// convergence probes: f times {1, x, x^2, x^3, x^4, half-line and unit
/// interval indicators, a sawtooth}. Spans smooth and rough duals; the
/// honest discrete surrogate for the weak topology.
struct TestFamily {
  std::vector<GridDensity> members;
  std::vector<std::string> names;
  std::vector<double> integrals;  // quadrature int b_i

  std::size_t size() const { return members.size(); }
};

inline TestFamily make_test_family(const WeightedSpace& space) {
  const Grid& g = space.grid();
  TestFamily fam;
  auto add = [&](const std::string& name, auto&& shape) {
    std::vector<double> v(g.size());
    const auto& f = space.f_values();
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = f[i] * shape(g.coords(i)[0]);
    GridDensity d(g, std::move(v), true);
    fam.integrals.push_back(space.integral(d));
    fam.members.push_back(std::move(d));
    fam.names.push_back(name);
  };
  add("f", [](double) { return 1.0; });
  add("x*f", [](double x) { return x; });
  add("x^2*f", [](double x) { return x * x; });
  add("x^3*f", [](double x) { return x * x * x; });
  add("x^4*f", [](double x) { return x * x * x * x; });
  add("f*1[x>=0]", [](double x) { return x >= 0.0 ? 1.0 : 0.0; });
  add("f*1[x<=0]", [](double x) { return x <= 0.0 ? 1.0 : 0.0; });
  add("f*1[-1,0]", [](double x) { return (x >= -1.0 && x <= 0.0) ? 1.0 : 0.0; });
  add("f*1[0,1]", [](double x) { return (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0; });
  add("f*1[1,2]", [](double x) { return (x >= 1.0 && x <= 2.0) ? 1.0 : 0.0; });
  add("f*1[-2,-1]", [](double x) { return (x >= -2.0 && x <= -1.0) ? 1.0 : 0.0; });
  add("f*saw", [](double x) { return x - std::floor(x) - 0.5; });
  return fam;
}

struct TraceRow {
  int n = 0;
  double mass = 0.0;
  std::vector<double> norms;       // per tracked exponent
  std::vector<double> errors;      // ||T^n h - alpha f||_q per exponent
  std::vector<double> pairings;    // against the test family
};

struct ConvergenceTrace {
  std::vector<double> q_list;
  std::vector<std::string> family_names;
  std::vector<double> family_integrals;
  double alpha = 0.0;
  bool routed_through_S = false;   // non-self-adjoint configurations
  bool resonant = false;           // contraction-strictness not applicable
  std::vector<TraceRow> rows;      // rows[0] is the initial density (n = 0)
};

/// One step of the diagnostic iteration: T itself when the configuration is
/// self-adjoint (even g), otherwise S = T-adjoint o T.
inline GridDensity diagnostic_step(const TransferOperator& op, const GridDensity& h) {
  return op.self_adjoint() ? op.apply(h) : op.apply_S(h);
}

inline ConvergenceTrace iterate_and_trace(const TransferOperator& op,
                                          const GridDensity& h0, int n_max,
                                          const std::vector<double>& q_list) {
  const WeightedSpace& sp = op.space();
  ConvergenceTrace tr;
  tr.q_list = q_list;
  tr.alpha = sp.alpha(h0);
  tr.routed_through_S = !op.self_adjoint();
  tr.resonant = op.resonant();
  TestFamily fam = make_test_family(sp);
  tr.family_names = fam.names;
  tr.family_integrals = fam.integrals;

  GridDensity af = sp.f_density();
  std::vector<double> afv(af.size());
  for (std::size_t i = 0; i < af.size(); ++i) afv[i] = tr.alpha * af[i];

  GridDensity h = h0;
  for (int n = 0; n <= n_max; ++n) {
    if (n > 0) h = diagnostic_step(op, h);
    TraceRow row;
    row.n = n;
    row.mass = sp.integral(h);
    for (double q : q_list) {
      ExponentPair e(q);
      row.norms.push_back(sp.norm(h, e));
      std::vector<double> diff(h.size());
      for (std::size_t i = 0; i < h.size(); ++i) diff[i] = h[i] - afv[i];
      row.errors.push_back(sp.norm(GridDensity(h.grid(), std::move(diff), true), e));
    }
    for (const auto& b : fam.members) row.pairings.push_back(sp.pairing(h, b));
    tr.rows.push_back(std::move(row));
  }
  return tr;
}

struct ConjugacyReport {
  double q = 0.0;
  int n = 0;
  /// Signed maximum of (T^n h)* - T^n(h*) when q >= 2 (expected <= 0),
  /// of T^n(h*) - (T^n h)* when q <= 2. Positive value = violation.
  double max_violation = 0.0;
  double max_abs_difference = 0.0;  // for the q = 2 equality case
  std::string side;
};

/// Nodewise comparison of (T^n h)* against T^n(h*): Jensen direction flips
/// across q = 2, with equality at q = 2 and on the fixed ray.
inline ConjugacyReport check_conjugacy_inequality(const TransferOperator& op,
                                                  const GridDensity& h, int n,
                                                  const ExponentPair& e) {
  const WeightedSpace& sp = op.space();
  GridDensity lhs = h;
  GridDensity rhs = sp.conjugate(h, e);
  for (int k = 0; k < n; ++k) {
    lhs = diagnostic_step(op, lhs);
    rhs = diagnostic_step(op, rhs);
  }
  lhs = sp.conjugate(lhs, e);
  ConjugacyReport rep;
  rep.q = e.q;
  rep.n = n;
  rep.side = e.q >= 2.0 ? "(T^n h)* <= T^n(h*)" : "(T^n h)* >= T^n(h*)";
  double sgn = e.q >= 2.0 ? 1.0 : -1.0;
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    double d = lhs[i] - rhs[i];
    rep.max_violation = std::max(rep.max_violation, sgn * d);
    rep.max_abs_difference = std::max(rep.max_abs_difference, std::abs(d));
  }
  return rep;
}

struct PairingTrace {
  std::string name;
  double limit = 0.0;              // alpha(h0) * int b
  std::vector<double> values;      // <T^n h, b> per n
};

struct WeakConvergenceReport {
  std::vector<PairingTrace> traces;
  double max_transposition_residual = 0.0;  // |<T^n h,b> - <h,T^n b>|
  double alpha = 0.0;
};

inline WeakConvergenceReport weak_convergence_probe(const TransferOperator& op,
                                                    const GridDensity& h0,
                                                    const TestFamily& fam,
                                                    int n_max) {
  const WeightedSpace& sp = op.space();
  WeakConvergenceReport rep;
  rep.alpha = sp.alpha(h0);
  for (std::size_t k = 0; k < fam.size(); ++k)
    rep.traces.push_back({fam.names[k], rep.alpha * fam.integrals[k], {}});

  GridDensity h = h0;
  std::vector<GridDensity> bs = fam.members;
  for (int n = 0; n <= n_max; ++n) {
    if (n > 0) {
      h = diagnostic_step(op, h);
      for (auto& b : bs) b = diagnostic_step(op, b);
    }
    for (std::size_t k = 0; k < bs.size(); ++k) {
      double forward = sp.pairing(h, fam.members[k]);
      double transposed = sp.pairing(h0, bs[k]);
      rep.traces[k].values.push_back(forward);
      rep.max_transposition_residual =
          std::max(rep.max_transposition_residual, std::abs(forward - transposed));
    }
  }
  return rep;
}

struct SpectralReport {
  double rho = 0.0;     // spectral radius of T restricted to N = {int a = 0}
  double gap = 0.0;     // 1 - rho
  int iterations = 0;
  double residual = 0.0;
  bool converged = true;
  std::string method;
  /// The estimate concerns the discretized operator on this grid only; it
  /// carries no statement about the continuum spectrum.
  std::string caveat = "discretized-operator estimate; continuum spectrum not implied";
};

inline SpectralReport estimate_spectral_gap(const TransferOperator& op,
                                            const ExponentPair& e,
                                            int max_iter = 500, double tol = 1e-12) {
  const WeightedSpace& sp = op.space();
  const Grid& g = sp.grid();

  if (std::abs(e.q - 2.0) < 1e-14) {
    // Power iteration on S restricted to N, deflating the fixed ray.
    SpectralReport rep;
    rep.method = "power-iteration-on-S";
    ExponentPair two(2.0);
    double intf = sp.integral_f();
    auto deflate = [&](GridDensity& a) {
      double c = sp.integral(a) / intf;
      std::vector<double> v(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) v[i] = a[i] - c * sp.f_values()[i];
      a = GridDensity(g, std::move(v), true);
    };
    std::vector<double> v0(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      double x = g.coords(i)[0];
      v0[i] = std::sin(1.7 * x + 0.3) * sp.f_values()[i];
    }
    GridDensity v(g, std::move(v0), true);
    deflate(v);
    double nv = sp.norm(v, two);
    double lambda = 0.0, prev = -1.0;
    for (int it = 1; it <= max_iter; ++it) {
      rep.iterations = it;
      std::vector<double> vn(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) vn[i] = v[i] / nv;
      v = GridDensity(g, std::move(vn), true);
      GridDensity w = op.apply_S(v);
      deflate(w);
      double nw = sp.norm(w, two);
      if (nw < 1e-200) {  // S annihilates N: one-step collapse
        rep.rho = 0.0;
        rep.gap = 1.0;
        rep.residual = 0.0;
        return rep;
      }
      lambda = sp.pairing(v, w);
      double rnorm = 0.0;
      {
        std::vector<double> r(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) r[i] = w[i] - lambda * v[i];
        rnorm = sp.norm(GridDensity(g, std::move(r), true), two);
      }
      rep.residual = rnorm / std::max(std::abs(lambda), 1e-300);
      if (prev >= 0.0 && std::abs(lambda - prev) <= tol * std::abs(lambda) &&
          rep.residual <= 1e-6) {
        break;
      }
      prev = lambda;
      v = w;
      nv = nw;
    }
    rep.converged = rep.residual <= 1e-6;
    double rho_s = std::clamp(std::abs(lambda), 0.0, 1.0);
    rep.rho = std::sqrt(rho_s);
    rep.gap = 1.0 - rep.rho;
    return rep;
  }

  // q != 2: least-squares slope of log ||T^n h - alpha f||_q.
  SpectralReport rep;
  rep.method = "norm-decay-fit";
  std::vector<double> h0(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    double x = g.coords(i)[0];
    h0[i] = (1.0 + 0.5 * std::sin(2.0 * x)) * sp.f_values()[i];
  }
  GridDensity h(g, std::move(h0));
  double a = sp.alpha(h);
  std::vector<double> logs;
  GridDensity cur = h;
  double e0 = 0.0;
  for (int n = 0; n <= 60; ++n) {
    if (n > 0) cur = diagnostic_step(op, cur);
    std::vector<double> d(cur.size());
    for (std::size_t i = 0; i < cur.size(); ++i) d[i] = cur[i] - a * sp.f_values()[i];
    double err = sp.norm(GridDensity(g, std::move(d), true), e);
    if (n == 0) e0 = err;
    // stop before the discrete fixed direction's offset from alpha f floors
    // the decay and contaminates the slope
    if (err < 1e-6 * e0 || err == 0.0) break;
    logs.push_back(std::log(err));
    rep.iterations = n;
  }
  if (logs.size() < 3) {
    rep.rho = 0.0;
    rep.gap = 1.0;
    return rep;
  }
  // slope of log err vs n
  double n_ = 0.0, l_ = 0.0, nn = 0.0, nl = 0.0, cnt = logs.size();
  for (std::size_t k = 0; k < logs.size(); ++k) {
    n_ += k;
    l_ += logs[k];
    nn += double(k) * k;
    nl += k * logs[k];
  }
  double slope = (cnt * nl - n_ * l_) / (cnt * nn - n_ * n_);
  rep.rho = std::clamp(std::exp(slope), 0.0, 1.0);
  rep.gap = 1.0 - rep.rho;
  double rms = 0.0;
  for (std::size_t k = 0; k < logs.size(); ++k) {
    double fit = (l_ - slope * n_) / cnt + slope * k;
    rms += (logs[k] - fit) * (logs[k] - fit);
  }
  rep.residual = std::sqrt(rms / cnt);
  return rep;
}

} // namespace hmclq
