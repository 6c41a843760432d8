#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hmclq/diagnostics.hpp"
#include "hmclq/io.hpp"
#include "hmclq/sampler.hpp"
#include "hmclq/transfer_op.hpp"

namespace hmclq {

inline constexpr const char* version_string = "hmclq 1.0.0";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InitialDensitySpec {
  std::string kind = "uniform";  // uniform | bump | sampled-f
  double a = -1.0, b = 1.0;      // uniform box per axis
  double center = 1.0, width = 0.5;  // bump parameters
};

struct ExperimentConfig {
  std::string target_name = "gaussian-1d";
  std::string momentum_name = "gaussian";
  int momentum_quad_nodes = 0;  // 0 = builtin default
  std::string flow_kind = "exact-rotation";  // or "leapfrog"
  double flow_time = 1.0;
  int flow_steps = 0;
  int grid_points = 512;
  double grid_extent = 0.0;  // 0 = target default
  std::vector<double> exponents = {1.5, 2.0, 3.0, 4.0};
  int iterations = 100;
  long particles = 0;
  int particle_steps = 5;
  std::uint64_t seed = 20240911ULL;
  InitialDensitySpec initial;
};

// ---- registries --------------------------------------------------------

inline std::vector<std::string> target_names() {
  return {"gaussian-1d", "gaussian-2d", "double-well-1d", "gaussian-mixture-1d"};
}
inline std::vector<std::string> momentum_names() {
  return {"gaussian", "student-7", "skewed-mixture"};
}
inline std::vector<std::string> flow_names() { return {"exact-rotation", "leapfrog"}; }

inline TargetDensity make_target(const std::string& name) {
  if (name == "gaussian-1d") return gaussian_target(1);
  if (name == "gaussian-2d") return gaussian_target(2);
  if (name == "double-well-1d") return double_well_target();
  if (name == "gaussian-mixture-1d") return gaussian_mixture_target();
  throw ConfigError("unknown target '" + name + "'");
}

inline MomentumDensity make_momentum(const std::string& name, int dim, int quad_nodes) {
  if (name == "gaussian") return gaussian_momentum(dim, quad_nodes > 0 ? quad_nodes : 129);
  if (name == "student-7") return student_momentum(dim, quad_nodes > 0 ? quad_nodes : 801);
  if (name == "skewed-mixture")
    return skewed_momentum(dim, quad_nodes > 0 ? quad_nodes : 601);
  throw ConfigError("unknown momentum density '" + name + "'");
}

// ---- config parsing / validation ---------------------------------------

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  std::vector<std::string> errors;
  auto get = [&](const char* key, auto& slot) {
    if (j.contains(key)) {
      try {
        slot = j.at(key).get<std::decay_t<decltype(slot)>>();
      } catch (const nlohmann::json::exception& e) {
        errors.push_back(std::string("field '") + key + "': " + e.what());
      }
    }
  };
  get("target", c.target_name);
  get("momentum", c.momentum_name);
  get("momentum_quad_nodes", c.momentum_quad_nodes);
  get("flow", c.flow_kind);
  get("time", c.flow_time);
  get("steps", c.flow_steps);
  get("grid_points", c.grid_points);
  get("grid_extent", c.grid_extent);
  get("exponents", c.exponents);
  get("iterations", c.iterations);
  get("particles", c.particles);
  get("particle_steps", c.particle_steps);
  get("seed", c.seed);
  if (j.contains("initial")) {
    const auto& ji = j.at("initial");
    if (ji.contains("kind")) c.initial.kind = ji.at("kind").get<std::string>();
    if (ji.contains("a")) c.initial.a = ji.at("a").get<double>();
    if (ji.contains("b")) c.initial.b = ji.at("b").get<double>();
    if (ji.contains("center")) c.initial.center = ji.at("center").get<double>();
    if (ji.contains("width")) c.initial.width = ji.at("width").get<double>();
  }

  auto known = [](const std::vector<std::string>& reg, const std::string& v) {
    for (const auto& r : reg) if (r == v) return true;
    return false;
  };
  if (!known(target_names(), c.target_name))
    errors.push_back("target: unknown name '" + c.target_name + "'");
  if (!known(momentum_names(), c.momentum_name))
    errors.push_back("momentum: unknown name '" + c.momentum_name + "'");
  if (!known(flow_names(), c.flow_kind))
    errors.push_back("flow: unknown kind '" + c.flow_kind + "'");
  for (double q : c.exponents)
    if (!(q > 1.0))
      errors.push_back("exponents: q = " + std::to_string(q) +
                       " rejected; conjugate exponents require q > 1");
  if (c.exponents.empty()) errors.push_back("exponents: list must not be empty");
  if (!(c.flow_time > 0)) errors.push_back("time: must be positive");
  if (c.flow_kind == "leapfrog" && c.flow_steps < 1)
    errors.push_back("steps: leapfrog requires a positive step count");
  if (c.grid_points < 16) errors.push_back("grid_points: minimum 16");
  if (c.iterations < 1) errors.push_back("iterations: minimum 1");
  if (c.particles < 0) errors.push_back("particles: must be >= 0");
  if (c.flow_kind == "exact-rotation") {
    if (c.target_name != "gaussian-1d" && c.target_name != "gaussian-2d")
      errors.push_back("flow: exact-rotation requires a Gaussian target");
    if (c.momentum_name != "gaussian")
      errors.push_back("flow: exact-rotation requires the Gaussian momentum density");
  }
  if (!errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw ConfigError(msg);
  }
  return c;
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["target"] = c.target_name;
  j["momentum"] = c.momentum_name;
  if (c.momentum_quad_nodes > 0) j["momentum_quad_nodes"] = c.momentum_quad_nodes;
  j["flow"] = c.flow_kind;
  j["time"] = c.flow_time;
  if (c.flow_steps > 0) j["steps"] = c.flow_steps;
  j["grid_points"] = c.grid_points;
  if (c.grid_extent > 0) j["grid_extent"] = c.grid_extent;
  j["exponents"] = c.exponents;
  j["iterations"] = c.iterations;
  j["particles"] = c.particles;
  j["particle_steps"] = c.particle_steps;
  j["seed"] = c.seed;
  j["initial"] = {{"kind", c.initial.kind}, {"a", c.initial.a}, {"b", c.initial.b},
                  {"center", c.initial.center}, {"width", c.initial.width}};
  return j;
}

// ---- presets ------------------------------------------------------------

inline std::vector<std::pair<std::string, nlohmann::json>> preset_catalog() {
  using nlohmann::json;
  std::vector<std::pair<std::string, json>> out;
  out.emplace_back("gaussian-quarter-turn",
                   json{{"target", "gaussian-1d"}, {"momentum", "gaussian"},
                        {"flow", "exact-rotation"}, {"time", M_PI / 2},
                        {"grid_points", 512}, {"iterations", 40}});
  out.emplace_back("gaussian-mixing",
                   json{{"target", "gaussian-1d"}, {"momentum", "gaussian"},
                        {"flow", "exact-rotation"}, {"time", 1.0},
                        {"grid_points", 512}, {"iterations", 200}});
  out.emplace_back("gaussian-resonant",
                   json{{"target", "gaussian-1d"}, {"momentum", "gaussian"},
                        {"flow", "exact-rotation"}, {"time", M_PI},
                        {"grid_points", 512}, {"iterations", 60}});
  out.emplace_back("gaussian-2d-quarter-turn",
                   json{{"target", "gaussian-2d"}, {"momentum", "gaussian"},
                        {"flow", "exact-rotation"}, {"time", M_PI / 2},
                        {"grid_points", 48}, {"iterations", 8}});
  out.emplace_back("double-well-leapfrog",
                   json{{"target", "double-well-1d"}, {"momentum", "gaussian"},
                        {"flow", "leapfrog"}, {"time", 1.0}, {"steps", 20},
                        {"grid_points", 257}, {"iterations", 40},
                        {"momentum_quad_nodes", 129}});
  out.emplace_back("skewed-momentum-leapfrog",
                   json{{"target", "gaussian-1d"}, {"momentum", "skewed-mixture"},
                        {"flow", "leapfrog"}, {"time", 1.0}, {"steps", 20},
                        {"grid_points", 257}, {"iterations", 40},
                        {"momentum_quad_nodes", 201}});
  out.emplace_back("gaussian-sampler-check",
                   json{{"target", "gaussian-1d"}, {"momentum", "gaussian"},
                        {"flow", "exact-rotation"}, {"time", 1.0},
                        {"grid_points", 256}, {"iterations", 20},
                        {"particles", 100000}, {"particle_steps", 5}});
  return out;
}

inline nlohmann::json preset_config(const std::string& name) {
  for (auto& [n, j] : preset_catalog())
    if (n == name) return j;
  throw ConfigError("unknown preset '" + name + "'");
}

// ---- lemma-check report ---------------------------------------------------

enum class CheckStatus { Pass, Fail, Report, NotApplicable };

struct CheckRow {
  std::string label;       // stable label of the statement under test
  std::string description;
  double residual = 0.0;
  double tolerance = 0.0;
  CheckStatus status = CheckStatus::Pass;
};

inline const char* status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "FAIL";
    case CheckStatus::Report: return "report";
    default: return "n/a";
  }
}

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<CheckRow> checks;
  std::vector<std::string> warnings;
  std::vector<std::string> artifacts;
  bool all_passed = true;
};

namespace detail {

inline GridDensity smooth_random_density(const WeightedSpace& sp, std::mt19937_64& rng) {
  const Grid& g = sp.grid();
  std::uniform_real_distribution<double> cdist(0.2, 1.0), mdist(-2.0, 2.0),
      sdist(0.5, 2.0);
  double c[3], m[3], s[3];
  for (int k = 0; k < 3; ++k) { c[k] = cdist(rng); m[k] = mdist(rng); s[k] = sdist(rng); }
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    double x = g.coords(i)[0];
    double bump = 0.0;
    for (int k = 0; k < 3; ++k) bump += c[k] * std::exp(-0.5 * (x - m[k]) * (x - m[k]) / (s[k] * s[k]));
    v[i] = bump * sp.f_values()[i];
  }
  return GridDensity(g, std::move(v));
}

inline GridDensity initial_density(const WeightedSpace& sp, const InitialDensitySpec& spec) {
  const Grid& g = sp.grid();
  if (spec.kind == "uniform") {
    std::vector<double> a(g.dim(), spec.a), b(g.dim(), spec.b);
    return uniform_density(g, a, b);
  }
  if (spec.kind == "bump") {
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      auto x = g.coords(i);
      double r2 = 0.0;
      for (int ax = 0; ax < g.dim(); ++ax)
        r2 += (x[ax] - spec.center) * (x[ax] - spec.center);
      v[i] = std::exp(-0.5 * r2 / (spec.width * spec.width)) * sp.f_values()[i];
    }
    return GridDensity(g, std::move(v));
  }
  if (spec.kind == "sampled-f") return sp.f_density();
  throw ConfigError("initial: unknown kind '" + spec.kind + "'");
}

} // namespace detail

/// Run one batch experiment: builds the operator, iterates, evaluates every
/// statement-level check, and writes trace / report / spectral / manifest
/// files into out_dir. Returns the structured result. Same config and seed
/// give byte-identical outputs.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                       const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  ExperimentResult res;
  res.config = cfg;

  TargetDensity target = make_target(cfg.target_name);
  MomentumDensity momentum =
      make_momentum(cfg.momentum_name, target.dim, cfg.momentum_quad_nodes);
  double extent = cfg.grid_extent > 0 ? cfg.grid_extent : target.half_extent;
  Grid grid(target.dim, std::vector<double>(target.dim, extent),
            std::vector<int>(target.dim, cfg.grid_points));
  FlowKind kind = cfg.flow_kind == "leapfrog" ? FlowKind::Leapfrog
                                              : FlowKind::ExactGaussianRotation;
  PhaseFlow flow(kind, cfg.flow_time, HamiltonianEnergy{target, momentum},
                 cfg.flow_steps);
  TransferOperator op(flow, grid);
  const WeightedSpace& sp = op.space();
  const bool exact = kind == FlowKind::ExactGaussianRotation;
  const bool leapfrog = !exact;

  if (op.resonant())
    res.warnings.push_back(
        "integration time is resonant (sin t = 0): coverage fails and the "
        "contraction-strictness checks are not applicable");
  if (!op.self_adjoint())
    res.warnings.push_back(
        "momentum density is not even: T != T-adjoint; iteration diagnostics "
        "are routed through S = T-adjoint o T");

  GridDensity h0 = detail::initial_density(sp, cfg.initial);
  ConvergenceTrace trace = iterate_and_trace(op, h0, cfg.iterations, cfg.exponents);
  write_trace((out_dir / "trace.tsv").string(), trace);
  res.artifacts.push_back("trace.tsv");

  std::mt19937_64 rng(cfg.seed);
  ExponentPair two(2.0);
  GridDensity fd = sp.f_density();
  const double fnorm2 = sp.norm(fd, two);
  const double intf = sp.integral_f();

  auto add = [&](const std::string& label, const std::string& desc, double residual,
                 double tol, CheckStatus forced = CheckStatus::Pass) {
    CheckRow row{label, desc, residual, tol, forced};
    if (forced == CheckStatus::Pass)
      row.status = residual <= tol ? CheckStatus::Pass : CheckStatus::Fail;
    if (row.status == CheckStatus::Fail) res.all_passed = false;
    res.checks.push_back(row);
  };

  // -- function-space identities (exact-arithmetic statements) --
  {
    double worst_holder = 0.0, worst_triple = 0.0;
    for (int k = 0; k < 32; ++k) {
      GridDensity a = detail::smooth_random_density(sp, rng);
      GridDensity b = detail::smooth_random_density(sp, rng);
      for (double q : cfg.exponents) {
        ExponentPair e(q);
        double lhs = sp.pairing(a, b);
        double rhs = sp.norm(a, e) * sp.norm(b, ExponentPair(e.p));
        worst_holder = std::max(worst_holder, (lhs - rhs) / std::max(rhs, 1e-300));
        GridDensity astar = sp.conjugate(a, e);
        double nq = std::pow(sp.norm(a, e), e.q);
        double pr = sp.pairing(a, astar);
        double np = std::pow(sp.norm(astar, ExponentPair(e.p)), e.p);
        worst_triple = std::max(worst_triple,
                                std::max(std::abs(pr - nq), std::abs(np - nq)) / nq);
      }
    }
    add("prop-of-nbc/holder", "<a,b> <= |a|_q |b|_p on random density pairs",
        worst_holder, 1e-9);
    add("prop-of-nbc/conjugacy-triple", "<h,h*> = |h|_q^q = |h*|_p^p",
        worst_triple, 1e-9);
  }
  {
    double worst = 0.0;
    for (double q : cfg.exponents) {
      GridDensity fstar = sp.conjugate(fd, ExponentPair(q));
      for (std::size_t i = 0; i < fd.size(); ++i)
        worst = std::max(worst, std::abs(fstar[i] - fd[i]));
    }
    add("prop-of-nbc/f-self-conjugate", "f* = f for every exponent", worst, 1e-12);
    add("prop-of-nbc/pairing-mass", "<h,f> = int h",
        std::abs(sp.pairing(h0, fd) - sp.integral(h0)) /
            std::max(sp.integral(h0), 1e-300),
        1e-10);
  }

  // -- operator properties --
  {
    GridDensity Tf = op.apply(fd);
    std::vector<double> d(Tf.size());
    for (std::size_t i = 0; i < Tf.size(); ++i) d[i] = Tf[i] - fd[i];
    add("cT-prop/fixed-point", "T f = f (averaging form)",
        sp.norm(GridDensity(grid, std::move(d), true), two) / fnorm2, 1e-8);
  }
  {
    double drift = 0.0;
    for (const auto& row : trace.rows)
      drift = std::max(drift, std::abs(row.mass - trace.rows[0].mass) /
                                  std::abs(trace.rows[0].mass));
    if (exact)
      add("cT-prop/mass-conservation", "int T^n h = int h over the trace", drift, 1e-6);
    else
      add("cT-prop/mass-conservation",
          "mass drift over the trace (leapfrog defect, report only)", drift, 0.0,
          CheckStatus::Report);
  }
  {
    double worst = 0.0;
    for (std::size_t qi = 0; qi < cfg.exponents.size(); ++qi)
      for (std::size_t n = 1; n < trace.rows.size(); ++n)
        worst = std::max(worst,
                         trace.rows[n].norms[qi] - trace.rows[n - 1].norms[qi]);
    add("cT-prop/norm-monotone", "|T^n h|_q non-increasing for all tracked q",
        worst, exact ? 1e-9 : 1e-4);
  }
  {
    // strictness of the contraction away from the fixed ray
    std::size_t q2 = 0;
    for (std::size_t qi = 0; qi < cfg.exponents.size(); ++qi)
      if (std::abs(cfg.exponents[qi] - 2.0) < 1e-12) q2 = qi;
    double dist = trace.rows[0].errors[q2] / fnorm2;
    if (op.resonant() || dist < 0.1) {
      add("cT-prop/strict-contraction",
          "one-step contraction margin (not applicable here)", 0.0, 0.0,
          CheckStatus::NotApplicable);
    } else {
      double margin = (trace.rows[0].norms[q2] - trace.rows[1].norms[q2]) /
                      trace.rows[0].norms[q2];
      add("cT-prop/strict-contraction",
          "one-step contraction margin >= 1e-4 off the fixed ray", 1e-4 - margin, 0.0);
    }
  }
  {
    double worst = 0.0;
    for (int k = 0; k < 32; ++k) {
      GridDensity h = detail::smooth_random_density(sp, rng);
      GridDensity kk = detail::smooth_random_density(sp, rng);
      double r = std::abs(sp.pairing(op.apply(h), kk) -
                          sp.pairing(h, op.apply_adjoint(kk)));
      ExponentPair e(cfg.exponents.front());
      worst = std::max(worst, r / (sp.norm(h, e) * sp.norm(kk, ExponentPair(e.p))));
    }
    add("cTs/duality", "<T h, k> = <h, T-adjoint k>", worst, exact ? 1e-7 : 1e-3);
  }
  if (op.self_adjoint()) {
    double worst = 0.0;
    for (int k = 0; k < 8; ++k) {
      GridDensity h = detail::smooth_random_density(sp, rng);
      GridDensity a = op.apply(h), b = op.apply_adjoint(h);
      std::vector<double> d(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
      worst = std::max(worst, sp.norm(GridDensity(grid, std::move(d), true), two) /
                                  std::max(sp.norm(h, two), 1e-300));
    }
    add("sigma/self-adjoint", "even g: T-adjoint = T", worst, exact ? 1e-8 : 1e-3);
  } else {
    double worst = 0.0;
    for (int k = 0; k < 8; ++k) {
      GridDensity h = detail::smooth_random_density(sp, rng);
      GridDensity kk = detail::smooth_random_density(sp, rng);
      double r = std::abs(sp.pairing(op.apply_S(h), kk) - sp.pairing(h, op.apply_S(kk)));
      worst = std::max(worst, r / (sp.norm(h, two) * sp.norm(kk, two)));
    }
    add("sigma/S-self-adjoint", "S = T-adjoint o T is self-adjoint", worst,
        exact ? 1e-7 : 1e-3);
  }
  for (double q : cfg.exponents) {
    ExponentPair e(q);
    ConjugacyReport cr = check_conjugacy_inequality(op, h0, 1, e);
    std::ostringstream label;
    label << "cT-h-s-and-cT-hs/q=" << q;
    if (std::abs(q - 2.0) < 1e-12)
      add(label.str(), "q = 2: (T h)* and T(h*) coincide", cr.max_abs_difference, 1e-10);
    else
      add(label.str(), cr.side, cr.max_violation, 1e-8);
  }

  // -- convergence of the iteration --
  {
    const TraceRow& last = trace.rows.back();
    for (std::size_t qi = 0; qi < cfg.exponents.size(); ++qi) {
      double q = cfg.exponents[qi];
      if (q < 2.0) continue;
      std::ostringstream label;
      label << "cor-strong-conv/q=" << q;
      double rel = last.errors[qi] / sp.norm(fd, ExponentPair(q));
      if (op.resonant())
        add(label.str(), "strong convergence (resonant: no mixing)", rel, 0.0,
            CheckStatus::Report);
      else
        add(label.str(), "|T^n h - alpha f|_q -> 0", rel, leapfrog ? 1e-3 : 1e-5);
    }
    double worstpair = 0.0;
    for (std::size_t k = 0; k < last.pairings.size(); ++k)
      worstpair = std::max(worstpair, std::abs(last.pairings[k] -
                                               trace.alpha * trace.family_integrals[k]));
    if (op.resonant())
      add("prop-weak-conv/pairings", "pairing limits (resonant: no mixing)",
          worstpair, 0.0, CheckStatus::Report);
    else
      add("prop-weak-conv/pairings", "<T^n h, b> -> alpha int b over the test family",
          worstpair, leapfrog ? 1e-2 : 1e-5);
    // V_q limit consistency along the tail of the trace
    std::size_t mid = trace.rows.size() / 2;
    double vq = 0.0;
    for (std::size_t qi = 0; qi < cfg.exponents.size(); ++qi)
      vq = std::max(vq, std::abs(trace.rows[mid].norms[qi] - last.norms[qi]) /
                            std::max(last.norms[qi], 1e-300));
    if (op.resonant())
      add("V_q/limit-consistency", "V_q(h) = V_q(T^n h) (resonant trace is constant)",
          vq, 1e-9);
    else
      add("V_q/limit-consistency", "V_q(h) = V_q(T^n h)", vq, leapfrog ? 1e-3 : 1e-5,
          CheckStatus::Report);
  }
  {
    // idempotence of the numerical limit
    GridDensity hend(grid, std::vector<double>(grid.size()), true);
    {
      GridDensity h = h0;
      for (int n = 0; n < cfg.iterations; ++n) h = diagnostic_step(op, h);
      hend = h;
    }
    GridDensity next = diagnostic_step(op, hend);
    std::vector<double> d(next.size());
    for (std::size_t i = 0; i < next.size(); ++i) d[i] = next[i] - hend[i];
    double r = sp.norm(GridDensity(grid, std::move(d), true), two) /
               std::max(sp.norm(hend, two), 1e-300);
    if (op.resonant())
      add("cor-weak-conv/idempotent-limit", "limit is a fixed point (resonant: skipped)",
          r, 0.0, CheckStatus::Report);
    else
      add("cor-weak-conv/idempotent-limit", "T applied to the numerical limit",
          r, leapfrog ? 1e-3 : 1e-7);
  }
  {
    double cov = op.coverage();
    if (op.resonant())
      add("invariance/coverage", "one-step coverage collapses at resonance",
          cov, 0.0, CheckStatus::Report);
    else if (exact)
      add("invariance/coverage", "one-step coverage of the truncated box",
          1.0 - cov, 1e-12);
    else
      add("invariance/coverage",
          "one-step cell occupancy under the momentum quadrature (diagnostic)",
          1.0 - cov, 0.0, CheckStatus::Report);
  }
  if (leapfrog && grid.dim() == 1) {
    add("invariance/fixed-point-defect",
        "direct-form residual |T1 f - f|_2/|f|_2 (leapfrog energy defect)",
        op.fixed_point_defect(), 0.0, CheckStatus::Report);
  }

  // -- spectral report --
  {
    SpectralReport sr = estimate_spectral_gap(op, two);
    std::ofstream os(out_dir / "spectral.txt");
    os << "method\t" << sr.method << "\n";
    os << "rho\t" << detail::fmt(sr.rho) << "\n";
    os << "gap\t" << detail::fmt(sr.gap) << "\n";
    os << "iterations\t" << sr.iterations << "\n";
    os << "residual\t" << detail::fmt(sr.residual) << "\n";
    os << "converged\t" << (sr.converged ? "yes" : "no") << "\n";
    os << "caveat\t" << sr.caveat << "\n";
    res.artifacts.push_back("spectral.txt");
    if (!sr.converged)
      res.warnings.push_back("spectral power iteration did not reach tolerance");
  }

  // -- optional particle cross-validation --
  if (cfg.particles > 0 && grid.dim() == 1) {
    ChainConfig chain(flow, leapfrog ? AcceptRule::MetropolisHastings : AcceptRule::None);
    ParticleEnsemble ens = make_ensemble(h0, static_cast<std::size_t>(cfg.particles),
                                         cfg.seed);
    GridDensity href = h0;
    double mass = sp.integral(h0);
    std::ofstream os(out_dir / "sampler.tsv");
    os << "n\tl1_distance\tmc_error_estimate\tacceptance\n";
    double worst_ratio = 0.0;
    for (int n = 1; n <= cfg.particle_steps; ++n) {
      StepReport srep;
      ens = hmc_step(chain, ens, &srep);
      href = op.apply(href);
      HistogramResult hist = histogram_density(ens, grid);
      double l1 = 0.0, mc = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        double w = grid.weight(i);
        double p = w * href[i] / mass;
        l1 += std::abs(w * hist.density[i] - p);
        mc += std::sqrt(std::max(p * (1.0 - p), 0.0) / cfg.particles);
      }
      os << n << '\t' << detail::fmt(l1) << '\t' << detail::fmt(mc) << '\t'
         << detail::fmt(srep.acceptance_rate) << '\n';
      worst_ratio = std::max(worst_ratio, l1 / std::max(mc, 1e-300));
    }
    res.artifacts.push_back("sampler.tsv");
    add("operator-vs-sampler/l1", "histogram within 3x multinomial error of T^n h",
        worst_ratio, 3.0);
  }

  // -- report + manifest --
  {
    std::ofstream os(out_dir / "lemma_report.tsv");
    os << "label\tstatus\tresidual\ttolerance\tdescription\n";
    for (const auto& row : res.checks)
      os << row.label << '\t' << status_name(row.status) << '\t'
         << detail::fmt(row.residual) << '\t' << detail::fmt(row.tolerance) << '\t'
         << row.description << '\n';
    res.artifacts.push_back("lemma_report.tsv");
  }
  {
    nlohmann::json manifest;
    manifest["version"] = version_string;
    manifest["config"] = config_to_json(cfg);
    manifest["seed"] = cfg.seed;
    manifest["warnings"] = res.warnings;
    manifest["artifacts"] = res.artifacts;
    int pass = 0, fail = 0;
    for (const auto& row : res.checks) {
      if (row.status == CheckStatus::Pass) ++pass;
      if (row.status == CheckStatus::Fail) ++fail;
    }
    manifest["checks"] = {{"pass", pass}, {"fail", fail},
                          {"total", res.checks.size()}};
    std::ofstream os(out_dir / "manifest.json");
    os << manifest.dump(2) << "\n";
    res.artifacts.push_back("manifest.json");
  }
  return res;
}

} // namespace hmclq
