#pragma once

#include <Eigen/Dense>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmclq/diagnostics.hpp"
#include "hmclq/grid.hpp"
#include "hmclq/transfer_op.hpp"

namespace hmclq {

namespace detail {
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
} // namespace detail

/// Text dump: header with grid metadata, then one node value per line.
///
///   hmclq-density 1
///   dim <d>
///   axis <L> <N>      (per axis)
///   <value> ...
inline void write_density(std::ostream& os, const GridDensity& h) {
  const Grid& g = h.grid();
  os << "hmclq-density 1\n";
  os << "dim " << g.dim() << "\n";
  for (int a = 0; a < g.dim(); ++a)
    os << "axis " << detail::fmt(g.half_extent(a)) << " " << g.points(a) << "\n";
  for (double v : h.values()) os << detail::fmt(v) << "\n";
}

inline void write_density(const std::string& path, const GridDensity& h) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_density: cannot open " + path);
  write_density(os, h);
}

inline GridDensity read_density(std::istream& is) {
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != "hmclq-density" || version != 1)
    throw std::runtime_error("read_density: bad header");
  std::string key;
  int dim = 0;
  if (!(is >> key >> dim) || key != "dim") throw std::runtime_error("read_density: bad dim");
  std::vector<double> ext(dim);
  std::vector<int> pts(dim);
  for (int a = 0; a < dim; ++a)
    if (!(is >> key >> ext[a] >> pts[a]) || key != "axis")
      throw std::runtime_error("read_density: bad axis line");
  Grid g(dim, ext, pts);
  std::vector<double> v(g.size());
  for (auto& x : v)
    if (!(is >> x)) throw std::runtime_error("read_density: truncated values");
  return GridDensity(g, std::move(v), true);
}

inline GridDensity read_density(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_density: cannot open " + path);
  return read_density(is);
}

/// Dense row-major text dump of the assembled operator.
inline void write_matrix(const std::string& path, const OperatorMatrix& m) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_matrix: cannot open " + path);
  os << "hmclq-matrix 1\n";
  os << "dim " << m.grid.dim() << "\n";
  for (int a = 0; a < m.grid.dim(); ++a)
    os << "axis " << detail::fmt(m.grid.half_extent(a)) << " " << m.grid.points(a) << "\n";
  os << "rows " << m.mat.rows() << " cols " << m.mat.cols() << "\n";
  for (Eigen::Index i = 0; i < m.mat.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.mat.cols(); ++j) {
      if (j) os << ' ';
      os << detail::fmt(m.mat(i, j));
    }
    os << '\n';
  }
}

/// One row per iteration: n, mass, norms per q, errors per q, pairings.
inline void write_trace(const std::string& path, const ConvergenceTrace& tr) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_trace: cannot open " + path);
  os << "n\tmass";
  for (double q : tr.q_list) os << "\tnorm_q" << q;
  for (double q : tr.q_list) os << "\terr_q" << q;
  for (const auto& nm : tr.family_names) os << "\tpair:" << nm;
  os << "\n";
  for (const auto& row : tr.rows) {
    os << row.n << '\t' << detail::fmt(row.mass);
    for (double v : row.norms) os << '\t' << detail::fmt(v);
    for (double v : row.errors) os << '\t' << detail::fmt(v);
    for (double v : row.pairings) os << '\t' << detail::fmt(v);
    os << '\n';
  }
}

} // namespace hmclq
