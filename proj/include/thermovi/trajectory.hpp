#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "thermovi/models.hpp"

namespace thermovi {

/// One row of trajectory diagnostics.
///
/// For discrete runs `v` is the discrete velocity (q_{k+1} - q_k)/h and `E`
/// the scheme-consistent energy sample; for the continuous reference they are
/// the true velocity and energy.
struct TrajectoryRecord {
  long k = 0;
  double t = 0.0;
  Vector q;
  Vector v;
  double S = 0.0;
  double T = 0.0;
  double U = 0.0;  // internal energy
  double E = 0.0;
  double rel_energy_err = 0.0;
};

/// Fills rel_energy_err = |E - E_row0| / |E_row0|.
inline void fill_relative_energy_error(std::vector<TrajectoryRecord>& rows) {
  if (rows.empty()) return;
  const double E0 = rows.front().E;
  for (auto& r : rows) r.rel_energy_err = std::abs(r.E - E0) / std::abs(E0);
}

namespace csv {

/// Shortest text that is at least 17 significant digits (round-trip exact).
inline std::string number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline const char* const kTrajectoryHeader = "k,t,q,v,S,T,U,E,rel_energy_err";

/// Writes the header and one row per record. For n > 1 the q and v columns
/// expand to q_0..q_{n-1} and v_0..v_{n-1}.
inline void write_trajectory(std::ostream& os, const std::vector<TrajectoryRecord>& rows) {
  const Eigen::Index n = rows.empty() ? 1 : rows.front().q.size();
  if (n == 1) {
    os << kTrajectoryHeader << '\n';
  } else {
    os << "k,t";
    for (Eigen::Index i = 0; i < n; ++i) os << ",q_" << i;
    for (Eigen::Index i = 0; i < n; ++i) os << ",v_" << i;
    os << ",S,T,U,E,rel_energy_err\n";
  }
  for (const auto& r : rows) {
    os << r.k << ',' << number(r.t);
    for (Eigen::Index i = 0; i < r.q.size(); ++i) os << ',' << number(r.q[i]);
    for (Eigen::Index i = 0; i < r.v.size(); ++i) os << ',' << number(r.v[i]);
    os << ',' << number(r.S) << ',' << number(r.T) << ',' << number(r.U) << ',' << number(r.E) << ','
       << number(r.rel_energy_err) << '\n';
  }
}

}  // namespace csv

}  // namespace thermovi
