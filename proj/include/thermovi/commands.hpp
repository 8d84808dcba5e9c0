#pragma once

// Experiment commands behind the command-line runner. Each returns a summary
// struct and streams its text report; callers map outcomes to exit codes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "thermovi/config.hpp"
#include "thermovi/continuous.hpp"
#include "thermovi/geometry.hpp"
#include "thermovi/integrators.hpp"
#include "thermovi/trajectory.hpp"

namespace thermovi {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitSolver = 3, kExitVerification = 4 };

inline constexpr double kStructureTolerance = 1e-4;

inline SchemeOps build_scheme(const RunConfig& cfg) { return build_scheme(cfg.scheme, build_model(cfg), cfg.h); }

inline StepWindow initial_window(const SchemeOps& scheme, const RunConfig& cfg) {
  return initialize(scheme, Vector::Constant(1, cfg.init.x0), Vector::Constant(1, cfg.init.x1), cfg.init.S0);
}

namespace detail {

/// Opens `path` for writing, or returns stdout for "-".
class OutputSink {
 public:
  explicit OutputSink(const std::string& path) {
    if (path != "-") {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw IoError("cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
  void finish() {
    stream().flush();
    if (!stream()) throw IoError("failed writing output");
  }

 private:
  std::ofstream file_;
};

}  // namespace detail

// --- simulate -----------------------------------------------------------------

struct SimulateSummary {
  long rows = 0;
  double max_rel_energy_err = 0.0;
  double final_S = 0.0;
  double final_T = 0.0;
  double wall_seconds = 0.0;
};

inline std::vector<TrajectoryRecord> simulate_rows(const RunConfig& cfg) {
  validate(cfg);
  const SchemeOps scheme = build_scheme(cfg);
  return run(scheme, initial_window(scheme, cfg), cfg.steps);
}

inline SimulateSummary summarize(const std::vector<TrajectoryRecord>& rows) {
  SimulateSummary s;
  s.rows = static_cast<long>(rows.size());
  for (const auto& r : rows) s.max_rel_energy_err = std::max(s.max_rel_energy_err, r.rel_energy_err);
  s.final_S = rows.back().S;
  s.final_T = rows.back().T;
  return s;
}

/// Runs the configured scheme and writes the trajectory CSV to cfg.output
/// (or `csv_override` when given).
inline SimulateSummary cmd_simulate(const RunConfig& cfg, std::ostream& report,
                                    std::ostream* csv_override = nullptr) {
  const auto start = std::chrono::steady_clock::now();
  const auto rows = simulate_rows(cfg);
  SimulateSummary s = summarize(rows);
  if (csv_override) {
    csv::write_trajectory(*csv_override, rows);
  } else {
    detail::OutputSink sink(cfg.output);
    csv::write_trajectory(sink.stream(), rows);
    sink.finish();
  }
  s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report << "scheme            " << to_string(cfg.scheme) << "\n"
         << "steps             " << s.rows << " (h = " << csv::number(cfg.h) << " s)\n"
         << "lambda            " << csv::number(cfg.mass_spring.lambda) << " N s/m\n"
         << "max rel E error   " << csv::number(s.max_rel_energy_err) << "\n"
         << "final S           " << csv::number(s.final_S) << " J/K\n"
         << "final T           " << csv::number(s.final_T) << " K\n"
         << "wall time         " << std::fixed << std::setprecision(3) << s.wall_seconds << " s\n";
  report.unsetf(std::ios::floatfield);
  return s;
}

// --- compare ------------------------------------------------------------------

/// Reference solution sampled on the time grid t_k = k h.
struct ReferenceTrack {
  std::vector<double> x, S, T, U;
  double x_at_h = 0.0;  // reference position at t = h (consistent second point)
};

/// Closed-form reference, or an RK4 reference (step h/8) when the closed
/// form does not apply. `fallback` reports which was used.
inline ReferenceTrack reference_track(const RunConfig& cfg, double h, long rows, bool& fallback) {
  const ExactSolutionParams ep{cfg.mass_spring, cfg.gas, cfg.init.x0, cfg.init.v0};
  ReferenceTrack ref;
  ref.x.resize(rows);
  ref.S.resize(rows);
  ref.T.resize(rows);
  ref.U.resize(rows);
  fallback = false;
  try {
    validate(ep);
  } catch (const RegimeError&) {
    fallback = true;
  }
  const bool thermal_exact = cfg.external_force.kind == ExternalForceSpec::Kind::None;
  if (!thermal_exact) fallback = true;
  if (!fallback) {
    for (long k = 0; k < rows; ++k) {
      const double t = k * h;
      ref.x[k] = exact_position(ep, t).x;
      ref.T[k] = exact_temperature(ep, t);
      ref.S[k] = exact_entropy(ep, t);
      ref.U[k] = cfg.gas.heat_capacity() * ref.T[k];
    }
    ref.x_at_h = exact_position(ep, h).x;
    return ref;
  }
  constexpr int sub = 8;
  const SystemModel model = build_model(cfg);
  ThermoState init{Vector::Constant(1, cfg.init.x0), Vector::Constant(1, cfg.init.v0), cfg.init.S0};
  const auto traj = rk4_trajectory(model, init, h / sub, std::max<long>(rows - 1, 1) * sub);
  for (long k = 0; k < rows; ++k) {
    const auto& r = traj[static_cast<size_t>(k * sub)];
    ref.x[k] = r.q[0];
    ref.S[k] = r.S;
    ref.T[k] = r.T;
    ref.U[k] = r.U;
  }
  ref.x_at_h = traj[sub].q[0];
  return ref;
}

enum class StartMode { Exact, Config };

struct ErrorMaxima {
  double x = 0.0, S = 0.0, T = 0.0, U = 0.0;
};

struct CompareSummary {
  bool fallback = false;
  std::string notice;
  ErrorMaxima errors;                  // at h
  std::optional<ErrorMaxima> refined;  // at h/2, same horizon
  double order_x = 0.0, order_S = 0.0, order_T = 0.0;
};

namespace detail {

inline ErrorMaxima compare_run(const RunConfig& cfg, double h, long rows, StartMode start, bool& fallback,
                               std::ostream* csv_out) {
  const ReferenceTrack ref = reference_track(cfg, h, rows, fallback);
  const SchemeOps scheme = build_scheme(cfg.scheme, build_model(cfg), h);
  const double x1 = start == StartMode::Exact ? ref.x_at_h : cfg.init.x1;
  const StepWindow w0 = initialize(scheme, Vector::Constant(1, cfg.init.x0), Vector::Constant(1, x1), cfg.init.S0);
  const auto traj = run(scheme, w0, rows);
  ErrorMaxima m;
  if (csv_out) *csv_out << "k,t,x,x_ref,x_err,S,S_ref,S_err,T,T_ref,T_err,U,U_ref,U_err\n";
  for (long k = 0; k < rows; ++k) {
    const auto& r = traj[static_cast<size_t>(k)];
    const double ex = std::abs(r.q[0] - ref.x[k]);
    const double eS = std::abs(r.S - ref.S[k]);
    const double eT = std::abs(r.T - ref.T[k]);
    const double eU = std::abs(r.U - ref.U[k]);
    m.x = std::max(m.x, ex);
    m.S = std::max(m.S, eS);
    m.T = std::max(m.T, eT);
    m.U = std::max(m.U, eU);
    if (csv_out) {
      using csv::number;
      *csv_out << k << ',' << number(r.t) << ',' << number(r.q[0]) << ',' << number(ref.x[k]) << ','
               << number(ex) << ',' << number(r.S) << ',' << number(ref.S[k]) << ',' << number(eS) << ','
               << number(r.T) << ',' << number(ref.T[k]) << ',' << number(eT) << ',' << number(r.U) << ','
               << number(ref.U[k]) << ',' << number(eU) << '\n';
    }
  }
  return m;
}

inline double order(double coarse, double fine) {
  if (!(coarse > 0) || !(fine > 0)) return std::numeric_limits<double>::quiet_NaN();
  return std::log2(coarse / fine);
}

}  // namespace detail

/// Numerical vs reference comparison. With `refine`, repeats at h/2 over
/// the same horizon and reports empirical convergence orders.
inline CompareSummary cmd_compare(const RunConfig& cfg, std::ostream& report, std::ostream* csv_out = nullptr,
                                  bool refine = true, StartMode start = StartMode::Exact) {
  validate(cfg);
  CompareSummary s;
  s.errors = detail::compare_run(cfg, cfg.h, cfg.steps, start, s.fallback, csv_out);
  if (s.fallback)
    s.notice = "closed-form solution not applicable (critical/overdamped regime or external force); "
               "using RK4 reference with step h/8";
  if (refine) {
    bool fb = false;
    s.refined = detail::compare_run(cfg, 0.5 * cfg.h, 2 * cfg.steps - 1, start, fb, nullptr);
    s.order_x = detail::order(s.errors.x, s.refined->x);
    s.order_S = detail::order(s.errors.S, s.refined->S);
    s.order_T = detail::order(s.errors.T, s.refined->T);
  }
  using csv::number;
  if (!s.notice.empty()) report << "notice: " << s.notice << "\n";
  report << "scheme        " << to_string(cfg.scheme) << "\n"
         << "reference     " << (s.fallback ? "rk4" : "closed-form") << "\n"
         << "max |x err|   " << number(s.errors.x) << " m\n"
         << "max |S err|   " << number(s.errors.S) << " J/K\n"
         << "max |T err|   " << number(s.errors.T) << " K\n"
         << "max |U err|   " << number(s.errors.U) << " J\n";
  if (s.refined)
    report << "order x       " << number(s.order_x) << "\n"
           << "order S       " << number(s.order_S) << "\n"
           << "order T       " << number(s.order_T) << "\n";
  return s;
}

// --- regularity ---------------------------------------------------------------

struct RegularitySummary {
  std::vector<long> indices;
  std::vector<RegularityReport> reports;
  bool near_singular = false;
};

inline constexpr double kNearSingular = 1e-8;

/// Regularity matrices at the initial window and 10 windows sampled along
/// the configured run.
inline RegularitySummary cmd_regularity(const RunConfig& cfg, std::ostream& report) {
  validate(cfg);
  const SchemeOps scheme = build_scheme(cfg);
  const auto windows = orbit(scheme, initial_window(scheme, cfg), cfg.steps);
  RegularitySummary s;
  s.indices.push_back(0);
  const long n = static_cast<long>(windows.size());
  for (int i = 1; i <= 10; ++i) s.indices.push_back(std::min(n - 1, (n - 1) * i / 10));
  using csv::number;
  report << "scheme " << to_string(cfg.scheme) << ", h = " << number(cfg.h) << "\n";
  for (long idx : s.indices) {
    RegularityReport rep = regularity_matrix(scheme, windows[static_cast<size_t>(idx)]);
    Matrix A = rep.matrix;
    double bound = 1.0;
    for (Eigen::Index i = 0; i < A.rows(); ++i) bound *= A.row(i).norm();
    const double scaled = bound > 0 ? std::abs(rep.determinant) / bound : 0.0;
    const bool flag = !rep.invertible || scaled < kNearSingular;
    s.near_singular = s.near_singular || flag;
    report << "window " << idx << ": A = [";
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      report << (i ? "; " : "");
      for (Eigen::Index j = 0; j < A.cols(); ++j) report << (j ? ", " : "") << number(A(i, j));
    }
    report << "], det = " << number(rep.determinant) << ", D4P_d = " << number(rep.constraint_d4)
           << ", det(schur) = " << number(rep.schur_determinant) << (flag ? "  [NEAR-SINGULAR]" : "") << "\n";
    s.reports.push_back(std::move(rep));
  }
  return s;
}

// --- verify-structure -------------------------------------------------------

struct VerifySummary {
  int N = 0;
  int trials = 0;
  double max_relative = 0.0;
  double tolerance = kStructureTolerance;
  std::vector<StructureCheckReport> reports;
  bool passed() const { return max_relative <= tolerance; }
};

/// Random unit chart vector; entropy component zeroed when `mechanical`.
inline Vector random_chart_vector(std::mt19937_64& rng, Eigen::Index dim, bool mechanical) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector u(dim);
  for (Eigen::Index i = 0; i < dim; ++i) u[i] = normal(rng);
  if (mechanical) u[dim - 1] = 0.0;
  return u / u.norm();
}

/// Structure identity at the configured initial chart point for `trials`
/// seeded random tangent pairs.
inline VerifySummary cmd_verify_structure(const RunConfig& cfg, int N, int trials, std::ostream& report,
                                          bool mechanical = false, double tolerance = kStructureTolerance) {
  validate(cfg);
  if (N < 1 || trials < 1) throw ConfigError("verify-structure: N and trials must be >= 1");
  const SchemeOps scheme = build_scheme(cfg);
  const Vector c = chart_coordinates(initial_window(scheme, cfg));
  std::mt19937_64 rng(cfg.seed);
  VerifySummary s;
  s.N = N;
  s.trials = trials;
  s.tolerance = tolerance;
  for (int t = 0; t < trials; ++t) {
    const Vector u = random_chart_vector(rng, c.size(), mechanical);
    const Vector v = random_chart_vector(rng, c.size(), mechanical);
    const auto rep = structure_identity_check(scheme, c, N, u, v);
    s.max_relative = std::max(s.max_relative, rep.relative());
    s.reports.push_back(rep);
  }
  using csv::number;
  report << "scheme " << to_string(cfg.scheme) << ", N = " << N << ", trials = " << trials
         << (mechanical ? ", entropy directions excluded" : "") << "\n";
  for (size_t i = 0; i < s.reports.size(); ++i) {
    const auto& r = s.reports[i];
    report << "trial " << i << ": lhs = " << number(r.lhs) << ", rhs = " << number(r.rhs)
           << ", residual/scale = " << number(r.relative()) << "\n";
  }
  report << "max residual/scale = " << number(s.max_relative) << " (tolerance " << number(tolerance)
         << ") " << (s.passed() ? "PASS" : "FAIL") << "\n";
  return s;
}

}  // namespace thermovi
