#pragma once

// Implicit stepping of the discrete evolution equations
//   D1 L_d(q1, q2, S1, S2) + D2 L_d(q0, q1, S0, S1)
//     + F^-(q1, q2, S1, S2) + F^+(q0, q1, S0, S1) = 0,
//   P_d(q1, q2, S1, S2) = 0,
// by coupled Newton on (q2, S2) with the regularity matrix as Jacobian.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "thermovi/errors.hpp"
#include "thermovi/models.hpp"
#include "thermovi/scheme.hpp"
#include "thermovi/trajectory.hpp"

namespace thermovi {

struct NewtonOptions {
  double tol = 1e-12;  // absolute, on the residual max-norm
  int max_iter = 50;
};

struct RegularityReport {
  StepWindow window;
  Matrix matrix;          // (n+1) x (n+1)
  double determinant = 0.0;
  bool invertible = false;
  Matrix schur;           // n x n block of the rewritten criterion
  double constraint_d4 = 0.0;
  double schur_determinant = 0.0;
};

namespace detail {

inline Matrix assemble(const ResidualJacobian& J) {
  const Eigen::Index n = J.momentum_q.rows();
  Matrix A(n + 1, n + 1);
  A.topLeftCorner(n, n) = J.momentum_q;
  A.topRightCorner(n, 1) = J.momentum_S;
  A.bottomLeftCorner(1, n) = J.constraint_q.transpose();
  A(n, n) = J.constraint_S;
  return A;
}

/// |det| relative to the Hadamard bound prod_i ||row_i||.
inline double scaled_determinant(const Matrix& A, double det) {
  double bound = 1.0;
  for (Eigen::Index i = 0; i < A.rows(); ++i) bound *= A.row(i).norm();
  return bound > 0.0 ? std::abs(det) / bound : 0.0;
}

}  // namespace detail

/// Regularity matrix of the implicit step at window r:
///   [ D2D1 L_d + D2 F^-   D4D1 L_d + D4 F^- ]
///   [ D2 P_d               D4 P_d            ]
/// invertible iff D4 P_d != 0 and the Schur block is invertible.
inline RegularityReport regularity_matrix(const SchemeOps& scheme, const StepWindow& window,
                                          double tolerance = 1e-12) {
  validate(window);
  const ResidualJacobian J = scheme.residual_jacobian(window);
  RegularityReport rep;
  rep.window = window;
  rep.matrix = detail::assemble(J);
  rep.determinant = rep.matrix.determinant();
  rep.constraint_d4 = J.constraint_S;
  if (J.constraint_S != 0.0) {
    rep.schur = J.momentum_q - (J.momentum_S * J.constraint_q.transpose()) / J.constraint_S;
    rep.schur_determinant = rep.schur.determinant();
  } else {
    rep.schur = Matrix::Constant(J.momentum_q.rows(), J.momentum_q.cols(), std::numeric_limits<double>::quiet_NaN());
    rep.schur_determinant = std::numeric_limits<double>::quiet_NaN();
  }
  rep.invertible = std::isfinite(rep.determinant) &&
                   detail::scaled_determinant(rep.matrix, rep.determinant) > tolerance;
  return rep;
}

inline RegularityReport regularity_matrix(SchemeKind kind, const SystemModel& model, double h,
                                          const StepWindow& window) {
  return regularity_matrix(build_scheme(kind, model, h), window);
}

/// Residual of the step equations for the unknown window `next`, given the
/// previous window. Returns the stacked (n + 1) vector.
inline Vector step_residual(const SchemeOps& scheme, const StepWindow& prev, const StepWindow& next) {
  const Eigen::Index n = scheme.dim();
  Vector r(n + 1);
  const DiscreteForces fp = scheme.forces(prev);
  const DiscreteForces fn = scheme.forces(next);
  r.head(n) = scheme.partials(next).d1 + scheme.partials(prev).d2 + fn.minus() + fp.plus();
  r[n] = scheme.constraint(next);
  return r;
}

namespace detail {

inline bool roundoff_update(const Vector& dz, const Vector& z) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (Eigen::Index i = 0; i < z.size(); ++i)
    if (std::abs(dz[i]) > 4.0 * eps * std::abs(z[i])) return false;
  return true;
}

inline StepWindow make_next(const StepWindow& prev, const Vector& z) {
  const Eigen::Index n = prev.q1.size();
  return StepWindow{prev.q1, z.head(n), prev.S1, z[n]};
}

}  // namespace detail

/// One application of the discrete flow: (q0, q1, S0, S1) -> (q1, q2, S1, S2).
inline StepWindow step(const SchemeOps& scheme, const StepWindow& prev, const NewtonOptions& opts = {}) {
  validate(prev);
  const Eigen::Index n = scheme.dim();
  const Vector known = scheme.partials(prev).d2 + scheme.forces(prev).plus();

  auto residual = [&](const StepWindow& next) {
    Vector r(n + 1);
    r.head(n) = scheme.partials(next).d1 + scheme.forces(next).minus() + known;
    r[n] = scheme.constraint(next);
    return r;
  };

  Vector z(n + 1);
  z.head(n) = 2.0 * prev.q1 - prev.q0;
  z[n] = prev.S1 + (prev.S1 - prev.S0);
  StepWindow next = detail::make_next(prev, z);
  Vector r = residual(next);
  double rnorm = r.lpNorm<Eigen::Infinity>();

  for (int it = 0; it < opts.max_iter && rnorm > opts.tol; ++it) {
    const Matrix A = detail::assemble(scheme.residual_jacobian(next));
    Eigen::PartialPivLU<Matrix> lu(A);
    const Vector dz = lu.solve(-r);
    if (!dz.allFinite()) throw RegularityError("step: singular regularity matrix during Newton solve");
    if (detail::roundoff_update(dz, z)) break;

    double damping = 1.0;
    Vector z_try;
    StepWindow trial;
    Vector r_try;
    for (int ls = 0; ls < 30; ++ls) {
      z_try = z + damping * dz;
      trial = detail::make_next(prev, z_try);
      try {
        r_try = residual(trial);
        if (r_try.allFinite() && r_try.lpNorm<Eigen::Infinity>() < rnorm) break;
      } catch (const AssumptionViolation&) {
        // trial left the physical domain; shorten the step
      }
      damping *= 0.5;
    }
    if (r_try.size() == 0 || !r_try.allFinite()) throw StepFailure("step: damped Newton left the domain", rnorm);
    z = z_try;
    next = trial;
    r = r_try;
    rnorm = r.lpNorm<Eigen::Infinity>();
  }

  if (!(rnorm <= opts.tol)) {
    // Accept only if the residual is at the roundoff floor of its own terms.
    const double floor = 1e3 * opts.tol * (1.0 + known.lpNorm<Eigen::Infinity>());
    if (!(rnorm <= floor))
      throw StepFailure("step: Newton did not converge, residual " + std::to_string(rnorm), rnorm);
  }
  const RegularityReport rep = regularity_matrix(scheme, next);
  if (!rep.invertible) throw RegularityError("step: regularity matrix singular at the computed window");
  return next;
}

/// Scheme 1 only: solves the momentum equation for q2 alone (the Verlet
/// L_d and forces never see S2) and then the constraint for S2 explicitly.
inline StepWindow step_staggered_verlet(const SchemeOps& scheme, const StepWindow& prev,
                                        const NewtonOptions& opts = {}) {
  const auto& nodes = scheme.spec();
  if (nodes.lagrangian_nodes.size() != 1 || nodes.constraint_nodes.size() != 1 ||
      nodes.lagrangian_nodes[0].q_weight != 0.0 || nodes.lagrangian_nodes[0].s_weight != 0.0 ||
      nodes.constraint_nodes[0].q_weight != 0.0 || nodes.constraint_nodes[0].s_weight != 0.0)
    throw ModelError("step_staggered_verlet: scheme is not the Verlet discretization");
  validate(prev);
  const Eigen::Index n = scheme.dim();
  const Vector known = scheme.partials(prev).d2 + scheme.forces(prev).plus();
  Vector z(n + 1);
  z.head(n) = 2.0 * prev.q1 - prev.q0;
  z[n] = prev.S1;
  StepWindow next = detail::make_next(prev, z);
  Vector r = scheme.partials(next).d1 + scheme.forces(next).minus() + known;
  for (int it = 0; it < opts.max_iter && r.lpNorm<Eigen::Infinity>() > opts.tol; ++it) {
    const Vector dq = scheme.residual_jacobian(next).momentum_q.partialPivLu().solve(-r);
    if (detail::roundoff_update(dq, next.q1)) break;
    next.q1 += dq;
    r = scheme.partials(next).d1 + scheme.forces(next).minus() + known;
  }
  const double w = nodes.constraint_nodes[0].weight;
  const Vector v = scheme.velocity(next);
  const double T = scheme.model().potential_d_S(next.q0, next.S0);
  const double power = scheme.model().friction(next.q0, v, next.S0).dot(v);
  next.S1 = next.S0 - scheme.h() * (w * power) / (w * T);
  return next;
}

/// Completes (x0, x1, S0) to a window on C_K^d by scalar Newton on
/// P_d(x0, x1, S0, S1) = 0 starting from S1 = S0.
inline StepWindow initialize(const SchemeOps& scheme, const Vector& x0, const Vector& x1, double S0,
                             const NewtonOptions& opts = {}) {
  StepWindow w{x0, x1, S0, S0};
  validate(w);
  double P = scheme.constraint(w);
  for (int it = 0; it < opts.max_iter && std::abs(P) > opts.tol; ++it) {
    const double dP = scheme.constraint_d4(w);
    if (!(dP != 0.0) || !std::isfinite(dP)) throw StepFailure("initialize: D4 P_d vanished", std::abs(P));
    const double dS = -P / dP;
    if (std::abs(dS) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(w.S1)) break;
    w.S1 += dS;
    P = scheme.constraint(w);
  }
  if (!(std::abs(P) <= 1e3 * opts.tol))
    throw StepFailure("initialize: constraint solve did not converge, |P_d| = " + std::to_string(std::abs(P)),
                      std::abs(P));
  return w;
}

inline TrajectoryRecord window_record(const SchemeOps& scheme, const StepWindow& w, long k) {
  TrajectoryRecord rec;
  rec.k = k;
  rec.t = static_cast<double>(k) * scheme.h();
  rec.q = w.q0;
  rec.v = scheme.velocity(w);
  rec.S = w.S0;
  rec.T = scheme.model().potential_d_S(w.q0, w.S0);
  rec.U = scheme.model().internal_energy(w.q0, w.S0);
  rec.E = scheme.discrete_energy(w);
  return rec;
}

/// Orbit of N windows W_0 = init, W_{k+1} = step(W_k).
inline std::vector<StepWindow> orbit(const SchemeOps& scheme, const StepWindow& init, long N,
                                     const NewtonOptions& opts = {}) {
  std::vector<StepWindow> windows;
  windows.reserve(static_cast<size_t>(std::max(N, 1L)));
  windows.push_back(init);
  for (long k = 1; k < N; ++k) {
    try {
      windows.push_back(step(scheme, windows.back(), opts));
    } catch (const StepFailure& e) {
      throw StepFailure(std::string("step ") + std::to_string(k) + ": " + e.what(), e.residual(), k);
    } catch (const Error& e) {
      throw StepFailure(std::string("step ") + std::to_string(k) + ": " + e.what(),
                        std::numeric_limits<double>::quiet_NaN(), k);
    }
  }
  return windows;
}

/// N records, one per window W_0 .. W_{N-1}.
inline std::vector<TrajectoryRecord> run(const SchemeOps& scheme, const StepWindow& init, long N,
                                         const NewtonOptions& opts = {}) {
  if (N < 1) throw InputError("run: need N >= 1");
  std::vector<TrajectoryRecord> rows;
  rows.reserve(static_cast<size_t>(N));
  StepWindow w = init;
  rows.push_back(window_record(scheme, w, 0));
  for (long k = 1; k < N; ++k) {
    try {
      w = step(scheme, w, opts);
      rows.push_back(window_record(scheme, w, k));
    } catch (const StepFailure& e) {
      throw StepFailure(std::string("step ") + std::to_string(k) + ": " + e.what(), e.residual(), k);
    } catch (const Error& e) {
      throw StepFailure(std::string("step ") + std::to_string(k) + ": " + e.what(),
                        std::numeric_limits<double>::quiet_NaN(), k);
    }
  }
  fill_relative_energy_error(rows);
  return rows;
}

}  // namespace thermovi
