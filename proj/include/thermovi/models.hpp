#pragma once

// Simple closed thermodynamic systems: one mechanical configuration q in R^n
// and a single entropy scalar S, with Lagrangian L = 1/2 v^T M v - U(q, S).

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "thermovi/errors.hpp"

namespace thermovi {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace detail {

inline bool all_finite(const Vector& x) { return x.allFinite(); }

inline std::string describe(const Vector& q, double S) {
  std::ostringstream os;
  os.precision(17);
  os << "q = [";
  for (Eigen::Index i = 0; i < q.size(); ++i) os << (i ? ", " : "") << q[i];
  os << "], S = " << S;
  return os.str();
}

}  // namespace detail

/// Continuous state (q, v, S).
struct ThermoState {
  Vector q;
  Vector v;
  double S = 0.0;
};

inline void validate(const ThermoState& s) {
  if (s.q.size() == 0 || s.q.size() != s.v.size())
    throw InputError("ThermoState: q and v must have equal, nonzero dimension");
  if (!detail::all_finite(s.q) || !detail::all_finite(s.v) || !std::isfinite(s.S))
    throw InputError("ThermoState: non-finite component");
}

/// Potential U(q, S) with its first and second partials.
///
/// Unset members are filled by central differences when the potential is
/// handed to SystemModel (see with_numeric_partials).
struct Potential {
  std::function<double(const Vector&, double)> value;
  std::function<Vector(const Vector&, double)> grad_q;   // dU/dq
  std::function<double(const Vector&, double)> d_S;      // dU/dS = T
  std::function<Matrix(const Vector&, double)> hess_qq;  // d2U/dq2
  std::function<Vector(const Vector&, double)> d2_Sq;    // d2U/dSdq
  std::function<double(const Vector&, double)> d2_SS;   // d2U/dS2
};

/// Force field F(q, v, S) in T*_q Q with partials. d_q and d_v are
/// Jacobians J(i, j) = dF_i / dx_j.
struct ForceField {
  std::function<Vector(const Vector&, const Vector&, double)> value;
  std::function<Matrix(const Vector&, const Vector&, double)> d_q;
  std::function<Matrix(const Vector&, const Vector&, double)> d_v;
  std::function<Vector(const Vector&, const Vector&, double)> d_S;

  static ForceField zero(Eigen::Index n) {
    ForceField f;
    f.value = [n](const Vector&, const Vector&, double) -> Vector { return Vector::Zero(n); };
    f.d_q = [n](const Vector&, const Vector&, double) -> Matrix { return Matrix::Zero(n, n); };
    f.d_v = f.d_q;
    f.d_S = f.value;
    return f;
  }

  /// Force that does not depend on the state.
  static ForceField constant(Vector c) {
    const Eigen::Index n = c.size();
    ForceField f = zero(n);
    f.value = [c = std::move(c)](const Vector&, const Vector&, double) -> Vector { return c; };
    return f;
  }
};

using HeatPower = std::function<double(double)>;

namespace detail {

inline double fd_step(double x, double rel) { return rel * (1.0 + std::abs(x)); }

}  // namespace detail

/// Fills every unset partial of `p` by central differences. Second partials
/// are differenced from the (analytic or numeric) first partials.
inline Potential with_numeric_partials(Potential p, double rel_first = 1e-6,
                                       double rel_second = 1e-4) {
  if (!p.value) throw ModelError("Potential: value function is required");
  const auto U = p.value;
  if (!p.grad_q) {
    p.grad_q = [U, rel_first](const Vector& q, double S) -> Vector {
      Vector g(q.size());
      Vector qp = q, qm = q;
      for (Eigen::Index i = 0; i < q.size(); ++i) {
        const double e = detail::fd_step(q[i], rel_first);
        qp[i] = q[i] + e;
        qm[i] = q[i] - e;
        g[i] = (U(qp, S) - U(qm, S)) / (2 * e);
        qp[i] = qm[i] = q[i];
      }
      return g;
    };
  }
  if (!p.d_S) {
    p.d_S = [U, rel_first](const Vector& q, double S) {
      const double e = detail::fd_step(S, rel_first);
      return (U(q, S + e) - U(q, S - e)) / (2 * e);
    };
  }
  const auto G = p.grad_q;
  const auto T = p.d_S;
  if (!p.hess_qq) {
    p.hess_qq = [G, rel_second](const Vector& q, double S) -> Matrix {
      Matrix H(q.size(), q.size());
      Vector qp = q, qm = q;
      for (Eigen::Index j = 0; j < q.size(); ++j) {
        const double e = detail::fd_step(q[j], rel_second);
        qp[j] = q[j] + e;
        qm[j] = q[j] - e;
        H.col(j) = (G(qp, S) - G(qm, S)) / (2 * e);
        qp[j] = qm[j] = q[j];
      }
      return 0.5 * (H + H.transpose());
    };
  }
  if (!p.d2_Sq) {
    p.d2_Sq = [G, rel_second](const Vector& q, double S) -> Vector {
      const double e = detail::fd_step(S, rel_second);
      return (G(q, S + e) - G(q, S - e)) / (2 * e);
    };
  }
  if (!p.d2_SS) {
    p.d2_SS = [T, rel_second](const Vector& q, double S) {
      const double e = detail::fd_step(S, rel_second);
      return (T(q, S + e) - T(q, S - e)) / (2 * e);
    };
  }
  return p;
}

/// Fills every unset partial of `f` by central differences of its value.
inline ForceField with_numeric_partials(ForceField f, double rel = 1e-6) {
  if (!f.value) throw ModelError("ForceField: value function is required");
  const auto F = f.value;
  if (!f.d_q) {
    f.d_q = [F, rel](const Vector& q, const Vector& v, double S) -> Matrix {
      Matrix J(q.size(), q.size());
      Vector qp = q, qm = q;
      for (Eigen::Index j = 0; j < q.size(); ++j) {
        const double e = detail::fd_step(q[j], rel);
        qp[j] = q[j] + e;
        qm[j] = q[j] - e;
        J.col(j) = (F(qp, v, S) - F(qm, v, S)) / (2 * e);
        qp[j] = qm[j] = q[j];
      }
      return J;
    };
  }
  if (!f.d_v) {
    f.d_v = [F, rel](const Vector& q, const Vector& v, double S) -> Matrix {
      Matrix J(v.size(), v.size());
      Vector vp = v, vm = v;
      for (Eigen::Index j = 0; j < v.size(); ++j) {
        const double e = detail::fd_step(v[j], rel);
        vp[j] = v[j] + e;
        vm[j] = v[j] - e;
        J.col(j) = (F(q, vp, S) - F(q, vm, S)) / (2 * e);
        vp[j] = vm[j] = v[j];
      }
      return J;
    };
  }
  if (!f.d_S) {
    f.d_S = [F, rel](const Vector& q, const Vector& v, double S) -> Vector {
      const double e = detail::fd_step(S, rel);
      return (F(q, v, S + e) - F(q, v, S - e)) / (2 * e);
    };
  }
  return f;
}

struct ModelOptions {
  /// Assert <F^fr(q, v, S), v> <= 0 at every friction evaluation.
  bool check_dissipativity = false;
};

/// Immutable simple-system model: K = 1/2 v^T M v, potential U(q, S),
/// friction and external forces, and an external heat power P_H(t).
///
/// Every evaluation of dU/dS enforces T > 0; a violation throws
/// AssumptionViolation naming the offending point.
class SystemModel {
 public:
  SystemModel(Matrix mass, Potential potential, ForceField friction,
              ForceField external = {}, HeatPower heat_power = {},
              ModelOptions options = {})
      : mass_(std::move(mass)),
        potential_(with_numeric_partials(std::move(potential))),
        friction_(with_numeric_partials(std::move(friction))),
        options_(options) {
    const Eigen::Index n = mass_.rows();
    if (n == 0 || mass_.cols() != n) throw ModelError("SystemModel: mass matrix must be square, n >= 1");
    if (!mass_.allFinite()) throw ModelError("SystemModel: non-finite mass matrix");
    if ((mass_ - mass_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * mass_.cwiseAbs().maxCoeff())
      throw ModelError("SystemModel: mass matrix must be symmetric");
    mass_llt_.compute(mass_);
    if (mass_llt_.info() != Eigen::Success) throw ModelError("SystemModel: mass matrix must be positive definite");
    external_ = external.value ? with_numeric_partials(std::move(external)) : ForceField::zero(n);
    heat_power_ = heat_power ? std::move(heat_power) : HeatPower([](double) { return 0.0; });
  }

  Eigen::Index dim() const { return mass_.rows(); }
  const Matrix& mass() const { return mass_; }
  const ModelOptions& options() const { return options_; }

  /// M^{-1} rhs.
  Vector solve_mass(const Vector& rhs) const { return mass_llt_.solve(rhs); }

  double kinetic(const Vector& v) const { return 0.5 * v.dot(mass_ * v); }

  double potential(const Vector& q, double S) const { return potential_.value(q, S); }
  Vector potential_grad_q(const Vector& q, double S) const { return potential_.grad_q(q, S); }
  Matrix potential_hess_qq(const Vector& q, double S) const { return potential_.hess_qq(q, S); }
  Vector potential_d2_Sq(const Vector& q, double S) const { return potential_.d2_Sq(q, S); }
  double potential_d2_SS(const Vector& q, double S) const { return potential_.d2_SS(q, S); }

  /// dU/dS, checked against T > 0.
  double potential_d_S(const Vector& q, double S) const {
    const double T = potential_.d_S(q, S);
    if (!(T > 0.0))
      throw AssumptionViolation("temperature dU/dS = " + std::to_string(T) +
                                " is not positive at " + detail::describe(q, S));
    return T;
  }

  Vector friction(const Vector& q, const Vector& v, double S) const {
    Vector f = friction_.value(q, v, S);
    if (options_.check_dissipativity) {
      const double p = f.dot(v);
      if (p > 1e-12 * (1.0 + f.norm() * v.norm()))
        throw AssumptionViolation("friction is not dissipative: <F, v> = " + std::to_string(p) +
                                  " at " + detail::describe(q, S));
    }
    return f;
  }
  Matrix friction_d_q(const Vector& q, const Vector& v, double S) const { return friction_.d_q(q, v, S); }
  Matrix friction_d_v(const Vector& q, const Vector& v, double S) const { return friction_.d_v(q, v, S); }
  Vector friction_d_S(const Vector& q, const Vector& v, double S) const { return friction_.d_S(q, v, S); }

  Vector external(const Vector& q, const Vector& v, double S) const { return external_.value(q, v, S); }
  Matrix external_d_q(const Vector& q, const Vector& v, double S) const { return external_.d_q(q, v, S); }
  Matrix external_d_v(const Vector& q, const Vector& v, double S) const { return external_.d_v(q, v, S); }
  Vector external_d_S(const Vector& q, const Vector& v, double S) const { return external_.d_S(q, v, S); }

  double heat_power(double t) const { return heat_power_(t); }

  const Potential& potential_functions() const { return potential_; }
  const ForceField& friction_field() const { return friction_; }
  const ForceField& external_field() const { return external_; }

  /// Optional split of U into its purely thermal part (reported as the
  /// internal energy in trajectory output). Defaults to the full U(q, S).
  SystemModel with_internal_energy(std::function<double(double)> internal) const {
    SystemModel copy = *this;
    copy.internal_ = std::move(internal);
    return copy;
  }
  double internal_energy(const Vector& q, double S) const {
    return internal_ ? internal_(S) : potential(q, S);
  }

 private:
  Matrix mass_;
  Eigen::LLT<Matrix> mass_llt_;
  Potential potential_;
  ForceField friction_;
  ForceField external_;
  HeatPower heat_power_;
  ModelOptions options_;
  std::function<double(double)> internal_;
};

/// L(q, v, S) = 1/2 v^T M v - U(q, S).
inline double lagrangian(const SystemModel& model, const ThermoState& state) {
  validate(state);
  return model.kinetic(state.v) - model.potential(state.q, state.S);
}

/// T = -dL/dS = dU/dS(q, S); throws AssumptionViolation if T <= 0.
inline double temperature(const SystemModel& model, const Vector& q, double S) {
  if (!q.allFinite() || !std::isfinite(S)) throw InputError("temperature: non-finite input");
  return model.potential_d_S(q, S);
}

/// E = <dL/dv, v> - L = 1/2 v^T M v + U(q, S).
inline double total_energy(const SystemModel& model, const ThermoState& state) {
  validate(state);
  return model.kinetic(state.v) + model.potential(state.q, state.S);
}

// --- Mass-spring-friction system in an ideal gas --------------------------

inline constexpr double kGasConstant = 8.314462618;  // J/(mol K)

/// Ideal gas at fixed volume and mole number. U0 = c N0 R T0.
struct IdealGasParams {
  double U0 = 0.0;
  double c = 1.5;
  double N0 = 1.0;
  double R = kGasConstant;
  double S0 = 0.0;
  double T0 = 300.0;
  double V0 = 1.0;

  static IdealGasParams from_temperature(double c, double N0, double R, double S0, double T0,
                                         double V0) {
    return IdealGasParams{c * N0 * R * T0, c, N0, R, S0, T0, V0};
  }

  /// c N0 R, the heat capacity at constant volume.
  double heat_capacity() const { return c * N0 * R; }
};

inline void validate(const IdealGasParams& gp) {
  if (!(gp.c > 0) || !(gp.N0 > 0) || !(gp.R > 0) || !(gp.T0 > 0))
    throw ModelError("IdealGasParams: c, N0, R, T0 must be positive");
  if (!(gp.V0 > 0)) throw ModelError("IdealGasParams: V0 must be positive");
  if (!std::isfinite(gp.S0) || !std::isfinite(gp.U0)) throw ModelError("IdealGasParams: non-finite value");
  const double expected = gp.c * gp.N0 * gp.R * gp.T0;
  if (std::abs(gp.U0 - expected) > 1e-12 * expected)
    throw ModelError("IdealGasParams: U0 must equal c N0 R T0");
}

struct MassSpringParams {
  double m = 1.0;
  double k = 1.0;
  double lambda = 0.0;
};

inline void validate(const MassSpringParams& mp) {
  if (!(mp.m > 0) || !(mp.k > 0)) throw ModelError("MassSpringParams: m and k must be positive");
  if (!(mp.lambda >= 0) || !std::isfinite(mp.lambda)) throw ModelError("MassSpringParams: lambda must be >= 0");
}

namespace detail {

inline double checked_exp(double x) {
  const double r = std::exp(x);
  if (!std::isfinite(r)) throw RangeError("internal energy overflow: exponent " + std::to_string(x));
  return r;
}

}  // namespace detail

/// Internal energy of the gas on the N = N0, V = V0 slice:
/// U(S) = U0 exp((S - S0) / (c R N0)).
inline double internal_energy(const IdealGasParams& gp, double S) {
  return gp.U0 * detail::checked_exp((S - gp.S0) / gp.heat_capacity());
}

/// Full U(S, N, V) = U0 exp((S/N - S0/N0)/(cR)) (N/N0)^(1/c + 1) (V0/V)^(1/c).
inline double internal_energy(const IdealGasParams& gp, double S, double N, double V) {
  return gp.U0 * detail::checked_exp((S / N - gp.S0 / gp.N0) / (gp.c * gp.R)) *
         std::pow(N / gp.N0, 1.0 / gp.c + 1.0) * std::pow(gp.V0 / V, 1.0 / gp.c);
}

/// T(S) = dU/dS = T0 exp((S - S0) / (c R N0)).
inline double gas_temperature(const IdealGasParams& gp, double S) {
  return internal_energy(gp, S) / gp.heat_capacity();
}

/// U(x, S) = 1/2 k x^2 + U_gas(S), F^fr = -lambda v, F^ext as supplied.
inline SystemModel mass_spring_gas_model(const MassSpringParams& mp, const IdealGasParams& gp,
                                         ForceField external = {}, ModelOptions options = {}) {
  validate(mp);
  validate(gp);
  const double k = mp.k;
  const double lambda = mp.lambda;
  const double C = gp.heat_capacity();

  Potential U;
  U.value = [k, gp](const Vector& q, double S) { return 0.5 * k * q.squaredNorm() + internal_energy(gp, S); };
  U.grad_q = [k](const Vector& q, double) -> Vector { return k * q; };
  U.d_S = [gp](const Vector&, double S) { return gas_temperature(gp, S); };
  U.hess_qq = [k](const Vector& q, double) -> Matrix { return k * Matrix::Identity(q.size(), q.size()); };
  U.d2_Sq = [](const Vector& q, double) -> Vector { return Vector::Zero(q.size()); };
  U.d2_SS = [gp, C](const Vector&, double S) { return gas_temperature(gp, S) / C; };

  ForceField fr;
  fr.value = [lambda](const Vector&, const Vector& v, double) -> Vector { return -lambda * v; };
  fr.d_q = [](const Vector& q, const Vector&, double) -> Matrix { return Matrix::Zero(q.size(), q.size()); };
  fr.d_v = [lambda](const Vector& q, const Vector&, double) -> Matrix {
    return -lambda * Matrix::Identity(q.size(), q.size());
  };
  fr.d_S = [](const Vector& q, const Vector&, double) -> Vector { return Vector::Zero(q.size()); };

  SystemModel model(mp.m * Matrix::Identity(1, 1), std::move(U), std::move(fr), std::move(external), {},
                    options);
  return model.with_internal_energy([gp](double S) { return internal_energy(gp, S); });
}

}  // namespace thermovi
