#pragma once

// Continuous-time reference: the coupled mechanical/thermal ODE, a fixed-step
// RK4 integrator for it, and the closed-form solution of the damped
// mass-spring system in an ideal gas.

#include <cmath>
#include <vector>

#include "thermovi/errors.hpp"
#include "thermovi/models.hpp"
#include "thermovi/trajectory.hpp"

namespace thermovi {

struct ThermoRate {
  Vector dq;
  Vector dv;
  double dS = 0.0;
};

/// dq/dt = v, M dv/dt = -dU/dq + F^ext + F^fr, T dS/dt = P_H(t) - <F^fr, v>.
inline ThermoRate evolution_rhs(const SystemModel& model, const ThermoState& state, double t) {
  validate(state);
  const double T = model.potential_d_S(state.q, state.S);
  const Vector fr = model.friction(state.q, state.v, state.S);
  const Vector force = -model.potential_grad_q(state.q, state.S) + model.external(state.q, state.v, state.S) + fr;
  ThermoRate r;
  r.dq = state.v;
  r.dv = model.solve_mass(force);
  r.dS = (model.heat_power(t) - fr.dot(state.v)) / T;
  return r;
}

namespace detail {

inline ThermoState advance(const ThermoState& s, const ThermoRate& r, double dt) {
  return ThermoState{s.q + dt * r.dq, s.v + dt * r.dv, s.S + dt * r.dS};
}

inline TrajectoryRecord continuous_record(const SystemModel& model, const ThermoState& s, long k, double t) {
  TrajectoryRecord rec;
  rec.k = k;
  rec.t = t;
  rec.q = s.q;
  rec.v = s.v;
  rec.S = s.S;
  rec.T = model.potential_d_S(s.q, s.S);
  rec.U = model.internal_energy(s.q, s.S);
  rec.E = total_energy(model, s);
  return rec;
}

}  // namespace detail

/// Classical RK4 with fixed step h. Returns N + 1 records (k = 0..N).
inline std::vector<TrajectoryRecord> rk4_trajectory(const SystemModel& model, const ThermoState& init,
                                                    double h, long N) {
  if (!(h > 0) || N < 1) throw InputError("rk4_trajectory: need h > 0 and N >= 1");
  validate(init);
  std::vector<TrajectoryRecord> rows;
  rows.reserve(static_cast<size_t>(N) + 1);
  ThermoState s = init;
  long k = 0;
  try {
    rows.push_back(detail::continuous_record(model, s, 0, 0.0));
    for (k = 1; k <= N; ++k) {
      const double t = (k - 1) * h;
      const ThermoRate k1 = evolution_rhs(model, s, t);
      const ThermoRate k2 = evolution_rhs(model, detail::advance(s, k1, 0.5 * h), t + 0.5 * h);
      const ThermoRate k3 = evolution_rhs(model, detail::advance(s, k2, 0.5 * h), t + 0.5 * h);
      const ThermoRate k4 = evolution_rhs(model, detail::advance(s, k3, h), t + h);
      s.q += (h / 6.0) * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq);
      s.v += (h / 6.0) * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
      s.S += (h / 6.0) * (k1.dS + 2.0 * k2.dS + 2.0 * k3.dS + k4.dS);
      rows.push_back(detail::continuous_record(model, s, k, k * h));
    }
  } catch (const AssumptionViolation& e) {
    throw AssumptionViolation("rk4_trajectory step " + std::to_string(k) + ": " + e.what());
  }
  fill_relative_energy_error(rows);
  return rows;
}

// --- Closed-form solution (no external force, P_H = 0) ---------------------

/// Underdamped mass-spring-friction system in an ideal gas.
struct ExactSolutionParams {
  MassSpringParams mp;
  IdealGasParams gp;
  double x0 = 0.0;
  double v0 = 0.0;

  double kappa() const { return mp.lambda / (2.0 * mp.m); }
  double omega0() const { return std::sqrt(mp.k / mp.m); }
  double omega() const { return std::sqrt(omega0() * omega0() - kappa() * kappa()); }
};

/// Throws RegimeError unless kappa < omega0 (lambda^2 < 4 k m).
inline void validate(const ExactSolutionParams& p) {
  validate(p.mp);
  validate(p.gp);
  const double disc = 4.0 * p.mp.k * p.mp.m - p.mp.lambda * p.mp.lambda;
  if (!(disc > 0.0))
    throw RegimeError("closed-form solution requires the underdamped regime kappa < omega0 (lambda^2 < 4km)");
}

struct PhasePoint {
  double x = 0.0;
  double v = 0.0;
};

inline PhasePoint exact_position(const ExactSolutionParams& p, double t) {
  validate(p);
  const double kap = p.kappa();
  const double w = p.omega();
  const double decay = std::exp(-kap * t);
  const double c = std::cos(w * t);
  const double s = std::sin(w * t);
  const double b = (p.v0 + kap * p.x0) / w;
  return {decay * (p.x0 * c + b * s), decay * (p.v0 * c - (kap * b + p.x0 * w) * s)};
}

/// f(t) = lambda * integral_0^t xdot(s)^2 ds, the energy dissipated into heat.
inline double exact_dissipated(const ExactSolutionParams& p, double t) {
  validate(p);
  const double m = p.mp.m, k = p.mp.k, lam = p.mp.lambda;
  const double x0 = p.x0, v0 = p.v0;
  const double disc = 4.0 * k * m - lam * lam;
  const double w2t = 2.0 * p.omega() * t;
  const double mech0 = 0.5 * m * v0 * v0 + 0.5 * k * x0 * x0;
  const double bracket = 4.0 * k * m * (m * v0 * v0 + lam * v0 * x0 + k * x0 * x0) -
                         lam * (v0 * v0 * lam * m + 4.0 * v0 * m * k * x0 + lam * k * x0 * x0) * std::cos(w2t) -
                         lam * (m * v0 * v0 - k * x0 * x0) * std::sqrt(disc) * std::sin(w2t);
  return mech0 - std::exp(-lam / m * t) * bracket / (2.0 * disc);
}

/// T(t) = T0 + f(t) / (c N0 R).
inline double exact_temperature(const ExactSolutionParams& p, double t) {
  return p.gp.T0 + exact_dissipated(p, t) / p.gp.heat_capacity();
}

/// S(t) = S0 + c N0 R ln(T(t) / T0).
inline double exact_entropy(const ExactSolutionParams& p, double t) {
  const double T = exact_temperature(p, t);
  return p.gp.S0 + p.gp.heat_capacity() * std::log(T / p.gp.T0);
}

}  // namespace thermovi
