#pragma once

// Discrete Legendre transforms, the discrete one-forms on (Q x Q) x (R x R),
// and a finite-difference check of the structure identity
//
//   (F^{(N-1)})^* Omega^+ - Omega^- = -d sum_{k=0}^{N-1} (F^{(k)})^* omega^{fr+ext+tau},
//   Omega^{+-} = -d Theta^{+-},
//
// evaluated in the chart (q0, q1, S0) of C_K^d, where S1 is recovered by
// solving P_d = 0.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "thermovi/errors.hpp"
#include "thermovi/integrators.hpp"
#include "thermovi/scheme.hpp"

namespace thermovi {

enum class Side { Minus, Plus };

struct CotangentPoint {
  Vector q;
  Vector p;
};

/// FL^-(r) = (q0, -D1 L_d - F^-),  FL^+(r) = (q1, D2 L_d + F^+).
inline CotangentPoint discrete_legendre(const SchemeOps& scheme, const StepWindow& w, Side side) {
  const LagrangianPartials d = scheme.partials(w);
  const DiscreteForces f = scheme.forces(w);
  if (side == Side::Minus) return {w.q0, -d.d1 - f.minus()};
  return {w.q1, d.d2 + f.plus()};
}

/// Tangent vector (dq0, dq1, dS0, dS1) at a window.
struct WindowTangent {
  Vector dq0;
  Vector dq1;
  double dS0 = 0.0;
  double dS1 = 0.0;
};

enum class OneForm { ThetaMinus, ThetaPlus, OmegaFriction, OmegaExternal, OmegaTau, OmegaTotal };

inline double one_form_eval(OneForm form, const SchemeOps& scheme, const StepWindow& w, const WindowTangent& t) {
  switch (form) {
    case OneForm::ThetaMinus:
      return discrete_legendre(scheme, w, Side::Minus).p.dot(t.dq0);
    case OneForm::ThetaPlus:
      return discrete_legendre(scheme, w, Side::Plus).p.dot(t.dq1);
    case OneForm::OmegaFriction: {
      const DiscreteForces f = scheme.forces(w);
      return f.friction_minus.dot(t.dq0) + f.friction_plus.dot(t.dq1);
    }
    case OneForm::OmegaExternal: {
      const DiscreteForces f = scheme.forces(w);
      return f.external_minus.dot(t.dq0) + f.external_plus.dot(t.dq1);
    }
    case OneForm::OmegaTau: {
      const LagrangianPartials d = scheme.partials(w);
      return -d.d3 * t.dS0 - d.d4 * t.dS1;
    }
    case OneForm::OmegaTotal: {
      const DiscreteForces f = scheme.forces(w);
      const LagrangianPartials d = scheme.partials(w);
      return f.minus().dot(t.dq0) + f.plus().dot(t.dq1) - d.d3 * t.dS0 - d.d4 * t.dS1;
    }
  }
  throw InputError("one_form_eval: unknown form");
}

// --- Chart on C_K^d -------------------------------------------------------

/// Chart coordinates c = (q0, q1, S0) in R^{2n+1}.
inline Vector chart_coordinates(const StepWindow& w) {
  const Eigen::Index n = w.q0.size();
  Vector c(2 * n + 1);
  c.head(n) = w.q0;
  c.segment(n, n) = w.q1;
  c[2 * n] = w.S0;
  return c;
}

/// Lifts a chart point to C_K^d by solving P_d = 0 for S1.
inline StepWindow chart_lift(const SchemeOps& scheme, const Vector& c, const NewtonOptions& opts = {}) {
  const Eigen::Index n = scheme.dim();
  if (c.size() != 2 * n + 1) throw InputError("chart_lift: chart point must have dimension 2n + 1");
  StepWindow w = initialize(scheme, c.head(n), c.segment(n, n), c[2 * n], opts);
  if (scheme.constraint_d4(w) == 0.0) throw RegularityError("chart_lift: D4 P_d vanishes at the lifted point");
  return w;
}

/// Windows W_0 .. W_{N-1} of the orbit through the chart point.
inline std::vector<StepWindow> chart_flow(const SchemeOps& scheme, const Vector& chart_point, int N,
                                          const NewtonOptions& opts = {}) {
  if (N < 1) throw InputError("chart_flow: need N >= 1");
  return orbit(scheme, chart_lift(scheme, chart_point, opts), N, opts);
}

// --- Exterior derivative in a flat chart -----------------------------------

/// A one-form on a chart: alpha(point)(direction).
using ChartOneForm = std::function<double(const Vector& point, const Vector& direction)>;

/// d alpha(u, v) = D_u[alpha(.)(v)] - D_v[alpha(.)(u)] for constant fields u,
/// v, with central differences of step rel_step * (1 + |p|_inf).
inline double two_form_eval(const ChartOneForm& alpha, const Vector& p, const Vector& u, const Vector& v,
                            double rel_step = 1e-5) {
  if (p.size() != u.size() || p.size() != v.size()) throw InputError("two_form_eval: dimension mismatch");
  const double e = rel_step * (1.0 + p.lpNorm<Eigen::Infinity>());
  const double du_v = (alpha(p + e * u, v) - alpha(p - e * u, v)) / (2.0 * e);
  const double dv_u = (alpha(p + e * v, u) - alpha(p - e * v, u)) / (2.0 * e);
  const double r = du_v - dv_u;
  if (!std::isfinite(r)) throw InputError("two_form_eval: non-finite evaluation");
  return r;
}

struct FiniteDifferenceSteps {
  double flow = 1e-6;      // differentials of the chart flow
  double exterior = 1e-5;  // outer differences of the exterior derivative
};

struct StructureCheckReport {
  int N = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double scale = 1.0;

  double relative() const { return residual / scale; }
};

namespace detail {

/// Chart one-forms (F^{(N-1)})^* Theta^+, Theta^- (lifted) and
/// sum_k (F^{(k)})^* omega evaluated at one chart point along one direction.
struct PulledBackForms {
  double theta_plus = 0.0;
  double theta_minus = 0.0;
  double omega_sum = 0.0;
};

inline WindowTangent window_difference(const StepWindow& a, const StepWindow& b, double inv) {
  return WindowTangent{(a.q0 - b.q0) * inv, (a.q1 - b.q1) * inv, (a.S0 - b.S0) * inv, (a.S1 - b.S1) * inv};
}

inline PulledBackForms pulled_back(const SchemeOps& scheme, const Vector& c, const Vector& dir, int N,
                                   double flow_rel, OneForm source, const NewtonOptions& opts) {
  const double e = flow_rel * (1.0 + c.lpNorm<Eigen::Infinity>());
  const auto base = chart_flow(scheme, c, N, opts);
  const auto fwd = chart_flow(scheme, c + e * dir, N, opts);
  const auto bwd = chart_flow(scheme, c - e * dir, N, opts);
  const double inv = 1.0 / (2.0 * e);
  PulledBackForms out;
  for (int k = 0; k < N; ++k) {
    const WindowTangent t = window_difference(fwd[k], bwd[k], inv);
    out.omega_sum += one_form_eval(source, scheme, base[k], t);
    if (k == 0) out.theta_minus = one_form_eval(OneForm::ThetaMinus, scheme, base[k], t);
    if (k == N - 1) out.theta_plus = one_form_eval(OneForm::ThetaPlus, scheme, base[k], t);
  }
  return out;
}

}  // namespace detail

/// Evaluates both sides of the structure identity on chart vectors u, v.
/// `source` selects the one-form summed on the right; anything other than
/// OmegaTotal gives a deliberately incomplete identity.
inline StructureCheckReport structure_identity_check(const SchemeOps& scheme, const Vector& chart_point, int N,
                                                     const Vector& u, const Vector& v,
                                                     FiniteDifferenceSteps steps = {},
                                                     const NewtonOptions& opts = {},
                                                     OneForm source = OneForm::OmegaTotal) {
  if (N < 1) throw InputError("structure_identity_check: need N >= 1");
  const Eigen::Index dim = 2 * scheme.dim() + 1;
  if (chart_point.size() != dim || u.size() != dim || v.size() != dim)
    throw InputError("structure_identity_check: chart vectors must have dimension 2n + 1");

  const double e = steps.exterior * (1.0 + chart_point.lpNorm<Eigen::Infinity>());
  auto forms = [&](const Vector& c, const Vector& dir) {
    return detail::pulled_back(scheme, c, dir, N, steps.flow, source, opts);
  };
  const auto pu_v = forms(chart_point + e * u, v);
  const auto mu_v = forms(chart_point - e * u, v);
  const auto pv_u = forms(chart_point + e * v, u);
  const auto mv_u = forms(chart_point - e * v, u);
  const double inv = 1.0 / (2.0 * e);
  auto d = [&](double detail::PulledBackForms::*field) {
    return (pu_v.*field - mu_v.*field) * inv - (pv_u.*field - mv_u.*field) * inv;
  };
  StructureCheckReport rep;
  rep.N = N;
  rep.lhs = -d(&detail::PulledBackForms::theta_plus) + d(&detail::PulledBackForms::theta_minus);
  rep.rhs = -d(&detail::PulledBackForms::omega_sum);
  rep.residual = std::abs(rep.lhs - rep.rhs);
  rep.scale = std::max({std::abs(rep.lhs), std::abs(rep.rhs), 1.0});
  if (!std::isfinite(rep.residual)) throw InputError("structure_identity_check: non-finite evaluation");
  return rep;
}

}  // namespace thermovi
