#pragma once

// Discrete Lagrangians, discrete forces and discrete phenomenological
// constraints built from affine sampling of one step window.
//
// A window r = (q0, q1, S0, S1) is sampled at nodes
//   q_i = (1 - a_i) q0 + a_i q1,   S_i = (1 - b_i) S0 + b_i S1,
// all sharing the finite-difference velocity v = (q1 - q0)/h and entropy rate
// (S1 - S0)/h. Then
//   L_d   = h sum_i w_i L(q_i, v, S_i)
//   F^-   = h sum_i w_i (1 - a_i) F(q_i, v, S_i)
//   F^+   = h sum_i w_i a_i F(q_i, v, S_i)
//   P_d   = sum_j c_j [ dU/dS(q_j, S_j) (S1 - S0)/h + <F^fr(q_j, v, S_j), v> ]
// with separate node sets for the Lagrangian (w_i) and the constraint (c_j),
// so the discretizing map and the constraint's finite-difference map may be
// chosen independently. C_K^d is the zero set of P_d.

#include <string>
#include <utility>
#include <vector>

#include "thermovi/errors.hpp"
#include "thermovi/models.hpp"

namespace thermovi {

enum class SchemeKind { Verlet1, Midpoint2, Symmetrized3 };

inline const char* to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Verlet1: return "scheme1-verlet";
    case SchemeKind::Midpoint2: return "scheme2-midpoint";
    case SchemeKind::Symmetrized3: return "scheme3-symmetrized";
  }
  return "unknown";
}

/// Point (q0, q1, S0, S1) of the discrete state space (Q x Q) x (R x R).
struct StepWindow {
  Vector q0;
  Vector q1;
  double S0 = 0.0;
  double S1 = 0.0;
};

inline void validate(const StepWindow& w) {
  if (w.q0.size() == 0 || w.q0.size() != w.q1.size()) throw InputError("StepWindow: dimension mismatch");
  if (!w.q0.allFinite() || !w.q1.allFinite() || !std::isfinite(w.S0) || !std::isfinite(w.S1))
    throw InputError("StepWindow: non-finite component");
}

struct SampleNode {
  double q_weight = 0.0;  // a: position of the q sample between q0 and q1
  double s_weight = 0.0;  // b: position of the S sample between S0 and S1
  double weight = 1.0;
};

struct SchemeSpec {
  std::string name;
  std::vector<SampleNode> lagrangian_nodes;
  std::vector<SampleNode> constraint_nodes;
};

/// The finite-difference family phi_alpha: the Lagrangian is sampled at
/// alpha_lagrangian and the constraint at alpha_constraint.
inline SchemeSpec finite_difference_spec(double alpha_lagrangian, double alpha_constraint) {
  if (!(alpha_lagrangian >= 0 && alpha_lagrangian <= 1) || !(alpha_constraint >= 0 && alpha_constraint <= 1))
    throw ModelError("finite_difference_spec: alpha must lie in [0, 1]");
  return SchemeSpec{"alpha(" + std::to_string(alpha_lagrangian) + "," + std::to_string(alpha_constraint) + ")",
                    {{alpha_lagrangian, alpha_lagrangian, 1.0}},
                    {{alpha_constraint, alpha_constraint, 1.0}}};
}

inline SchemeSpec scheme_spec(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Verlet1:
      return {to_string(kind), {{0.0, 0.0, 1.0}}, {{0.0, 0.0, 1.0}}};
    case SchemeKind::Midpoint2:
      return {to_string(kind), {{0.5, 0.5, 1.0}}, {{0.5, 0.5, 1.0}}};
    case SchemeKind::Symmetrized3:
      // Constraint keeps the un-averaged endpoint sum.
      return {to_string(kind), {{0.0, 0.0, 0.5}, {1.0, 1.0, 0.5}}, {{0.0, 0.0, 1.0}, {1.0, 1.0, 1.0}}};
  }
  throw ModelError("unknown scheme kind");
}

struct LagrangianPartials {
  Vector d1;  // D1 L_d
  Vector d2;  // D2 L_d
  double d3 = 0.0;
  double d4 = 0.0;
};

struct DiscreteForces {
  Vector friction_minus, friction_plus;
  Vector external_minus, external_plus;

  Vector minus() const { return friction_minus + external_minus; }
  Vector plus() const { return friction_plus + external_plus; }
};

/// Derivatives of the step residual with respect to (q1, S1) of the window it
/// is evaluated on: the blocks of the regularity matrix.
struct ResidualJacobian {
  Matrix momentum_q;    // D2 D1 L_d + D2 F^-
  Vector momentum_S;    // D4 D1 L_d + D4 F^-
  Vector constraint_q;  // D2 P_d
  double constraint_S = 0.0;  // D4 P_d
};

/// Immutable bundle of one discretization: L_d, F^{fr,ext +-} and P_d with
/// the partials the stepper and the geometry checks consume.
class SchemeOps {
 public:
  SchemeOps(SchemeSpec spec, SystemModel model, double h)
      : spec_(std::move(spec)), model_(std::move(model)), h_(h) {
    if (!(h_ > 0) || !std::isfinite(h_)) throw ModelError("SchemeOps: time step must be positive");
    if (spec_.lagrangian_nodes.empty() || spec_.constraint_nodes.empty())
      throw ModelError("SchemeOps: scheme needs at least one sample node");
    for (const auto* nodes : {&spec_.lagrangian_nodes, &spec_.constraint_nodes})
      for (const auto& n : *nodes)
        if (!(n.q_weight >= 0 && n.q_weight <= 1 && n.s_weight >= 0 && n.s_weight <= 1))
          throw ModelError("SchemeOps: sample weights must lie in [0, 1]");
    lagrangian_weight_ = 0.0;
    for (const auto& n : spec_.lagrangian_nodes) lagrangian_weight_ += n.weight;
  }

  double h() const { return h_; }
  Eigen::Index dim() const { return model_.dim(); }
  const SystemModel& model() const { return model_; }
  const SchemeSpec& spec() const { return spec_; }

  Vector velocity(const StepWindow& w) const { return (w.q1 - w.q0) / h_; }

  double discrete_lagrangian(const StepWindow& w) const {
    const Vector v = velocity(w);
    double sum = 0.0;
    for (const auto& n : spec_.lagrangian_nodes) {
      const auto [q, S] = sample(w, n);
      sum += n.weight * (model_.kinetic(v) - model_.potential(q, S));
    }
    return h_ * sum;
  }

  LagrangianPartials partials(const StepWindow& w) const {
    const Vector p = lagrangian_weight_ * (model_.mass() * velocity(w));
    LagrangianPartials d{-p, p, 0.0, 0.0};
    for (const auto& n : spec_.lagrangian_nodes) {
      const auto [q, S] = sample(w, n);
      const Vector g = model_.potential_grad_q(q, S);
      const double T = model_.potential_d_S(q, S);
      d.d1 -= h_ * n.weight * (1.0 - n.q_weight) * g;
      d.d2 -= h_ * n.weight * n.q_weight * g;
      d.d3 -= h_ * n.weight * (1.0 - n.s_weight) * T;
      d.d4 -= h_ * n.weight * n.s_weight * T;
    }
    return d;
  }

  DiscreteForces forces(const StepWindow& w) const {
    const Eigen::Index n = dim();
    const Vector v = velocity(w);
    DiscreteForces f{Vector::Zero(n), Vector::Zero(n), Vector::Zero(n), Vector::Zero(n)};
    for (const auto& node : spec_.lagrangian_nodes) {
      const auto [q, S] = sample(w, node);
      const Vector fr = model_.friction(q, v, S);
      const Vector ext = model_.external(q, v, S);
      const double lo = h_ * node.weight * (1.0 - node.q_weight);
      const double hi = h_ * node.weight * node.q_weight;
      f.friction_minus += lo * fr;
      f.friction_plus += hi * fr;
      f.external_minus += lo * ext;
      f.external_plus += hi * ext;
    }
    return f;
  }

  /// P_d(r); zero on C_K^d.
  double constraint(const StepWindow& w) const {
    const Vector v = velocity(w);
    const double rate = (w.S1 - w.S0) / h_;
    double sum = 0.0;
    for (const auto& n : spec_.constraint_nodes) {
      const auto [q, S] = sample(w, n);
      sum += n.weight * (model_.potential_d_S(q, S) * rate + model_.friction(q, v, S).dot(v));
    }
    return sum;
  }

  /// D4 P_d(r).
  double constraint_d4(const StepWindow& w) const {
    const Vector v = velocity(w);
    const double rate = (w.S1 - w.S0) / h_;
    double sum = 0.0;
    for (const auto& n : spec_.constraint_nodes) {
      const auto [q, S] = sample(w, n);
      sum += n.weight * (n.s_weight * model_.potential_d2_SS(q, S) * rate + model_.potential_d_S(q, S) / h_ +
                         n.s_weight * model_.friction_d_S(q, v, S).dot(v));
    }
    return sum;
  }

  ResidualJacobian residual_jacobian(const StepWindow& w) const {
    const Eigen::Index dn = dim();
    const Vector v = velocity(w);
    const double rate = (w.S1 - w.S0) / h_;
    ResidualJacobian J{-(lagrangian_weight_ / h_) * model_.mass(), Vector::Zero(dn), Vector::Zero(dn), 0.0};
    for (const auto& n : spec_.lagrangian_nodes) {
      const auto [q, S] = sample(w, n);
      const double a = n.q_weight, b = n.s_weight, wt = n.weight;
      const Matrix dFq = model_.friction_d_q(q, v, S) + model_.external_d_q(q, v, S);
      const Matrix dFv = model_.friction_d_v(q, v, S) + model_.external_d_v(q, v, S);
      const Vector dFS = model_.friction_d_S(q, v, S) + model_.external_d_S(q, v, S);
      J.momentum_q -= h_ * wt * (1.0 - a) * a * model_.potential_hess_qq(q, S);
      J.momentum_q += h_ * wt * (1.0 - a) * (a * dFq + dFv / h_);
      J.momentum_S -= h_ * wt * (1.0 - a) * b * model_.potential_d2_Sq(q, S);
      J.momentum_S += h_ * wt * (1.0 - a) * b * dFS;
    }
    for (const auto& n : spec_.constraint_nodes) {
      const auto [q, S] = sample(w, n);
      const double a = n.q_weight, b = n.s_weight, c = n.weight;
      const Vector fr = model_.friction(q, v, S);
      const Matrix dFq = model_.friction_d_q(q, v, S);
      const Matrix dFv = model_.friction_d_v(q, v, S);
      J.constraint_q += c * (a * model_.potential_d2_Sq(q, S) * rate +
                             (a * dFq + dFv / h_).transpose() * v + fr / h_);
      J.constraint_S += c * (b * model_.potential_d2_SS(q, S) * rate + model_.potential_d_S(q, S) / h_ +
                             b * model_.friction_d_S(q, v, S).dot(v));
    }
    return J;
  }

  /// Scheme-consistent sample of E = 1/2 v^T M v + U over the Lagrangian
  /// nodes (weighted average).
  double discrete_energy(const StepWindow& w) const {
    const Vector v = velocity(w);
    double sum = 0.0;
    for (const auto& n : spec_.lagrangian_nodes) {
      const auto [q, S] = sample(w, n);
      sum += n.weight * (model_.kinetic(v) + model_.potential(q, S));
    }
    return sum / lagrangian_weight_;
  }

 private:
  static std::pair<Vector, double> sample(const StepWindow& w, const SampleNode& n) {
    // Exact endpoints for a = 0 and a = 1 keep the sampled point bit-identical
    // to q0 or q1.
    Vector q = n.q_weight == 0.0 ? w.q0 : n.q_weight == 1.0 ? w.q1 : Vector((1.0 - n.q_weight) * w.q0 + n.q_weight * w.q1);
    const double S = n.s_weight == 0.0 ? w.S0 : n.s_weight == 1.0 ? w.S1 : (1.0 - n.s_weight) * w.S0 + n.s_weight * w.S1;
    return {std::move(q), S};
  }

  SchemeSpec spec_;
  SystemModel model_;
  double h_;
  double lagrangian_weight_ = 1.0;
};

inline SchemeOps build_scheme(const SchemeSpec& spec, const SystemModel& model, double h) {
  return SchemeOps(spec, model, h);
}

inline SchemeOps build_scheme(SchemeKind kind, const SystemModel& model, double h) {
  return SchemeOps(scheme_spec(kind), model, h);
}

}  // namespace thermovi
