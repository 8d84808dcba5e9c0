#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace thermovi;
using testing_support::coupled_model;

namespace {

constexpr SchemeKind kAll[] = {SchemeKind::Verlet1, SchemeKind::Midpoint2, SchemeKind::Symmetrized3};

IdealGasParams case1_gas() { return IdealGasParams::from_temperature(1.5, 1.0, kGasConstant, 0.0, 300.0, 2.494e-2); }

SchemeOps example_scheme(SchemeKind kind, double lambda, double h = 1e-3) {
  return build_scheme(kind, mass_spring_gas_model({5.0, 5.0, lambda}, case1_gas()), h);
}

Vector unit(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  Vector u(n);
  for (auto& x : u) x = g(rng);
  return u / u.norm();
}

}  // namespace

TEST(DiscreteLegendre, VerletMomenta) {
  const double h = 1e-2;
  const auto scheme = example_scheme(SchemeKind::Verlet1, 0.4, h);
  const StepWindow w{Vector::Constant(1, 0.3), Vector::Constant(1, 0.28), 0.0, 1e-6};
  const double v = (0.28 - 0.3) / h;
  const auto minus = discrete_legendre(scheme, w, Side::Minus);
  const auto plus = discrete_legendre(scheme, w, Side::Plus);
  EXPECT_EQ(minus.q[0], 0.3);
  EXPECT_EQ(plus.q[0], 0.28);
  EXPECT_NEAR(minus.p[0], 5.0 * v + h * 5.0 * 0.3 + h * 0.4 * v, 1e-13);
  EXPECT_NEAR(plus.p[0], 5.0 * v, 1e-13);
}

TEST(DiscreteLegendre, MomentumMatchingAlongOrbits) {
  for (auto kind : kAll) {
    const auto scheme = build_scheme(kind, coupled_model(), 0.01);
    const auto ws = orbit(scheme, initialize(scheme, Vector{{0.5, -0.3}}, Vector{{0.49, -0.29}}, 0.0), 50);
    for (size_t k = 0; k + 1 < ws.size(); ++k) {
      const auto p_plus = discrete_legendre(scheme, ws[k], Side::Plus).p;
      const auto p_minus = discrete_legendre(scheme, ws[k + 1], Side::Minus).p;
      EXPECT_LT((p_plus - p_minus).lpNorm<Eigen::Infinity>(), 1e-11) << to_string(kind);
    }
  }
}

TEST(OneForms, TotalIsTheSumOfItsParts) {
  const auto base = coupled_model();
  const SystemModel model(base.mass(), base.potential_functions(), base.friction_field(),
                          ForceField::constant(Vector{{0.2, 0.1}}));
  const auto scheme = build_scheme(SchemeKind::Midpoint2, model, 0.05);
  const StepWindow w{Vector{{0.1, -0.2}}, Vector{{0.3, 0.05}}, 0.02, 0.07};
  const WindowTangent t{Vector{{0.3, -1.0}}, Vector{{0.7, 0.2}}, 0.4, -0.9};
  const double parts = one_form_eval(OneForm::OmegaFriction, scheme, w, t) +
                       one_form_eval(OneForm::OmegaExternal, scheme, w, t) +
                       one_form_eval(OneForm::OmegaTau, scheme, w, t);
  EXPECT_NEAR(one_form_eval(OneForm::OmegaTotal, scheme, w, t), parts, 1e-14);
}

TEST(ExteriorDerivative, KnownFormsAndIdentities) {
  std::mt19937_64 rng(4);
  // alpha = x dy in R^3 -> d alpha = dx ^ dy.
  const ChartOneForm x_dy = [](const Vector& p, const Vector& d) { return p[0] * d[1]; };
  // alpha = df for f = sin(x) y + z^3 -> d alpha = 0.
  const ChartOneForm exact = [](const Vector& p, const Vector& d) {
    return std::cos(p[0]) * p[1] * d[0] + std::sin(p[0]) * d[1] + 3 * p[2] * p[2] * d[2];
  };
  for (int i = 0; i < 100; ++i) {
    const Vector p = unit(rng, 3) * 2.0;
    const Vector u = unit(rng, 3), v = unit(rng, 3), w = unit(rng, 3);
    EXPECT_NEAR(two_form_eval(x_dy, p, u, v), u[0] * v[1] - u[1] * v[0], 1e-9);
    EXPECT_NEAR(two_form_eval(exact, p, u, v), 0.0, 1e-9);
    EXPECT_EQ(two_form_eval(exact, p, u, v), -two_form_eval(exact, p, v, u));
    EXPECT_NEAR(two_form_eval(x_dy, p, u + 2.0 * w, v),
                two_form_eval(x_dy, p, u, v) + 2.0 * two_form_eval(x_dy, p, w, v), 1e-9);
  }
  EXPECT_THROW(two_form_eval(x_dy, Vector::Zero(3), Vector::Zero(2), Vector::Zero(3)), InputError);
}

TEST(Chart, LiftAndFlow) {
  const auto scheme = example_scheme(SchemeKind::Symmetrized3, 0.2);
  const Vector c{{0.3, 0.2995, 0.0}};
  const StepWindow w = chart_lift(scheme, c);
  EXPECT_NEAR(scheme.constraint(w), 0.0, 1e-12);
  EXPECT_EQ(chart_coordinates(w), c);
  EXPECT_EQ(chart_flow(scheme, c, 4).size(), 4u);
  EXPECT_THROW(chart_lift(scheme, Vector::Zero(2)), InputError);
  EXPECT_THROW(chart_flow(scheme, c, 0), InputError);
}

// Reversible Verlet: Theta^- = (m v + h k q0) dq0, so Omega^- = (m/h) dq0 ^ dq1.
TEST(StructureCheck, VerletSymplecticFormOracle) {
  const double m = 5.0, h = 1e-3;
  const auto scheme = example_scheme(SchemeKind::Verlet1, 0.0, h);
  const Vector c{{0.3, 0.3, 0.0}};
  const ChartOneForm theta_minus = [&](const Vector& p, const Vector& d) {
    return detail::pulled_back(scheme, p, d, 1, 1e-6, OneForm::OmegaTotal, {}).theta_minus;
  };
  std::mt19937_64 rng(17);
  for (int i = 0; i < 10; ++i) {
    Vector u = unit(rng, 3), v = unit(rng, 3);
    u[2] = v[2] = 0.0;
    const double omega = -two_form_eval(theta_minus, c, u, v);
    const double oracle = (m / h) * (u[0] * v[1] - u[1] * v[0]);
    EXPECT_NEAR(omega, oracle, 1e-6 * std::max(1.0, std::abs(oracle)));
  }
}

TEST(StructureCheck, IdentityHoldsOnTheCoupledModel) {
  std::mt19937_64 rng(23);
  for (auto kind : kAll) {
    const auto scheme = build_scheme(kind, coupled_model(), 0.02);
    const Vector c = chart_coordinates(initialize(scheme, Vector{{0.5, -0.3}}, Vector{{0.49, -0.28}}, 0.1));
    for (int N : {1, 3}) {
      for (int i = 0; i < 5; ++i) {
        const auto rep = structure_identity_check(scheme, c, N, unit(rng, 5), unit(rng, 5));
        EXPECT_LE(rep.relative(), 1e-4) << to_string(kind) << " N=" << N << " lhs=" << rep.lhs;
      }
    }
  }
}

// On the example system the thermal form is exact (U is separable in S), so
// the control needs q/S coupling to have something to detect.
TEST(StructureCheck, DroppingTheThermalFormBreaksTheIdentity) {
  std::mt19937_64 rng(29);
  for (auto kind : kAll) {
    const auto scheme = build_scheme(kind, coupled_model(), 0.02);
    const Vector c = chart_coordinates(initialize(scheme, Vector{{0.5, -0.3}}, Vector{{0.49, -0.28}}, 0.1));
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
      const Vector u = unit(rng, 5), v = unit(rng, 5);
      const auto full = structure_identity_check(scheme, c, 2, u, v);
      const auto broken = structure_identity_check(scheme, c, 2, u, v, {}, {}, OneForm::OmegaFriction);
      EXPECT_LE(full.relative(), 1e-4);
      worst = std::max(worst, broken.relative());
    }
    EXPECT_GT(worst, 1e-2) << to_string(kind);
  }
}

TEST(StructureCheck, DroppingFrictionBreaksTheExampleIdentity) {
  std::mt19937_64 rng(31);
  for (auto kind : kAll) {
    const auto scheme = example_scheme(kind, 0.2);
    const Vector c = chart_coordinates(initialize(scheme, Vector::Constant(1, 0.3), Vector::Constant(1, 0.2995), 0.0));
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
      const auto broken = structure_identity_check(scheme, c, 5, unit(rng, 3), unit(rng, 3), {}, {}, OneForm::OmegaTau);
      worst = std::max(worst, broken.relative());
    }
    EXPECT_GT(worst, 1e-2) << to_string(kind);
  }
}
