#pragma once

// Test-only oracles and models shared by the unit and acceptance suites.
// Nothing here calls into the library's own derivative code.

#include <cmath>
#include <functional>
#include <random>

#include "thermovi/thermovi.hpp"

namespace testing_support {

using thermovi::Matrix;
using thermovi::Vector;

/// Central-difference Jacobian with one Richardson extrapolation (O(e^4)).
inline Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& z, double rel = 1e-4) {
  const Vector f0 = f(z);
  Matrix J(f0.size(), z.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    const double e = rel * (1.0 + std::abs(z[j]));
    auto central = [&](double step) {
      Vector zp = z, zm = z;
      zp[j] += step;
      zm[j] -= step;
      return Vector((f(zp) - f(zm)) / (2.0 * step));
    };
    J.col(j) = (4.0 * central(0.5 * e) - central(e)) / 3.0;
  }
  return J;
}

inline double fd_derivative(const std::function<double(double)>& f, double x, double rel = 1e-4) {
  const double e = rel * (1.0 + std::abs(x));
  const double d1 = (f(x + e) - f(x - e)) / (2 * e);
  const double d2 = (f(x + 0.5 * e) - f(x - 0.5 * e)) / e;
  return (4.0 * d2 - d1) / 3.0;
}

/// Entry-wise relative error; entries below floor * max|A| are compared
/// against that floor instead of their own size.
inline double entrywise_relative_error(const Matrix& A, const Matrix& B, double floor = 1e-6) {
  const double scale = std::max(A.cwiseAbs().maxCoeff(), 1e-300);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      worst = std::max(worst, std::abs(A(i, j) - B(i, j)) / std::max(std::abs(A(i, j)), floor * scale));
  return worst;
}

/// Two-degree-of-freedom model with genuine q/S coupling in both the
/// potential and the friction, and a non-diagonal mass matrix:
///   U = 1/2 q^T K q + a sum q_i^4 + U0 e^{(S - S0)/C} (1 + b |q|^2)
///   F^fr = -lambda (1 + g |q|^2) e^{d S} v
struct CoupledParams {
  double a = 0.3;
  double b = 0.4;
  double U0 = 2.0;
  double C = 1.5;
  double S0 = 0.0;
  double lambda = 0.7;
  double g = 0.5;
  double d = 0.2;
};

inline thermovi::SystemModel coupled_model(const CoupledParams& p = {}, bool numeric_partials = false) {
  using thermovi::ForceField;
  using thermovi::Potential;
  Matrix M(2, 2);
  M << 2.0, 0.3, 0.3, 1.0;
  Matrix K(2, 2);
  K << 3.0, -0.5, -0.5, 2.0;

  auto thermal = [p](double S) { return p.U0 * std::exp((S - p.S0) / p.C); };
  Potential U;
  U.value = [=](const Vector& q, double S) {
    return 0.5 * q.dot(K * q) + p.a * q.array().pow(4).sum() + thermal(S) * (1 + p.b * q.squaredNorm());
  };
  ForceField fr;
  fr.value = [p](const Vector& q, const Vector& v, double S) -> Vector {
    return -p.lambda * (1 + p.g * q.squaredNorm()) * std::exp(p.d * S) * v;
  };
  if (!numeric_partials) {
    U.grad_q = [=](const Vector& q, double S) -> Vector {
      return K * q + 4 * p.a * q.array().pow(3).matrix() + 2 * p.b * thermal(S) * q;
    };
    U.d_S = [=](const Vector& q, double S) { return thermal(S) / p.C * (1 + p.b * q.squaredNorm()); };
    U.hess_qq = [=](const Vector& q, double S) -> Matrix {
      Matrix H = K;
      H.diagonal() += (12 * p.a * q.array().square()).matrix();
      H.diagonal().array() += 2 * p.b * thermal(S);
      return H;
    };
    U.d2_Sq = [=](const Vector& q, double S) -> Vector { return 2 * p.b * thermal(S) / p.C * q; };
    U.d2_SS = [=](const Vector& q, double S) {
      return thermal(S) / (p.C * p.C) * (1 + p.b * q.squaredNorm());
    };
    fr.d_q = [p](const Vector& q, const Vector& v, double S) -> Matrix {
      return -p.lambda * std::exp(p.d * S) * 2 * p.g * v * q.transpose();
    };
    fr.d_v = [p](const Vector& q, const Vector&, double S) -> Matrix {
      return -p.lambda * (1 + p.g * q.squaredNorm()) * std::exp(p.d * S) * Matrix::Identity(q.size(), q.size());
    };
    fr.d_S = [p](const Vector& q, const Vector& v, double S) -> Vector {
      return -p.lambda * p.d * (1 + p.g * q.squaredNorm()) * std::exp(p.d * S) * v;
    };
  }
  return thermovi::SystemModel(M, U, fr);
}

/// Random window with q in [-qr, qr]^n and S in [-sr, sr].
inline thermovi::StepWindow random_window(std::mt19937_64& rng, Eigen::Index n, double qr, double sr) {
  std::uniform_real_distribution<double> uq(-qr, qr), us(-sr, sr);
  thermovi::StepWindow w{Vector(n), Vector(n), us(rng), us(rng)};
  for (Eigen::Index i = 0; i < n; ++i) {
    w.q0[i] = uq(rng);
    w.q1[i] = uq(rng);
  }
  return w;
}

/// Finite-difference Jacobian of the step residual with respect to the
/// unknowns (q2, S2), holding the previous window fixed.
inline Matrix fd_step_jacobian(const thermovi::SchemeOps& scheme, const thermovi::StepWindow& prev,
                               const thermovi::StepWindow& next) {
  const Eigen::Index n = scheme.dim();
  Vector z(n + 1);
  z.head(n) = next.q1;
  z[n] = next.S1;
  return fd_jacobian(
      [&](const Vector& zz) {
        thermovi::StepWindow w{next.q0, zz.head(n), next.S0, zz[n]};
        return thermovi::step_residual(scheme, prev, w);
      },
      z);
}

}  // namespace testing_support
