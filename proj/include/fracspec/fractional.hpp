#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "fracspec/core.hpp"

namespace fracspec {

/// Fractional order γ. Problem orders live in (1, 2]; derivative probes in [0, 2].
class FractionalOrder {
 public:
  /// Order of a problem definition; throws DomainError unless γ ∈ (1, 2].
  static FractionalOrder problem(double gamma);
  /// Order of a derivative probe D^s; throws DomainError unless s ∈ [0, 2].
  static FractionalOrder probe(double s);

  double value() const { return value_; }
  operator double() const { return value_; }

 private:
  explicit FractionalOrder(double v) : value_(v) {}
  double value_;
};

/// (iξ)^α = exp[α(ln|ξ| + i(π/2) sgn ξ)], and 0 at ξ = 0.
/// α = 0 is the identity symbol (1 everywhere, including ξ = 0).
template <typename Real>
std::complex<Real> frac_power_i_xi(Real xi, Real alpha) {
  if (alpha == Real(0)) return {Real(1), Real(0)};
  if (xi == Real(0)) return {Real(0), Real(0)};
  const Real half_pi = std::numbers::pi_v<Real> / Real(2);
  const Real phase = alpha * half_pi * (xi > Real(0) ? Real(1) : Real(-1));
  return std::polar(std::pow(std::abs(xi), alpha), phase);
}

/// Whole-line (Liouville) derivative of order s ≥ 0 via the (iξ)^s multiplier.
GridFunction liouville_derivative(const GridFunction& f, double s);

/// Grünwald–Letnikov weights w_k = (-1)^k binom(γ, k), k = 0..count-1.
Eigen::ArrayXd grunwald_letnikov_weights(double gamma, Index count);

/// Grünwald–Letnikov approximation of the Riemann–Liouville derivative of order
/// γ ∈ (1, 2) with base point 0, for samples f(j h), j = 0..n-1.
Eigen::ArrayXd rl_derivative_oracle(const Eigen::ArrayXd& samples, double spacing, double gamma);
/// Same approximation at a single sample index.
double rl_derivative_oracle_at(const Eigen::ArrayXd& samples, double spacing, double gamma, Index j);

/// A^θ for symmetric positive definite A via its eigendecomposition.
/// Throws DomainError for non-symmetric input or a non-positive eigenvalue.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> matrix_fractional_power(
    const Eigen::MatrixBase<Derived>& a, typename Derived::Scalar theta) {
  using Scalar = typename Derived::Scalar;
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (a.rows() != a.cols()) throw DomainError("matrix power needs a square matrix");
  const MatrixType m = a;
  const Scalar scale = std::max(Scalar(1), m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * scale)
    throw DomainError("matrix power needs a symmetric matrix");
  Eigen::SelfAdjointEigenSolver<MatrixType> eig(m);
  const auto& values = eig.eigenvalues();
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (!(values(i) > Scalar(0))) {
      std::ostringstream msg;
      msg << "matrix is not positive definite: eigenvalue " << values(i);
      throw DomainError(msg.str());
    }
  }
  const auto powered = values.array().pow(theta).matrix();
  return eig.eigenvectors() * powered.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace fracspec
