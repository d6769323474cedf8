#pragma once

// Anisotropic problems on R_x × (0,1)_y: a fractional operator in x plus a
// second-order operator b₂D² + b₁D + b₀ in y (D = -i∂_y) with Dirichlet
// conditions at y = 0 and y = 1. The y-operator is discretized by central
// differences and enters the elliptic solver as a constant m×m symbol.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fracspec/core.hpp"
#include "fracspec/elliptic.hpp"
#include "fracspec/symbols.hpp"

namespace fracspec {

struct BvpCoefficients {
  using Function = std::function<double(double)>;

  Function b2;
  Function b1;
  Function b0;
  Index interior_points = 64;

  static BvpCoefficients constant(double b2, double b1, double b0, Index interior_points);

  double spacing() const { return 1.0 / static_cast<double>(interior_points + 1); }
  /// Interior node y_i = (i+1) h_y, i = 0..m-1.
  double node(Index i) const { return static_cast<double>(i + 1) * spacing(); }
};

/// Throws DomainError naming y where |b₂(y)| < 1e-8, over all mesh nodes including y = 0, 1.
void require_nondegenerate(const BvpCoefficients& coeffs);

/// m×m matrix of b₂D² + b₁D + b₀, Dirichlet rows eliminated.
Eigen::MatrixXcd discretize_bvp(const BvpCoefficients& coeffs);

/// Smallest eigenvalue of the Hermitian part of a discretized y-operator.
double min_hermitian_eigenvalue(const Eigen::MatrixXcd& a);

struct EllipticityMesh {
  std::vector<double> radii = log_space(1e-3, 1e3, 25);  ///< |σ| values; ξ runs over their square roots and 0
  Index angles = 9;                                      ///< arg σ over [-φ₀, φ₀]; odd counts include arg σ = 0
};

/// min |σ + b₂(y)ξ²| / (|σ| + ξ²) over y on the mesh (with the endpoints),
/// σ ∈ S_φ₀ and ξ, excluding σ = ξ = 0. Passes iff the minimum is ≥ 1e-8.
ConditionReport check_ellipticity(const BvpCoefficients& coeffs, const Sector& phi0,
                                  const EllipticityMesh& mesh = {});

/// The induced problem a∗D_x^γ + A_h.
EllipticProblem anisotropic_problem(const BvpCoefficients& coeffs, FractionalOrder order,
                                    CoefficientSymbol coefficient, const SpatialGrid& grid, Sector sector);

/// Samples g(x, y_i) into an m×N grid function.
GridFunction sample_on_mesh(const BvpCoefficients& coeffs, const SpatialGrid& grid,
                            const std::function<Complex(double x, double y)>& g);

struct AnisotropicReport {
  SolveReport solve;
  /// Norms with inner y exponent 2 (h_y-weighted) and outer x exponent p; keys
  /// "a*D^s u", "D_y^0 u", "D_y^1 u", "D_y^2 u", "f".
  std::map<std::string, double> terms;
  /// (Σ_s |λ|^{1-s/γ} ‖a∗D_x^s u‖ + Σ_β ‖D_y^β u‖) / ‖f‖.
  double ratio = 0.0;
};

AnisotropicReport solve_anisotropic(const BvpCoefficients& coeffs, FractionalOrder order,
                                    CoefficientSymbol coefficient, Complex lambda, const GridFunction& f,
                                    Sector sector, std::span<const double> s_set = {}, double p = 2.0);

/// u = sin(πy) e^{-x²} and f = (O + λ)u with the y-operator applied exactly.
struct ManufacturedCase {
  GridFunction exact;
  GridFunction forcing;
};

ManufacturedCase manufactured_case(const BvpCoefficients& coeffs, FractionalOrder order,
                                   const CoefficientSymbol& coefficient, const SpatialGrid& grid, Complex lambda);

}  // namespace fracspec
