#pragma once

// Fourier data of the operator a∗D^γ + A∗ and the numerical checks of the
// hypotheses placed on it: sector membership and growth of â(ξ)(iξ)^γ,
// Mikhlin-type bounds, the symbol-level resolvent bound, and the two
// elementary scalar inequalities used to bound the resolvent.

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fracspec/core.hpp"
#include "fracspec/fractional.hpp"

namespace fracspec {

/// Relative step of the central difference used when no analytic derivative exists.
inline constexpr double kDerivativeStep = 1e-5;

/// â(ξ): a complex scalar symbol with first derivative.
class CoefficientSymbol {
 public:
  using Function = std::function<Complex(double)>;

  CoefficientSymbol(std::string name, Function eval, Function deriv = {});

  /// â ≡ c.
  static CoefficientSymbol constant(Complex c);
  /// â(ξ) = c |ξ|^{2-γ} / (1+ξ²)^{(2-γ)/2}.
  static CoefficientSymbol scaled_decay(Complex c, double gamma);
  /// â(ξ) = c (1+ξ²)^{power/2}.
  static CoefficientSymbol bracket(Complex c, double power);

  Complex operator()(double xi) const { return eval_(xi); }
  /// Analytic derivative when supplied, else the central difference.
  Complex derivative(double xi) const;
  Complex finite_difference_derivative(double xi) const;
  bool has_analytic_derivative() const { return static_cast<bool>(deriv_); }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  Function eval_;
  Function deriv_;
};

/// Â(ξ): a d×d complex matrix family with a reference frequency ξ₀ ≠ 0 at
/// which Â is invertible.
class OperatorSymbol {
 public:
  using Function = std::function<Eigen::MatrixXcd(double)>;

  OperatorSymbol(std::string name, Index dim, Function eval, Function deriv = {},
                 double reference_frequency = 1.0, bool constant = false);

  static OperatorSymbol constant(const Eigen::MatrixXcd& a0, double reference_frequency = 1.0);
  static OperatorSymbol scalar(Complex c, double reference_frequency = 1.0);
  /// Â(ξ) = A₀ + B/(1+ξ²), B symmetric.
  static OperatorSymbol perturbed(const Eigen::MatrixXcd& a0, const Eigen::MatrixXcd& b,
                                  double reference_frequency = 1.0);

  Eigen::MatrixXcd operator()(double xi) const { return eval_(xi); }
  Eigen::MatrixXcd derivative(double xi) const;
  Eigen::MatrixXcd finite_difference_derivative(double xi) const;
  bool has_analytic_derivative() const { return static_cast<bool>(deriv_); }
  Index dim() const { return dim_; }
  double reference_frequency() const { return reference_frequency_; }
  bool is_constant() const { return constant_; }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  Index dim_;
  Function eval_;
  Function deriv_;
  double reference_frequency_;
  bool constant_;
};

/// Which algebraic form of Q(ξ, λ) a problem uses.
enum class SymbolForm {
  Unfactored,  ///< â(ξ)(iξ)^γ I + Â(ξ) + λ I, the transform of a∗D^γu + A∗u + λu
  Factored,    ///< â(ξ)[(iξ)^γ I + Â(ξ) + λ I]
};

/// The operator O = a∗D^γ + A∗ on a grid, with the λ-sector S_φ₂.
struct EllipticProblem {
  FractionalOrder order;
  CoefficientSymbol coefficient;
  OperatorSymbol op;
  Sector sector;
  SpatialGrid grid;
  SymbolForm form = SymbolForm::Unfactored;

  Index dim() const { return op.dim(); }
  double gamma() const { return order.value(); }
  /// Same problem on a grid with twice the samples.
  EllipticProblem refined() const;
  EllipticProblem on_grid(const SpatialGrid& g) const;
};

/// â(ξ)(iξ)^γ.
Complex fractional_term(const EllipticProblem& prob, double xi);

/// Q(ξ, λ) in the problem's form.
Eigen::MatrixXcd q_symbol(const EllipticProblem& prob, double xi, Complex lambda);

/// A point where a checked property fails (or, for `extremal`, is tightest).
struct Witness {
  double xi = 0.0;
  Complex parameter{0.0, 0.0};  ///< λ, ν or σ depending on the check
  double magnitude = 0.0;
  std::string what;
  std::optional<double> y;  ///< spatial point, for checks over a y-mesh
};

struct ConditionReport {
  std::string name;
  double constant = 0.0;
  std::vector<Witness> witnesses;
  std::optional<Witness> extremal;
  std::vector<std::string> notes;
  Index grid_size = 0;
  double half_width = 0.0;

  bool pass() const { return witnesses.empty(); }
};

/// Sector membership of â(ξ)(iξ)^γ in S_φ₁ and the growth bound
/// |â(ξ)||ξ|^γ ≤ C₀ ξ², checked on the nonzero grid frequencies.
/// `constant` is the empirical C₀. Growth fails when the ratio diverges as
/// ξ → 0; the witnesses are then the |ξ| < 1 frequencies whose ratio exceeds
/// the supremum over |ξ| ≥ 1.
ConditionReport check_symbol_sector_growth(const EllipticProblem& prob, const Sector& phi1);

enum class DerivativeMode { Analytic, FiniteDifference };

struct MikhlinReport {
  ConditionReport coefficient;  ///< C₁ = max_β sup |ξ|^β |D^β â|
  ConditionReport operator_symbol;  ///< C₂ = max_β sup ‖|ξ|^β D^β Â(ξ) Â(ξ₀)⁻¹‖
  bool pass() const { return coefficient.pass() && operator_symbol.pass(); }
};

/// Mikhlin-type bounds over the nonzero grid frequencies. A term whose
/// log-log slope toward the grid edge (or toward ξ → 0) signals unbounded
/// growth is recorded as a witness.
MikhlinReport check_mikhlin_bounds(const EllipticProblem& prob,
                                   DerivativeMode mode = DerivativeMode::Analytic);

/// sup over (ξ_k, λ) of ‖Q(ξ,λ)⁻¹‖₂ (1 + |λ| + ξ²). Throws SolveError on a singular Q.
ConditionReport symbol_resolvent_bound(const EllipticProblem& prob, std::span<const Complex> lambdas);

struct InequalityReport {
  ConditionReport sector_sum;     ///< min |λ+ν|/(|λ|+|ν|) over λ ∈ S_φ₂, ν ∈ S_φ₁
  ConditionReport interpolation;  ///< |λ|^{1-s/γ}|ξ|^s ≤ |λ| + |ξ|^γ
  bool pass() const { return sector_sum.pass() && interpolation.pass(); }
};

struct InequalitySampling {
  Index angles = 32;
  Index radii = 25;
  double radius_min = 1e-3;
  double radius_max = 1e3;
  std::uint64_t seed = 0xF5EC;
};

/// Both elementary inequalities. `samples` random (λ, ξ, s) triples are drawn
/// for the interpolation inequality, plus the endpoints s = 0 and s = γ.
InequalityReport scalar_inequality_suite(const Sector& phi1, const Sector& phi2, double gamma,
                                         Index samples, const InequalitySampling& sampling = {});

/// Smallest ratio |λ+ν|/(|λ|+|ν|) on the sampling lattice.
double sector_sum_ratio(const Sector& phi1, const Sector& phi2, const InequalitySampling& sampling = {});

/// Smallest singular value of Q(ξ, λ) relative to its largest.
double reciprocal_condition(const Eigen::MatrixXcd& q);

}  // namespace fracspec
