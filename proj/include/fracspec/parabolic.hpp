#pragma once

#include <map>
#include <string>

#include <Eigen/Dense>

#include "fracspec/core.hpp"
#include "fracspec/elliptic.hpp"
#include "fracspec/symbols.hpp"

namespace fracspec {

/// ∂_t u + O u = f on (0, T], u(0) = 0.
struct ParabolicProblem {
  EllipticProblem core;
  TimeGrid time;
};

/// Throws DomainError naming the first grid frequency where Q(ξ,0) has an
/// eigenvalue with nonpositive real part.
void require_dissipative(const EllipticProblem& prob);

/// Smallest real part over the eigenvalues of Q(ξ_k, 0) on the grid.
double min_dissipation(const EllipticProblem& prob);

/// Per-frequency variation of constants with f̂ linear on each step:
/// û_{m+1} = e^{-QΔt} û_m + Δt [φ₁(-QΔt) f̂_m + φ₂(-QΔt)(f̂_{m+1} - f̂_m)].
SpaceTimeFunction solve_parabolic(const ParabolicProblem& prob, const SpaceTimeFunction& f, unsigned threads = 1);

/// Exact u(t) for forcing constant in time: F⁻¹ Q⁻¹(I - e^{-Qt}) f̂.
GridFunction constant_forcing_solution(const EllipticProblem& prob, const GridFunction& f, double t);

enum class TimeScheme { ImplicitEuler, CrankNicolson };

SpaceTimeFunction solve_parabolic_stepped(const ParabolicProblem& prob, const SpaceTimeFunction& f,
                                          TimeScheme scheme, unsigned threads = 1);

/// Second-order difference in t: central inside, one-sided at both ends.
SpaceTimeFunction time_derivative(const SpaceTimeFunction& u);

struct ParabolicReport {
  /// Mixed L_(p,p1) norms keyed "d_t u", "a*D^gamma u", "A*u".
  std::map<std::string, double> terms;
  double forcing_norm = 0.0;
  double ratio = 0.0;     ///< term sum / ‖f‖
  double residual = 0.0;  ///< ‖∂_t u + Ou - f‖ / ‖f‖, time-discretization error
  double p = 2.0;
  double p1 = 2.0;
  MixedNormOrder order = MixedNormOrder::SpaceInner;
};

ParabolicReport parabolic_coercive_report(const ParabolicProblem& prob, const SpaceTimeFunction& f,
                                          const SpaceTimeFunction& u, double p, double p1,
                                          MixedNormOrder order = MixedNormOrder::SpaceInner);

/// Symmetric positive definite coupling matrix (a_ij) of a system.
class SystemMatrix {
 public:
  /// Throws DomainError for an asymmetric or non-positive-definite matrix.
  explicit SystemMatrix(Eigen::MatrixXd entries);

  const Eigen::MatrixXd& entries() const { return entries_; }
  Index size() const { return entries_.rows(); }
  /// Smallest eigenvalue C₀ > 0.
  double coercivity() const { return coercivity_; }

 private:
  Eigen::MatrixXd entries_;
  double coercivity_;
};

enum class SystemShift {
  Resolvent,  ///< Σ_j a_ij u_j + λ u_i
  Literal,    ///< Σ_j (a_ij + λ) u_j
};

/// a∗D^γ with the coupling A (shifted per `shift`) as a constant operator symbol.
EllipticProblem system_problem(const SystemMatrix& mat, FractionalOrder order, CoefficientSymbol coefficient,
                               const SpatialGrid& grid, Sector sector, Complex lambda, SystemShift shift);

struct SystemReport {
  SolveReport solve;
  double weighted_norm = 0.0;  ///< ‖Au‖ with the l₂ norm across components
  double coercivity = 0.0;
};

SystemReport solve_system(const SystemMatrix& mat, FractionalOrder order, CoefficientSymbol coefficient,
                          Complex lambda, const GridFunction& f, Sector sector,
                          SystemShift shift = SystemShift::Resolvent);

struct ParabolicSystemReport {
  SpaceTimeFunction solution;
  double weighted_norm = 0.0;  ///< mixed L_(2,2) norm of Au
  double coercivity = 0.0;
};

ParabolicSystemReport solve_system(const SystemMatrix& mat, FractionalOrder order, CoefficientSymbol coefficient,
                                   Complex lambda, const SpaceTimeFunction& f, Sector sector,
                                   SystemShift shift = SystemShift::Resolvent, unsigned threads = 1);

}  // namespace fracspec
