#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fracspec/core.hpp"
#include "fracspec/symbols.hpp"

namespace fracspec {

inline constexpr std::uint64_t kDefaultSeed = 0xF5EC;
/// Residual acceptance: ‖(O+λ)u − f‖₂ ≤ kResidualTolerance ‖f‖₂.
inline constexpr double kResidualTolerance = 1e-9;

struct SolveReport {
  GridFunction solution;
  Complex lambda{0.0, 0.0};
  double residual_norm = 0.0;  ///< L₂ norm of (O+λ)u − f
  double forcing_norm = 0.0;   ///< L₂ norm of f
  /// Per-term L_p norms, keyed "D^s u", "a*D^s u", "A*u", "lambda u".
  std::map<std::string, double> terms;
  double p = 2.0;
  /// Σ_s |λ|^{1-s/γ} ‖a∗D^s u‖_p + ‖A∗u‖_p, divided by ‖f‖_p.
  double coercive_ratio = std::numeric_limits<double>::quiet_NaN();
  /// Same sum with D^s u in place of a∗D^s u.
  double coercive_ratio_direct = std::numeric_limits<double>::quiet_NaN();
};

/// u = F⁻¹ Q(ξ,λ)⁻¹ f̂. Throws PreconditionError for λ outside the problem
/// sector, SolveError for a singular Q(ξ_k, λ) or a rejected residual.
SolveReport solve_elliptic(const EllipticProblem& prob, const GridFunction& f, Complex lambda);

/// O u = F⁻¹ Q(ξ,0) û.
GridFunction apply_operator(const EllipticProblem& prob, const GridFunction& u);

/// F⁻¹ â(ξ)(iξ)^s û.
GridFunction convolved_derivative(const EllipticProblem& prob, const GridFunction& u, double s);
/// F⁻¹ Â(ξ) û.
GridFunction operator_part(const EllipticProblem& prob, const GridFunction& u);

/// {0, γ/2, γ}.
std::vector<double> default_s_set(double gamma);

/// Solves, then records every coercive term in L_p and both coercive ratios.
SolveReport coercive_report(const EllipticProblem& prob, const GridFunction& f, Complex lambda,
                            std::span<const double> s_set, double p);

struct SweepOptions {
  double angle = 0.0;  ///< the λ lattice spans S_angle
  std::vector<double> radii = log_space(1e-3, 1e3, 25);
  Index angles = 17;
  Index probes = 0;  ///< random L_p probes per λ; 0 skips them
  double p = 2.0;
  std::uint64_t seed = kDefaultSeed;
  bool refine = true;  ///< repeat the exact sweep on the doubled grid
  unsigned threads = 1;
};

struct SectorialityReport {
  std::vector<Complex> lambdas;
  std::vector<double> values;        ///< exact L₂ norm of λ(O+λ)⁻¹ per λ
  std::vector<double> probe_values;  ///< L_p probe lower bounds per λ (empty without probes)
  double sup = 0.0;
  double probe_sup = 0.0;
  double refined_sup = std::numeric_limits<double>::quiet_NaN();
  double refinement_change = 0.0;
  bool stable = true;  ///< refinement changed sup by at most 5%
  std::vector<Witness> singular;
};

/// ‖λ(O+λ)⁻¹‖ on a radial × angular lattice of λ. In L₂ the norm is exact:
/// sup over grid frequencies of ‖λ Q(ξ,λ)⁻¹‖₂.
SectorialityReport resolvent_sweep(const EllipticProblem& prob, const SweepOptions& options);

/// sup_k ‖λ Q(ξ_k,λ)⁻¹‖₂ for a single λ.
double resolvent_norm_l2(const EllipticProblem& prob, Complex lambda);

struct SeparabilityReport {
  ConditionReport report;  ///< witnesses: trials where the term sum fell below ‖Ou‖
  double lower_constant = 0.0;  ///< min over trials of term sum / ‖Ou‖ (≥ 1)
  double upper_constant = 0.0;  ///< max over trials
  std::vector<double> ratios;
};

/// (Σ_s ‖a∗D^s u‖_p + ‖A∗u‖_p) / ‖Ou‖_p.
double separability_ratio(const EllipticProblem& prob, const GridFunction& u, std::span<const double> s_set,
                          double p);

SeparabilityReport separability_check(const EllipticProblem& prob, Index trials, double p,
                                      std::uint64_t seed = kDefaultSeed, std::vector<double> s_set = {});

struct EmbeddingParameters {
  double alpha = 0.0;
  double smoothness = 2.0;  ///< s of W_p^s
  double p = 2.0;
  double q = 2.0;
  double mu = 0.0;
  std::vector<double> h_set{0.1, 0.3, 1.0};
};

struct EmbeddingReport {
  double kappa = 0.0;
  double lhs = 0.0;            ///< ‖A^{1-ϰ-μ} D^α u‖_{L_q}
  double sobolev_norm = 0.0;   ///< ‖Au‖_p + ‖F⁻¹(1+ξ²)^{s/2} F u‖_p
  double base_norm = 0.0;      ///< ‖u‖_p
  std::vector<double> h;
  std::vector<double> rhs;     ///< h^μ ‖u‖_W + h^{-(1-μ)} ‖u‖_p
  std::vector<double> ratios;  ///< lhs / rhs
  double max_ratio = 0.0;
};

/// Interpolation-type embedding probe for a constant SPD operator symbol.
EmbeddingReport embedding_probe(const EllipticProblem& prob, const GridFunction& u,
                                const EmbeddingParameters& params);

}  // namespace fracspec
