#include "fracspec/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "fracspec/fractional.hpp"

namespace fracspec {

namespace {

std::string describe(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

std::string describe(Complex z) {
  std::ostringstream s;
  s.precision(6);
  s << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
  return s.str();
}

void require_compatible(const EllipticProblem& prob, const GridFunction& f) {
  if (!(f.grid() == prob.grid)) throw ConfigurationError("function grid does not match the problem grid");
  if (f.dim() != prob.dim())
    throw ConfigurationError("function dimension " + std::to_string(f.dim()) + " does not match the operator dimension " +
                             std::to_string(prob.dim()));
}

bool is_singular(const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu, const Eigen::MatrixXcd& q) {
  if (q.size() == 1) return !(std::abs(q(0, 0)) > 0.0) || !std::isfinite(std::abs(q(0, 0)));
  const double rc = lu.rcond();
  return !(rc > 1e-14);
}

// û_k = Q(ξ_k, λ)⁻¹ f̂_k, returned in physical space.
GridFunction spectral_solve(const EllipticProblem& prob, const SpectralFunction& fhat, Complex lambda) {
  const SpectralGrid spectral(prob.grid);
  SpectralFunction uhat(prob.grid, Eigen::MatrixXcd::Zero(prob.dim(), prob.grid.size()));
  for (Index k = 0; k < spectral.size(); ++k) {
    const double xi = spectral.frequency(k);
    const Eigen::MatrixXcd q = q_symbol(prob, xi, lambda);
    if (q.size() == 1) {
      if (!(std::abs(q(0, 0)) > 0.0))
        throw SolveError("singular symbol Q(xi = " + describe(xi) + ", lambda = " + describe(lambda) + ")");
      uhat.coefficients().col(k) = fhat.coefficients().col(k) / q(0, 0);
      continue;
    }
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(q);
    if (is_singular(lu, q))
      throw SolveError("singular symbol Q(xi = " + describe(xi) + ", lambda = " + describe(lambda) + ")");
    uhat.coefficients().col(k) = lu.solve(fhat.coefficients().col(k));
  }
  return inverse_transform(uhat);
}

std::string term_label(const char* prefix, double s) {
  std::ostringstream out;
  out << prefix << s << " u";
  return out.str();
}

}  // namespace

SolveReport solve_elliptic(const EllipticProblem& prob, const GridFunction& f, Complex lambda) {
  require_compatible(prob, f);
  if (!prob.sector.contains(lambda))
    throw PreconditionError("lambda = " + describe(lambda) + " lies outside the problem sector S_" +
                            describe(prob.sector.angle()));
  GridFunction u = spectral_solve(prob, forward_transform(f), lambda);

  // residual of the recovered u, through a fresh transform
  SpectralFunction uhat = forward_transform(u);
  const SpectralFunction fhat = forward_transform(f);
  const SpectralGrid spectral(prob.grid);
  for (Index k = 0; k < spectral.size(); ++k) {
    const Eigen::VectorXcd column = uhat.coefficients().col(k);
    uhat.coefficients().col(k) = q_symbol(prob, spectral.frequency(k), lambda) * column - fhat.coefficients().col(k);
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  SolveReport report{std::move(u), lambda, lp_norm(inverse_transform(uhat), 2.0), lp_norm(f, 2.0), {}, 2.0, nan, nan};
  if (!(report.residual_norm <= kResidualTolerance * report.forcing_norm))
    throw SolveError("residual " + describe(report.residual_norm) + " exceeds " + describe(kResidualTolerance) +
                     " * |f| = " + describe(kResidualTolerance * report.forcing_norm));
  return report;
}

GridFunction apply_operator(const EllipticProblem& prob, const GridFunction& u) {
  require_compatible(prob, u);
  return apply_matrix_multiplier(u, [&](double xi) { return q_symbol(prob, xi, Complex(0.0, 0.0)); });
}

GridFunction convolved_derivative(const EllipticProblem& prob, const GridFunction& u, double s) {
  return apply_scalar_multiplier(u, [&](double xi) { return prob.coefficient(xi) * frac_power_i_xi(xi, s); });
}

GridFunction operator_part(const EllipticProblem& prob, const GridFunction& u) {
  require_compatible(prob, u);
  return apply_matrix_multiplier(u, [&](double xi) { return prob.op(xi); });
}

std::vector<double> default_s_set(double gamma) { return {0.0, 0.5 * gamma, gamma}; }

SolveReport coercive_report(const EllipticProblem& prob, const GridFunction& f, Complex lambda,
                            std::span<const double> s_set, double p) {
  require_exponent(p);
  const double gamma = prob.gamma();
  for (const double s : s_set)
    if (!(s >= 0.0 && s <= gamma))
      throw PreconditionError("derivative order " + describe(s) + " lies outside [0, gamma]");

  SolveReport report = solve_elliptic(prob, f, lambda);
  report.p = p;
  const GridFunction& u = report.solution;
  const double magnitude = std::abs(lambda);
  double convolved = 0.0, direct = 0.0;
  for (const double s : s_set) {
    const double weight = std::pow(magnitude, 1.0 - s / gamma);
    const double with_a = lp_norm(convolved_derivative(prob, u, s), p);
    const double plain = lp_norm(liouville_derivative(u, s), p);
    report.terms[term_label("a*D^", s)] = with_a;
    report.terms[term_label("D^", s)] = plain;
    convolved += weight * with_a;
    direct += weight * plain;
  }
  const double a_term = lp_norm(operator_part(prob, u), p);
  report.terms["A*u"] = a_term;
  report.terms["lambda u"] = magnitude * lp_norm(u, p);
  const double fnorm = lp_norm(f, p);
  report.coercive_ratio = fnorm > 0.0 ? (convolved + a_term) / fnorm : 0.0;
  report.coercive_ratio_direct = fnorm > 0.0 ? (direct + a_term) / fnorm : 0.0;
  return report;
}

double resolvent_norm_l2(const EllipticProblem& prob, Complex lambda) {
  if (lambda == Complex(0.0, 0.0)) return 0.0;
  const SpectralGrid spectral(prob.grid);
  double sup = 0.0;
  for (Index k = 0; k < spectral.size(); ++k) {
    const double xi = spectral.frequency(k);
    const Eigen::MatrixXcd q = q_symbol(prob, xi, lambda);
    double smallest;
    if (q.size() == 1) {
      smallest = std::abs(q(0, 0));
    } else {
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(q);
      smallest = svd.singularValues()(q.rows() - 1);
    }
    if (!(smallest > 0.0))
      throw SolveError("singular symbol Q(xi = " + describe(xi) + ", lambda = " + describe(lambda) + ")");
    sup = std::max(sup, std::abs(lambda) / smallest);
  }
  return sup;
}

SectorialityReport resolvent_sweep(const EllipticProblem& prob, const SweepOptions& options) {
  if (!(options.angle >= 0.0 && options.angle <= prob.sector.angle()))
    throw PreconditionError("sweep angle " + describe(options.angle) + " exceeds the problem sector");
  if (options.angles < 1) throw ConfigurationError("sweep needs at least one angle");
  if (options.probes > 0) require_exponent(options.p);

  SectorialityReport report;
  for (const double angle : lin_space(-options.angle, options.angle, options.angles))
    for (const double r : options.radii) report.lambdas.push_back(std::polar(r, angle));
  const Index count = static_cast<Index>(report.lambdas.size());

  std::vector<GridFunction> probes;
  std::vector<double> probe_norms;
  if (options.probes > 0) {
    std::mt19937_64 rng(options.seed);
    for (Index i = 0; i < options.probes; ++i) {
      probes.push_back(random_band_limited(prob.grid, prob.dim(), rng));
      probe_norms.push_back(lp_norm(probes.back(), options.p));
    }
    report.probe_values.assign(static_cast<std::size_t>(count), 0.0);
  }
  std::vector<SpectralFunction> probe_hats;
  for (const auto& f : probes) probe_hats.push_back(forward_transform(f));

  report.values.assign(static_cast<std::size_t>(count), 0.0);
  std::vector<char> singular(static_cast<std::size_t>(count), 0);
  std::vector<std::string> messages(static_cast<std::size_t>(count));
  parallel_for(count, options.threads, [&](Index i) {
    const auto slot = static_cast<std::size_t>(i);
    const Complex lambda = report.lambdas[slot];
    try {
      report.values[slot] = resolvent_norm_l2(prob, lambda);
      for (std::size_t j = 0; j < probes.size(); ++j) {
        if (lambda == Complex(0.0, 0.0)) break;
        const GridFunction u = spectral_solve(prob, probe_hats[j], lambda);
        report.probe_values[slot] =
            std::max(report.probe_values[slot], std::abs(lambda) * lp_norm(u, options.p) / probe_norms[j]);
      }
    } catch (const SolveError& e) {
      singular[slot] = 1;
      messages[slot] = e.what();
    }
  });
  for (Index i = 0; i < count; ++i) {
    const auto slot = static_cast<std::size_t>(i);
    if (singular[slot]) {
      report.singular.push_back({0.0, report.lambdas[slot], 0.0, messages[slot], {}});
      continue;
    }
    report.sup = std::max(report.sup, report.values[slot]);
    if (!report.probe_values.empty()) report.probe_sup = std::max(report.probe_sup, report.probe_values[slot]);
  }

  if (options.refine) {
    const EllipticProblem fine = prob.refined();
    std::vector<double> refined(static_cast<std::size_t>(count), 0.0);
    parallel_for(count, options.threads, [&](Index i) {
      const auto slot = static_cast<std::size_t>(i);
      if (singular[slot]) return;
      try {
        refined[slot] = resolvent_norm_l2(fine, report.lambdas[slot]);
      } catch (const SolveError&) {
        refined[slot] = 0.0;
      }
    });
    report.refined_sup = *std::max_element(refined.begin(), refined.end());
    report.refinement_change = report.sup > 0.0 ? std::abs(report.refined_sup - report.sup) / report.sup : 0.0;
    report.stable = report.refinement_change <= 0.05;
  }
  return report;
}

double separability_ratio(const EllipticProblem& prob, const GridFunction& u, std::span<const double> s_set,
                          double p) {
  double sum = lp_norm(operator_part(prob, u), p);
  for (const double s : s_set) sum += lp_norm(convolved_derivative(prob, u, s), p);
  const double onorm = lp_norm(apply_operator(prob, u), p);
  return sum / onorm;
}

SeparabilityReport separability_check(const EllipticProblem& prob, Index trials, double p, std::uint64_t seed,
                                      std::vector<double> s_set) {
  require_exponent(p);
  if (s_set.empty()) s_set = default_s_set(prob.gamma());
  const SpectralGrid spectral(prob.grid);
  for (Index k = 0; k < spectral.size(); ++k) {
    if (reciprocal_condition(q_symbol(prob, spectral.frequency(k), Complex(0.0, 0.0))) < 1e-14)
      throw PreconditionError("Q(xi, 0) is singular at xi = " + describe(spectral.frequency(k)));
  }

  SeparabilityReport out;
  out.report.name = "separability";
  out.report.grid_size = prob.grid.size();
  out.report.half_width = prob.grid.half_width();
  std::mt19937_64 rng(seed);
  for (Index t = 0; t < trials; ++t) {
    const GridFunction u = random_band_limited(prob.grid, prob.dim(), rng);
    const double ratio = separability_ratio(prob, u, s_set, p);
    out.ratios.push_back(ratio);
    if (!(ratio >= 1.0))
      out.report.witnesses.push_back({0.0, Complex(static_cast<double>(t), 0.0), ratio, "term sum below |Ou|", {}});
  }
  if (!out.ratios.empty()) {
    out.lower_constant = *std::min_element(out.ratios.begin(), out.ratios.end());
    out.upper_constant = *std::max_element(out.ratios.begin(), out.ratios.end());
  }
  out.report.constant = out.upper_constant;
  out.report.notes.push_back("trials: " + std::to_string(trials) + ", p = " + describe(p));
  return out;
}

EmbeddingReport embedding_probe(const EllipticProblem& prob, const GridFunction& u, const EmbeddingParameters& params) {
  require_compatible(prob, u);
  require_exponent(params.p, "p");
  require_exponent(params.q, "q");
  if (params.p > params.q) throw PreconditionError("embedding probe needs p <= q");
  if (!(params.smoothness > 0.0)) throw PreconditionError("smoothness s must be positive");
  if (!(params.alpha >= 0.0)) throw PreconditionError("derivative order alpha must be nonnegative");
  if (!prob.op.is_constant()) throw PreconditionError("embedding probe needs a constant operator symbol");

  EmbeddingReport report;
  report.kappa = (params.alpha + 1.0 / params.p - 1.0 / params.q) / params.smoothness;
  if (report.kappa > 1.0) throw PreconditionError("kappa = " + describe(report.kappa) + " exceeds 1");
  if (!(params.mu >= 0.0 && params.mu <= 1.0 - report.kappa))
    throw PreconditionError("mu = " + describe(params.mu) + " lies outside [0, 1 - kappa]");

  const Eigen::MatrixXcd a = prob.op(prob.op.reference_frequency());
  if (a.imag().cwiseAbs().maxCoeff() > 1e-12) throw DomainError("embedding probe needs a real SPD operator");
  const Eigen::MatrixXd power = matrix_fractional_power(a.real(), 1.0 - report.kappa - params.mu);

  const GridFunction derivative = liouville_derivative(u, params.alpha);
  report.lhs = lp_norm((power.cast<Complex>() * derivative.values()).eval(), prob.grid.spacing(), params.q);
  const double half_s = 0.5 * params.smoothness;
  const GridFunction bessel =
      apply_scalar_multiplier(u, [half_s](double xi) { return Complex(std::pow(1.0 + xi * xi, half_s), 0.0); });
  report.sobolev_norm = lp_norm((a * u.values()).eval(), prob.grid.spacing(), params.p) + lp_norm(bessel, params.p);
  report.base_norm = lp_norm(u, params.p);
  for (const double h : params.h_set) {
    if (!(h > 0.0)) throw PreconditionError("h must be positive");
    const double rhs = std::pow(h, params.mu) * report.sobolev_norm + std::pow(h, -(1.0 - params.mu)) * report.base_norm;
    report.h.push_back(h);
    report.rhs.push_back(rhs);
    report.ratios.push_back(rhs > 0.0 ? report.lhs / rhs : 0.0);
  }
  if (!report.ratios.empty()) report.max_ratio = *std::max_element(report.ratios.begin(), report.ratios.end());
  return report;
}

}  // namespace fracspec
