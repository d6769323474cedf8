#include "fracspec/parabolic.hpp"

#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

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

void require_compatible(const ParabolicProblem& prob, const SpaceTimeFunction& f) {
  if (!(f.grid() == prob.core.grid)) throw ConfigurationError("forcing grid does not match the problem grid");
  if (!(f.time() == prob.time)) throw ConfigurationError("forcing time grid does not match the problem time grid");
  if (f.dim() != prob.core.dim()) throw ConfigurationError("forcing dimension does not match the operator dimension");
}

// f̂ per time sample, then per frequency: hat[m] is d × N.
std::vector<Eigen::MatrixXcd> transform_slices(const SpaceTimeFunction& f) {
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(f.slices().size());
  for (Index m = 0; m < f.time().samples(); ++m) out.push_back(forward_transform(f.slice(m)).coefficients());
  return out;
}

SpaceTimeFunction back_to_space(const SpatialGrid& grid, const TimeGrid& time, const std::vector<Eigen::MatrixXcd>& hat) {
  std::vector<Eigen::MatrixXcd> slices;
  slices.reserve(hat.size());
  for (const auto& h : hat) slices.push_back(inverse_transform(SpectralFunction(grid, h)).values());
  return SpaceTimeFunction(grid, time, std::move(slices));
}

// Runs `step(k, Q)` for every frequency k; each call fills column k of every slice.
template <typename Stepper>
SpaceTimeFunction integrate(const ParabolicProblem& prob, const SpaceTimeFunction& f, unsigned threads,
                            Stepper&& step) {
  require_compatible(prob, f);
  require_dissipative(prob.core);
  const std::vector<Eigen::MatrixXcd> fhat = transform_slices(f);
  const Index d = prob.core.dim();
  const Index n = prob.core.grid.size();
  std::vector<Eigen::MatrixXcd> uhat(fhat.size(), Eigen::MatrixXcd::Zero(d, n));
  const SpectralGrid spectral(prob.core.grid);
  parallel_for(n, threads, [&](Index k) {
    step(k, q_symbol(prob.core, spectral.frequency(k), Complex(0.0, 0.0)), fhat, uhat);
  });
  return back_to_space(prob.core.grid, prob.time, uhat);
}

}  // namespace

double min_dissipation(const EllipticProblem& prob) {
  const SpectralGrid spectral(prob.grid);
  double lowest = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < spectral.size(); ++k) {
    const Eigen::MatrixXcd q = q_symbol(prob, spectral.frequency(k), Complex(0.0, 0.0));
    const Eigen::VectorXcd ev = Eigen::ComplexEigenSolver<Eigen::MatrixXcd>(q, false).eigenvalues();
    lowest = std::min(lowest, ev.real().minCoeff());
  }
  return lowest;
}

void require_dissipative(const EllipticProblem& prob) {
  const SpectralGrid spectral(prob.grid);
  for (Index k = 0; k < spectral.size(); ++k) {
    const double xi = spectral.frequency(k);
    const Eigen::MatrixXcd q = q_symbol(prob, xi, Complex(0.0, 0.0));
    const Eigen::VectorXcd ev = Eigen::ComplexEigenSolver<Eigen::MatrixXcd>(q, false).eigenvalues();
    for (Index i = 0; i < ev.size(); ++i)
      if (!(ev(i).real() > 0.0))
        throw DomainError("not dissipative at xi = " + describe(xi) + ": eigenvalue " + describe(ev(i)) +
                          " of Q(xi, 0) has nonpositive real part");
  }
}

SpaceTimeFunction solve_parabolic(const ParabolicProblem& prob, const SpaceTimeFunction& f, unsigned threads) {
  const double dt = prob.time.step();
  return integrate(prob, f, threads,
                   [dt](Index k, const Eigen::MatrixXcd& q, const std::vector<Eigen::MatrixXcd>& fhat,
                        std::vector<Eigen::MatrixXcd>& uhat) {
                     const Index d = q.rows();
                     // exp([[Z, I, 0], [0, 0, I], [0, 0, 0]]) has top row [e^Z, φ₁(Z), φ₂(Z)]
                     Eigen::MatrixXcd augmented = Eigen::MatrixXcd::Zero(3 * d, 3 * d);
                     augmented.topLeftCorner(d, d) = -dt * q;
                     augmented.block(0, d, d, d).setIdentity();
                     augmented.block(d, 2 * d, d, d).setIdentity();
                     const Eigen::MatrixXcd e = augmented.exp();
                     const Eigen::MatrixXcd propagator = e.topLeftCorner(d, d);
                     const Eigen::MatrixXcd phi1 = e.block(0, d, d, d);
                     const Eigen::MatrixXcd phi2 = e.block(0, 2 * d, d, d);
                     for (std::size_t m = 0; m + 1 < fhat.size(); ++m) {
                       const Eigen::VectorXcd f0 = fhat[m].col(k);
                       const Eigen::VectorXcd f1 = fhat[m + 1].col(k);
                       uhat[m + 1].col(k) = propagator * uhat[m].col(k) + dt * (phi1 * f0 + phi2 * (f1 - f0));
                     }
                   });
}

GridFunction constant_forcing_solution(const EllipticProblem& prob, const GridFunction& f, double t) {
  require_dissipative(prob);
  const Index d = prob.dim();
  return apply_matrix_multiplier(f, [&](double xi) -> Eigen::MatrixXcd {
    const Eigen::MatrixXcd q = q_symbol(prob, xi, Complex(0.0, 0.0));
    const Eigen::MatrixXcd decay = (-t * q).exp();
    return q.partialPivLu().solve(Eigen::MatrixXcd::Identity(d, d) - decay);
  });
}

SpaceTimeFunction solve_parabolic_stepped(const ParabolicProblem& prob, const SpaceTimeFunction& f,
                                          TimeScheme scheme, unsigned threads) {
  const double dt = prob.time.step();
  return integrate(prob, f, threads,
                   [dt, scheme](Index k, const Eigen::MatrixXcd& q, const std::vector<Eigen::MatrixXcd>& fhat,
                                std::vector<Eigen::MatrixXcd>& uhat) {
                     const Index d = q.rows();
                     const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);
                     const double theta = scheme == TimeScheme::ImplicitEuler ? 1.0 : 0.5;
                     const Eigen::PartialPivLU<Eigen::MatrixXcd> lhs(id + theta * dt * q);
                     const Eigen::MatrixXcd explicit_part = id - (1.0 - theta) * dt * q;
                     for (std::size_t m = 0; m + 1 < fhat.size(); ++m) {
                       const Eigen::VectorXcd rhs =
                           explicit_part * uhat[m].col(k) +
                           dt * ((1.0 - theta) * fhat[m].col(k) + theta * fhat[m + 1].col(k));
                       uhat[m + 1].col(k) = lhs.solve(rhs);
                     }
                   });
}

SpaceTimeFunction time_derivative(const SpaceTimeFunction& u) {
  const auto& s = u.slices();
  const Index n = u.time().samples();
  const double inv = 1.0 / (2.0 * u.time().step());
  std::vector<Eigen::MatrixXcd> out(s.size());
  const auto at = [&](Index m) -> const Eigen::MatrixXcd& { return s[static_cast<std::size_t>(m)]; };
  out.front() = inv * (-3.0 * at(0) + 4.0 * at(1) - at(2));
  out.back() = inv * (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3));
  for (Index m = 1; m + 1 < n; ++m) out[static_cast<std::size_t>(m)] = inv * (at(m + 1) - at(m - 1));
  return SpaceTimeFunction(u.grid(), u.time(), std::move(out));
}

ParabolicReport parabolic_coercive_report(const ParabolicProblem& prob, const SpaceTimeFunction& f,
                                          const SpaceTimeFunction& u, double p, double p1, MixedNormOrder order) {
  require_compatible(prob, f);
  require_compatible(prob, u);
  require_exponent(p, "p");
  require_exponent(p1, "p1");

  const SpaceTimeFunction dt_u = time_derivative(u);
  std::vector<Eigen::MatrixXcd> fractional, coupling, residual;
  const Index n = prob.time.samples();
  for (Index m = 0; m < n; ++m) {
    const GridFunction slice = u.slice(m);
    fractional.push_back(convolved_derivative(prob.core, slice, prob.core.gamma()).values());
    coupling.push_back(operator_part(prob.core, slice).values());
    const auto slot = static_cast<std::size_t>(m);
    residual.push_back(dt_u.slices()[slot] + apply_operator(prob.core, slice).values() - f.slices()[slot]);
  }
  const SpatialGrid& grid = prob.core.grid;
  ParabolicReport report;
  report.p = p;
  report.p1 = p1;
  report.order = order;
  report.terms["d_t u"] = mixed_norm(dt_u, p, p1, order);
  report.terms["a*D^gamma u"] = mixed_norm(SpaceTimeFunction(grid, prob.time, std::move(fractional)), p, p1, order);
  report.terms["A*u"] = mixed_norm(SpaceTimeFunction(grid, prob.time, std::move(coupling)), p, p1, order);
  report.forcing_norm = mixed_norm(f, p, p1, order);
  const double residual_norm = mixed_norm(SpaceTimeFunction(grid, prob.time, std::move(residual)), p, p1, order);
  if (report.forcing_norm > 0.0) {
    double sum = 0.0;
    for (const auto& [name, value] : report.terms) sum += value;
    report.ratio = sum / report.forcing_norm;
    report.residual = residual_norm / report.forcing_norm;
  }
  return report;
}

SystemMatrix::SystemMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)), coercivity_(0.0) {
  if (entries_.rows() == 0 || entries_.rows() != entries_.cols())
    throw DomainError("system matrix must be square and nonempty");
  if (!entries_.allFinite()) throw DomainError("system matrix has non-finite entries");
  const double asymmetry = (entries_ - entries_.transpose()).cwiseAbs().maxCoeff();
  if (asymmetry > 1e-12) throw DomainError("system matrix is not symmetric: |a_ij - a_ji| = " + describe(asymmetry));
  coercivity_ = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(entries_, Eigen::EigenvaluesOnly).eigenvalues()(0);
  if (!(coercivity_ > 0.0))
    throw DomainError("system matrix is not positive definite: eigenvalue " + describe(coercivity_));
}

EllipticProblem system_problem(const SystemMatrix& mat, FractionalOrder order, CoefficientSymbol coefficient,
                               const SpatialGrid& grid, Sector sector, Complex lambda, SystemShift shift) {
  const Index n = mat.size();
  Eigen::MatrixXcd a = mat.entries().cast<Complex>();
  if (shift == SystemShift::Resolvent)
    a += lambda * Eigen::MatrixXcd::Identity(n, n);
  else
    a += lambda * Eigen::MatrixXcd::Ones(n, n);
  return EllipticProblem{.order = order,
                         .coefficient = std::move(coefficient),
                         .op = OperatorSymbol::constant(a),
                         .sector = sector,
                         .grid = grid,
                         .form = SymbolForm::Unfactored};
}

SystemReport solve_system(const SystemMatrix& mat, FractionalOrder order, CoefficientSymbol coefficient,
                          Complex lambda, const GridFunction& f, Sector sector, SystemShift shift) {
  // the literal variant carries λ inside the coupling, so its solve runs at zero shift
  const bool literal = shift == SystemShift::Literal;
  const EllipticProblem prob = system_problem(mat, order, std::move(coefficient), f.grid(), sector,
                                              literal ? lambda : Complex(0.0, 0.0), shift);
  SolveReport solve = solve_elliptic(prob, f, literal ? Complex(0.0, 0.0) : lambda);
  solve.lambda = lambda;
  const GridFunction& u = solve.solution;
  const double norm = lp_norm((mat.entries().cast<Complex>() * u.values()).eval(), u.grid().spacing(), 2.0);
  return SystemReport{std::move(solve), norm, mat.coercivity()};
}

ParabolicSystemReport solve_system(const SystemMatrix& mat, FractionalOrder order, CoefficientSymbol coefficient,
                                   Complex lambda, const SpaceTimeFunction& f, Sector sector, SystemShift shift,
                                   unsigned threads) {
  if (shift == SystemShift::Resolvent && !sector.contains(lambda))
    throw PreconditionError("lambda = " + describe(lambda) + " lies outside the problem sector");
  const ParabolicProblem prob{system_problem(mat, order, std::move(coefficient), f.grid(), sector, lambda, shift),
                              f.time()};
  SpaceTimeFunction u = solve_parabolic(prob, f, threads);
  std::vector<Eigen::MatrixXcd> weighted;
  const Eigen::MatrixXcd a = mat.entries().cast<Complex>();
  for (const auto& s : u.slices()) weighted.push_back(a * s);
  const double norm = mixed_norm(SpaceTimeFunction(u.grid(), u.time(), std::move(weighted)), 2.0, 2.0);
  return ParabolicSystemReport{std::move(u), norm, mat.coercivity()};
}

}  // namespace fracspec
