#include "fracspec/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

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

double spectral_norm(const Eigen::MatrixXcd& m) {
  if (m.size() == 1) return std::abs(m(0, 0));
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

// (smallest, largest) singular value
std::pair<double, double> singular_range(const Eigen::MatrixXcd& m) {
  if (m.size() == 1) {
    const double a = std::abs(m(0, 0));
    return {a, a};
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  const auto& s = svd.singularValues();
  return {s(s.size() - 1), s(0)};
}

// Log-log slope of a positive series between two positive abscissae; 0 when
// either value vanishes.
double log_slope(double x0, double v0, double x1, double v1) {
  if (!(v0 > 0.0) || !(v1 > 0.0) || x0 == x1) return 0.0;
  return std::log(v1 / v0) / std::log(x1 / x0);
}

constexpr double kTrendThreshold = 0.05;
constexpr double kSectorSlack = 1e-12;

}  // namespace

CoefficientSymbol::CoefficientSymbol(std::string name, Function eval, Function deriv)
    : name_(std::move(name)), eval_(std::move(eval)), deriv_(std::move(deriv)) {
  if (!eval_) throw ConfigurationError("coefficient symbol '" + name_ + "' has no evaluator");
}

CoefficientSymbol CoefficientSymbol::constant(Complex c) {
  return CoefficientSymbol(
      "constant", [c](double) { return c; }, [](double) { return Complex(0.0, 0.0); });
}

CoefficientSymbol CoefficientSymbol::scaled_decay(Complex c, double gamma) {
  const double r = 2.0 - gamma;
  auto g = [c, r](double xi) -> Complex {
    if (xi == 0.0) return r > 0.0 ? Complex(0.0, 0.0) : c;
    return c * std::pow(std::abs(xi), r) * std::pow(1.0 + xi * xi, -0.5 * r);
  };
  // g' = r g / (ξ (1 + ξ²))
  auto dg = [g, r](double xi) -> Complex {
    if (xi == 0.0) return Complex(0.0, 0.0);
    return r * g(xi) / (xi * (1.0 + xi * xi));
  };
  return CoefficientSymbol("scaled-decay", g, dg);
}

CoefficientSymbol CoefficientSymbol::bracket(Complex c, double power) {
  return CoefficientSymbol(
      "bracket", [c, power](double xi) { return c * std::pow(1.0 + xi * xi, 0.5 * power); },
      [c, power](double xi) { return c * power * xi * std::pow(1.0 + xi * xi, 0.5 * power - 1.0); });
}

Complex CoefficientSymbol::derivative(double xi) const {
  return deriv_ ? deriv_(xi) : finite_difference_derivative(xi);
}

Complex CoefficientSymbol::finite_difference_derivative(double xi) const {
  const double step = kDerivativeStep * std::max(1.0, std::abs(xi));
  return (eval_(xi + step) - eval_(xi - step)) / (2.0 * step);
}

OperatorSymbol::OperatorSymbol(std::string name, Index dim, Function eval, Function deriv,
                               double reference_frequency, bool constant)
    : name_(std::move(name)),
      dim_(dim),
      eval_(std::move(eval)),
      deriv_(std::move(deriv)),
      reference_frequency_(reference_frequency),
      constant_(constant) {
  if (dim_ < 1) throw ConfigurationError("operator symbol dimension must be at least 1");
  if (!eval_) throw ConfigurationError("operator symbol '" + name_ + "' has no evaluator");
  if (reference_frequency_ == 0.0 || !std::isfinite(reference_frequency_))
    throw ConfigurationError("reference frequency must be a nonzero real");
  const Eigen::MatrixXcd at_reference = eval_(reference_frequency_);
  if (at_reference.rows() != dim_ || at_reference.cols() != dim_)
    throw ConfigurationError("operator symbol '" + name_ + "' returns the wrong shape");
  if (reciprocal_condition(at_reference) < 1e-14)
    throw DomainError("operator symbol '" + name_ + "' is not invertible at the reference frequency " +
                      describe(reference_frequency_));
}

OperatorSymbol OperatorSymbol::constant(const Eigen::MatrixXcd& a0, double reference_frequency) {
  if (a0.rows() != a0.cols()) throw ConfigurationError("operator matrix must be square");
  const Index d = a0.rows();
  return OperatorSymbol(
      "constant", d, [a0](double) { return a0; },
      [d](double) { return Eigen::MatrixXcd::Zero(d, d).eval(); }, reference_frequency, true);
}

OperatorSymbol OperatorSymbol::scalar(Complex c, double reference_frequency) {
  return constant(Eigen::MatrixXcd::Constant(1, 1, c), reference_frequency);
}

OperatorSymbol OperatorSymbol::perturbed(const Eigen::MatrixXcd& a0, const Eigen::MatrixXcd& b,
                                         double reference_frequency) {
  if (a0.rows() != a0.cols() || b.rows() != a0.rows() || b.cols() != a0.cols())
    throw ConfigurationError("perturbed operator needs square matrices of equal size");
  if ((b - b.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, b.cwiseAbs().maxCoeff()))
    throw DomainError("perturbation matrix must be symmetric");
  return OperatorSymbol(
      "perturbed", a0.rows(), [a0, b](double xi) { return (a0 + b / (1.0 + xi * xi)).eval(); },
      [b](double xi) {
        const double q = 1.0 + xi * xi;
        return (b * (-2.0 * xi / (q * q))).eval();
      },
      reference_frequency, false);
}

Eigen::MatrixXcd OperatorSymbol::derivative(double xi) const {
  return deriv_ ? deriv_(xi) : finite_difference_derivative(xi);
}

Eigen::MatrixXcd OperatorSymbol::finite_difference_derivative(double xi) const {
  const double step = kDerivativeStep * std::max(1.0, std::abs(xi));
  return (eval_(xi + step) - eval_(xi - step)) / (2.0 * step);
}

EllipticProblem EllipticProblem::refined() const { return on_grid(grid.refined()); }

EllipticProblem EllipticProblem::on_grid(const SpatialGrid& g) const {
  EllipticProblem copy = *this;
  copy.grid = g;
  return copy;
}

Complex fractional_term(const EllipticProblem& prob, double xi) {
  return prob.coefficient(xi) * frac_power_i_xi(xi, prob.gamma());
}

Eigen::MatrixXcd q_symbol(const EllipticProblem& prob, double xi, Complex lambda) {
  const Index d = prob.dim();
  const Eigen::MatrixXcd identity = Eigen::MatrixXcd::Identity(d, d);
  if (prob.form == SymbolForm::Factored) {
    return prob.coefficient(xi) * (frac_power_i_xi(xi, prob.gamma()) * identity + prob.op(xi) + lambda * identity);
  }
  return fractional_term(prob, xi) * identity + prob.op(xi) + lambda * identity;
}

double reciprocal_condition(const Eigen::MatrixXcd& q) {
  const auto [lo, hi] = singular_range(q);
  if (hi == 0.0) return 0.0;
  return lo / hi;
}

ConditionReport check_symbol_sector_growth(const EllipticProblem& prob, const Sector& phi1) {
  ConditionReport report;
  report.name = "symbol sector and growth";
  report.grid_size = prob.grid.size();
  report.half_width = prob.grid.half_width();
  const SpectralGrid spectral(prob.grid);
  const Index n = spectral.size();

  Eigen::ArrayXd ratio = Eigen::ArrayXd::Zero(n);
  Index sector_failures = 0;
  for (Index k = 0; k < n; ++k) {
    const double xi = spectral.frequency(k);
    if (xi == 0.0) continue;
    const Complex term = fractional_term(prob, xi);
    if (!phi1.contains(term, kSectorSlack)) {
      ++sector_failures;
      report.witnesses.push_back({xi, term, std::abs(std::arg(term)) - phi1.angle(), "sector", {}});
    }
    ratio(k) = std::abs(term) / (xi * xi);
  }
  Index argmax = 0;
  report.constant = ratio.maxCoeff(&argmax);
  report.extremal = Witness{spectral.frequency(argmax), {}, report.constant, "growth constant", {}};
  report.notes.push_back(sector_failures == 0
                             ? "sector: every value lies in S_phi1 with phi1 = " + describe(phi1.angle())
                             : "sector: " + std::to_string(sector_failures) + " frequencies leave S_phi1");

  // trend of the growth ratio as ξ → 0, on both half-lines
  const Index inner = std::min<Index>(2, n / 2 - 1);
  double slope = 0.0;
  if (inner > 1) {
    for (const Index sign : {Index(1), Index(-1)}) {
      const Index k1 = spectral.index_of(sign), k4 = spectral.index_of(sign * inner);
      slope = std::min(slope, log_slope(std::abs(spectral.frequency(k1)), ratio(k1),
                                        std::abs(spectral.frequency(k4)), ratio(k4)));
    }
  }
  if (slope < -kTrendThreshold) {
    double high = 0.0;
    bool has_high = false;
    for (Index k = 0; k < n; ++k) {
      if (std::abs(spectral.frequency(k)) >= 1.0) {
        high = std::max(high, ratio(k));
        has_high = true;
      }
    }
    for (Index k = 0; k < n; ++k) {
      const double xi = spectral.frequency(k);
      if (xi == 0.0 || std::abs(xi) >= 1.0) continue;
      if (!has_high || ratio(k) > high) report.witnesses.push_back({xi, {}, ratio(k), "growth", {}});
    }
    if (std::none_of(report.witnesses.begin(), report.witnesses.end(),
                     [](const Witness& w) { return w.what == "growth"; })) {
      const Index k1 = spectral.index_of(1);
      report.witnesses.push_back({spectral.frequency(k1), {}, ratio(k1), "growth", {}});
    }
    report.notes.push_back("growth: ratio diverges toward xi -> 0 (log-log slope " + describe(slope) + ")");
  } else {
    report.notes.push_back("growth: bounded, supremum attained at xi = " + describe(spectral.frequency(argmax)));
  }
  return report;
}

namespace {

struct TermSeries {
  std::string label;
  Eigen::ArrayXd values;
};

// Records the supremum of each series and flags growth toward the grid edge or toward ξ → 0.
void summarize_terms(ConditionReport& report, const SpectralGrid& spectral, const std::vector<TermSeries>& series) {
  const Index n = spectral.size();
  const Index outer = n / 2 - 1;
  const Index near_outer = std::max<Index>(1, outer / 4);
  const Index inner = std::min<Index>(4, outer);
  report.constant = 0.0;
  for (const auto& term : series) {
    Index argmax = 0;
    const double sup = term.values.maxCoeff(&argmax);
    if (sup >= report.constant) {
      report.constant = sup;
      report.extremal = Witness{spectral.frequency(argmax), {}, sup, term.label, {}};
    }
    if (outer < 2) continue;
    for (const Index sign : {Index(1), Index(-1)}) {
      const Index ko = spectral.index_of(sign * outer), kn = spectral.index_of(sign * near_outer);
      const double edge_slope = log_slope(std::abs(spectral.frequency(kn)), term.values(kn),
                                          std::abs(spectral.frequency(ko)), term.values(ko));
      if (edge_slope > kTrendThreshold && term.values(ko) >= 0.99 * sup) {
        report.witnesses.push_back({spectral.frequency(ko), {}, term.values(ko), term.label + " unbounded at grid edge", {}});
        report.notes.push_back(term.label + ": grows like |xi|^" + describe(edge_slope) + " toward the grid edge");
        break;
      }
      const Index k1 = spectral.index_of(sign), ki = spectral.index_of(sign * inner);
      const double zero_slope = log_slope(std::abs(spectral.frequency(k1)), term.values(k1),
                                          std::abs(spectral.frequency(ki)), term.values(ki));
      if (zero_slope < -kTrendThreshold && term.values(k1) >= 0.99 * sup) {
        report.witnesses.push_back({spectral.frequency(k1), {}, term.values(k1), term.label + " unbounded toward xi -> 0", {}});
        report.notes.push_back(term.label + ": grows like |xi|^" + describe(zero_slope) + " toward xi -> 0");
        break;
      }
    }
  }
}

}  // namespace

MikhlinReport check_mikhlin_bounds(const EllipticProblem& prob, DerivativeMode mode) {
  const SpectralGrid spectral(prob.grid);
  const Index n = spectral.size();
  const bool analytic = mode == DerivativeMode::Analytic;

  std::vector<TermSeries> scalar{{"|a|", Eigen::ArrayXd::Zero(n)}, {"|xi||a'|", Eigen::ArrayXd::Zero(n)}};
  std::vector<TermSeries> matrix{{"|A A0^-1|", Eigen::ArrayXd::Zero(n)},
                                 {"|xi||A' A0^-1|", Eigen::ArrayXd::Zero(n)}};
  const Eigen::MatrixXcd reference_inverse = prob.op(prob.op.reference_frequency()).inverse();

  for (Index k = 0; k < n; ++k) {
    const double xi = spectral.frequency(k);
    if (xi == 0.0) continue;
    const Complex da = analytic ? prob.coefficient.derivative(xi) : prob.coefficient.finite_difference_derivative(xi);
    const Eigen::MatrixXcd dA = analytic ? prob.op.derivative(xi) : prob.op.finite_difference_derivative(xi);
    scalar[0].values(k) = std::abs(prob.coefficient(xi));
    scalar[1].values(k) = std::abs(xi) * std::abs(da);
    matrix[0].values(k) = spectral_norm(prob.op(xi) * reference_inverse);
    matrix[1].values(k) = std::abs(xi) * spectral_norm(dA * reference_inverse);
  }

  MikhlinReport out;
  for (auto* r : {&out.coefficient, &out.operator_symbol}) {
    r->grid_size = prob.grid.size();
    r->half_width = prob.grid.half_width();
  }
  out.coefficient.name = "coefficient Mikhlin bound";
  out.operator_symbol.name = "operator Mikhlin bound";
  summarize_terms(out.coefficient, spectral, scalar);
  summarize_terms(out.operator_symbol, spectral, matrix);
  const char* source = analytic ? "derivatives: analytic where available" : "derivatives: central difference";
  out.coefficient.notes.push_back(source);
  out.operator_symbol.notes.push_back(source);
  return out;
}

ConditionReport symbol_resolvent_bound(const EllipticProblem& prob, std::span<const Complex> lambdas) {
  ConditionReport report;
  report.name = "symbol resolvent bound";
  report.grid_size = prob.grid.size();
  report.half_width = prob.grid.half_width();
  const SpectralGrid spectral(prob.grid);
  for (const Complex lambda : lambdas) {
    if (!prob.sector.contains(lambda))
      throw PreconditionError("lambda = " + describe(lambda) + " lies outside the problem sector");
    for (Index k = 0; k < spectral.size(); ++k) {
      const double xi = spectral.frequency(k);
      const auto [lo, hi] = singular_range(q_symbol(prob, xi, lambda));
      if (!(lo > 1e-14 * std::max(1.0, hi)))
        throw SolveError("singular symbol Q(xi = " + describe(xi) + ", lambda = " + describe(lambda) + ")");
      const double value = (1.0 + std::abs(lambda) + xi * xi) / lo;
      if (!report.extremal || value > report.constant) {
        report.constant = value;
        report.extremal = Witness{xi, lambda, value, "argmax", {}};
      }
    }
  }
  return report;
}

double sector_sum_ratio(const Sector& phi1, const Sector& phi2, const InequalitySampling& sampling) {
  const auto radii = log_space(sampling.radius_min, sampling.radius_max, sampling.radii);
  auto lattice = [&](const Sector& s) {
    std::vector<Complex> points;
    for (const double angle : lin_space(-s.angle(), s.angle(), sampling.angles))
      for (const double r : radii) points.push_back(std::polar(r, angle));
    return points;
  };
  const auto lambdas = lattice(phi2);
  const auto nus = lattice(phi1);
  double best = std::numeric_limits<double>::infinity();
  for (const Complex l : lambdas)
    for (const Complex v : nus) best = std::min(best, std::abs(l + v) / (std::abs(l) + std::abs(v)));
  return best;
}

InequalityReport scalar_inequality_suite(const Sector& phi1, const Sector& phi2, double gamma, Index samples,
                                         const InequalitySampling& sampling) {
  if (!(phi1.angle() + phi2.angle() < std::numbers::pi))
    throw PreconditionError("sector angles must satisfy phi1 + phi2 < pi");
  const double g = FractionalOrder::problem(gamma).value();
  InequalityReport out;

  auto& sum = out.sector_sum;
  sum.name = "sector sum lower bound";
  sum.constant = sector_sum_ratio(phi1, phi2, sampling);
  if (!(sum.constant > 0.0)) sum.witnesses.push_back({0.0, {}, sum.constant, "ratio not positive", {}});
  sum.notes.push_back("lattice: " + std::to_string(sampling.angles) + " angles x " + std::to_string(sampling.radii) +
                      " radii per sector");

  auto& interp = out.interpolation;
  interp.name = "interpolation inequality";
  std::mt19937_64 rng(sampling.seed);
  std::uniform_real_distribution<double> exponent(-3.0, 3.0);
  std::uniform_real_distribution<double> order(0.0, g);
  std::bernoulli_distribution sign(0.5);
  interp.constant = 0.0;
  for (Index i = 0; i < samples; ++i) {
    const double lam = std::pow(10.0, exponent(rng));
    const double xi = (sign(rng) ? 1.0 : -1.0) * std::pow(10.0, exponent(rng));
    const double s = i == 0 ? 0.0 : (i == 1 ? g : order(rng));
    const double lhs = std::pow(lam, 1.0 - s / g) * std::pow(std::abs(xi), s);
    const double rhs = lam + std::pow(std::abs(xi), g);
    interp.constant = std::max(interp.constant, lhs / rhs);
    if (!(lhs <= rhs)) interp.witnesses.push_back({xi, Complex(lam, s), lhs - rhs, "lhs exceeds rhs", {}});
  }
  interp.notes.push_back("exponent on |lambda| is 1 - s/gamma");
  return out;
}

}  // namespace fracspec
