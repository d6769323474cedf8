#include "fracspec/bvp.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace fracspec {

namespace {

constexpr double kDegenerate = 1e-8;

std::string describe(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

// h_y-weighted l₂ in y, L_p in x.
double anisotropic_norm(const Eigen::MatrixXcd& v, const BvpCoefficients& coeffs, double spacing, double p) {
  return std::sqrt(coeffs.spacing()) * lp_norm(v, spacing, p);
}

}  // namespace

BvpCoefficients BvpCoefficients::constant(double b2, double b1, double b0, Index interior_points) {
  return BvpCoefficients{[b2](double) { return b2; }, [b1](double) { return b1; }, [b0](double) { return b0; },
                         interior_points};
}

void require_nondegenerate(const BvpCoefficients& coeffs) {
  if (coeffs.interior_points < 1) throw ConfigurationError("bvp mesh needs at least one interior point");
  if (!coeffs.b2 || !coeffs.b1 || !coeffs.b0) throw ConfigurationError("bvp coefficient function missing");
  const double h = coeffs.spacing();
  for (Index i = 0; i <= coeffs.interior_points + 1; ++i) {
    const double y = static_cast<double>(i) * h;
    if (!(std::abs(coeffs.b2(y)) >= kDegenerate))
      throw DomainError("leading coefficient b2 degenerates at y = " + describe(y));
  }
}

Eigen::MatrixXcd discretize_bvp(const BvpCoefficients& coeffs) {
  require_nondegenerate(coeffs);
  const Index m = coeffs.interior_points;
  const double h = coeffs.spacing();
  const Complex i_unit(0.0, 1.0);
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(m, m);
  for (Index i = 0; i < m; ++i) {
    const double y = coeffs.node(i);
    const double b2 = coeffs.b2(y) / (h * h);
    const Complex b1 = i_unit * coeffs.b1(y) / (2.0 * h);
    a(i, i) = 2.0 * b2 + coeffs.b0(y);
    if (i + 1 < m) a(i, i + 1) = -b2 - b1;
    if (i > 0) a(i, i - 1) = -b2 + b1;
  }
  return a;
}

double min_hermitian_eigenvalue(const Eigen::MatrixXcd& a) {
  const Eigen::MatrixXcd hermitian = 0.5 * (a + a.adjoint());
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(hermitian, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

ConditionReport check_ellipticity(const BvpCoefficients& coeffs, const Sector& phi0, const EllipticityMesh& mesh) {
  if (!(phi0.angle() < 0.5 * std::numbers::pi)) throw PreconditionError("ellipticity sector angle must be below pi/2");
  if (coeffs.interior_points < 1 || !coeffs.b2) throw ConfigurationError("bvp coefficients incomplete");

  std::vector<double> xis{0.0};
  for (const double r : mesh.radii) xis.push_back(std::sqrt(r));
  std::vector<Complex> sigmas{Complex(0.0, 0.0)};
  for (const double theta : lin_space(-phi0.angle(), phi0.angle(), mesh.angles))
    for (const double r : mesh.radii) sigmas.push_back(std::polar(r, theta));

  ConditionReport report;
  report.name = "ellipticity";
  report.grid_size = coeffs.interior_points;
  report.constant = std::numeric_limits<double>::infinity();
  const double h = coeffs.spacing();
  for (Index i = 0; i <= coeffs.interior_points + 1; ++i) {
    const double y = static_cast<double>(i) * h;
    const double b2 = coeffs.b2(y);
    for (const double xi : xis) {
      for (const Complex sigma : sigmas) {
        const double scale = std::abs(sigma) + xi * xi;
        if (scale == 0.0) continue;
        const double value = std::abs(sigma + b2 * xi * xi) / scale;
        const Witness w{xi, sigma, value, "sigma + b2(y) xi^2 vanishes", y};
        if (value < report.constant) {
          report.constant = value;
          report.extremal = w;
        }
        if (!(value >= kDegenerate)) report.witnesses.push_back(w);
      }
    }
  }
  report.notes.push_back("boundary solvability of the Dirichlet problem is not checked");
  return report;
}

EllipticProblem anisotropic_problem(const BvpCoefficients& coeffs, FractionalOrder order,
                                    CoefficientSymbol coefficient, const SpatialGrid& grid, Sector sector) {
  return EllipticProblem{.order = order,
                         .coefficient = std::move(coefficient),
                         .op = OperatorSymbol::constant(discretize_bvp(coeffs)),
                         .sector = sector,
                         .grid = grid,
                         .form = SymbolForm::Unfactored};
}

GridFunction sample_on_mesh(const BvpCoefficients& coeffs, const SpatialGrid& grid,
                            const std::function<Complex(double x, double y)>& g) {
  return GridFunction::sample_vector(grid, coeffs.interior_points, [&](double x) {
    Eigen::VectorXcd v(coeffs.interior_points);
    for (Index i = 0; i < coeffs.interior_points; ++i) v(i) = g(x, coeffs.node(i));
    return v;
  });
}

AnisotropicReport solve_anisotropic(const BvpCoefficients& coeffs, FractionalOrder order,
                                    CoefficientSymbol coefficient, Complex lambda, const GridFunction& f,
                                    Sector sector, std::span<const double> s_set, double p) {
  const EllipticProblem prob = anisotropic_problem(coeffs, order, std::move(coefficient), f.grid(), sector);
  std::vector<double> defaults;
  if (s_set.empty()) {
    defaults = default_s_set(prob.gamma());
    s_set = defaults;
  }
  AnisotropicReport report{coercive_report(prob, f, lambda, s_set, p), {}, 0.0};
  const GridFunction& u = report.solve.solution;
  const double hx = f.grid().spacing();
  const double gamma = prob.gamma();

  double sum = 0.0;
  for (const double s : s_set) {
    const double norm = anisotropic_norm(convolved_derivative(prob, u, s).values(), coeffs, hx, p);
    std::ostringstream key;
    key << "a*D^" << s << " u";
    report.terms[key.str()] = norm;
    sum += std::pow(std::abs(lambda), 1.0 - s / gamma) * norm;
  }

  // D_y = -i∂_y and D_y² = -∂²_y with zero Dirichlet values
  const Index m = coeffs.interior_points;
  const double hy = coeffs.spacing();
  Eigen::MatrixXcd d1 = Eigen::MatrixXcd::Zero(m, m);
  Eigen::MatrixXcd d2 = Eigen::MatrixXcd::Zero(m, m);
  for (Index i = 0; i < m; ++i) {
    d2(i, i) = 2.0 / (hy * hy);
    if (i + 1 < m) {
      d1(i, i + 1) = Complex(0.0, -1.0 / (2.0 * hy));
      d2(i, i + 1) = -1.0 / (hy * hy);
    }
    if (i > 0) {
      d1(i, i - 1) = Complex(0.0, 1.0 / (2.0 * hy));
      d2(i, i - 1) = -1.0 / (hy * hy);
    }
  }
  const double y0 = anisotropic_norm(u.values(), coeffs, hx, p);
  const double y1 = anisotropic_norm(d1 * u.values(), coeffs, hx, p);
  const double y2 = anisotropic_norm(d2 * u.values(), coeffs, hx, p);
  report.terms["D_y^0 u"] = y0;
  report.terms["D_y^1 u"] = y1;
  report.terms["D_y^2 u"] = y2;
  sum += y0 + y1 + y2;
  const double fnorm = anisotropic_norm(f.values(), coeffs, hx, p);
  report.terms["f"] = fnorm;
  report.ratio = fnorm > 0.0 ? sum / fnorm : 0.0;
  return report;
}

ManufacturedCase manufactured_case(const BvpCoefficients& coeffs, FractionalOrder order,
                                   const CoefficientSymbol& coefficient, const SpatialGrid& grid, Complex lambda) {
  using std::numbers::pi;
  require_nondegenerate(coeffs);
  const GridFunction profile = GridFunction::sample(grid, [](double x) { return Complex(std::exp(-x * x), 0.0); });
  const double gamma = order.value();
  const GridFunction shifted = apply_scalar_multiplier(
      profile, [&](double xi) { return coefficient(xi) * frac_power_i_xi(xi, gamma) + lambda; });

  const Index n = grid.size();
  const Index m = coeffs.interior_points;
  Eigen::MatrixXcd exact(m, n), forcing(m, n);
  for (Index i = 0; i < m; ++i) {
    const double y = coeffs.node(i);
    const double s = std::sin(pi * y);
    // (b₂D² + b₁D + b₀) sin(πy) with D = -i∂_y
    const Complex y_part = coeffs.b2(y) * pi * pi * s + Complex(0.0, -1.0) * coeffs.b1(y) * pi * std::cos(pi * y) +
                           coeffs.b0(y) * s;
    for (Index j = 0; j < n; ++j) {
      exact(i, j) = s * profile.values()(0, j);
      forcing(i, j) = s * shifted.values()(0, j) + y_part * profile.values()(0, j);
    }
  }
  return ManufacturedCase{GridFunction(grid, std::move(exact)), GridFunction(grid, std::move(forcing))};
}

}  // namespace fracspec
