// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "fracspec/bvp.hpp"
#include "fracspec/elliptic.hpp"
#include "fracspec/errors.hpp"
#include "fracspec/fractional.hpp"
#include "fracspec/parabolic.hpp"
#include "oracles.hpp"

using namespace fracspec;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void verdict(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] %2d %-34s %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buffer[512];
  std::snprintf(buffer, sizeof buffer, f, args...);
  return buffer;
}

// Runs a criterion body; an escaped exception is a failure with its message.
template <typename Body>
void criterion(int id, const char* name, Body&& body) {
  try {
    body();
  } catch (const std::exception& e) {
    verdict(id, name, false, std::string("exception: ") + e.what());
  }
}

EllipticProblem canonical(double gamma, Index size = 256, double half_width = 16.0) {
  return EllipticProblem{.order = FractionalOrder::problem(gamma),
                         .coefficient = CoefficientSymbol::constant(-1.0),
                         .op = OperatorSymbol::scalar(1.0),
                         .sector = Sector(pi / 4.0),
                         .grid = SpatialGrid(half_width, size)};
}

GridFunction gaussian(const SpatialGrid& g, Index dim = 1) {
  return GridFunction::sample_vector(g, dim, [dim](double x) {
    return Eigen::VectorXcd::Constant(dim, Complex(std::exp(-x * x), 0.0));
  });
}

double relative(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) { return (a - b).norm() / b.norm(); }

void dense_oracle_agreement() {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> pick(0, 2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal;
  const double gammas[] = {1.25, 1.5, 2.0};
  const Index sizes[] = {32, 64, 128};
  double worst = 0.0, seconds = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const double gamma = gammas[pick(rng)];
    const Index n = sizes[pick(rng)];
    const Index d = 1 + pick(rng);
    const double half_width = 4.0 + 12.0 * unit(rng);
    const double c = 0.5 + 1.5 * unit(rng);
    Eigen::MatrixXd b(d, d);
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) b(i, j) = normal(rng);
    const Eigen::MatrixXcd a = (b * b.transpose() + Eigen::MatrixXd::Identity(d, d)).cast<Complex>();
    const Complex lambda = std::polar(std::pow(10.0, -1.0 + 2.0 * unit(rng)), (2.0 * unit(rng) - 1.0) * pi / 4.0);
    const EllipticProblem p{.order = FractionalOrder::problem(gamma),
                            .coefficient = CoefficientSymbol::constant(-c),
                            .op = OperatorSymbol::constant(a),
                            .sector = Sector(pi / 4.0),
                            .grid = SpatialGrid(half_width, n)};
    const GridFunction f = random_band_limited(p.grid, d, rng);
    const auto start = std::chrono::steady_clock::now();
    const SolveReport r = solve_elliptic(p, f, lambda);
    seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const Eigen::MatrixXcd dense = oracle::dense_operator(
        n, half_width, d, gamma, [c](double) { return Complex(-c, 0.0); }, [&a](double) { return a; }, lambda);
    worst = std::max(worst, relative(r.solution.values(), oracle::dense_solve(dense, f.values())));
  }
  verdict(1, "spectral solve vs dense oracle", worst <= 1e-9 && seconds < 10.0,
          fmt("max rel err %.2e over 20 problems, solve time %.3f s", worst, seconds));
}

double bump(double x) {
  const double r = (x - 4.0) / 3.0;
  return std::abs(r) < 1.0 ? std::exp(-1.0 / (1.0 - r * r)) : 0.0;
}

void fractional_derivative_oracle() {
  const double gamma = 1.5;
  const SpatialGrid grid(128.0, Index(1) << 17);
  const GridFunction f = GridFunction::sample(grid, [](double x) { return Complex(bump(x), 0.0); });
  const GridFunction spectral = liouville_derivative(f, gamma);
  const double probes[] = {2.5, 3.0, 4.0, 5.0, 6.0};
  std::vector<double> errors;
  for (int level = 4; level <= 7; ++level) {
    const double h = std::ldexp(1.0, -level);
    double err = 0.0;
    for (const double x : probes) {
      const Index j = static_cast<Index>(std::llround((x - 1.0) / h));
      const double gl = oracle::gl_derivative([](double y) { return bump(1.0 + y); }, gamma, h, j);
      const Index at = static_cast<Index>(std::llround((x + 128.0) / grid.spacing()));
      err = std::max(err, std::abs(spectral.values()(0, at).real() - gl));
    }
    errors.push_back(err);
  }
  bool ratios_ok = true;
  std::string ratios;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double ratio = errors[i - 1] / errors[i];
    ratios_ok = ratios_ok && ratio >= 1.8 && ratio <= 2.2;
    ratios += fmt(" %.3f", ratio);
  }

  const double h = std::ldexp(1.0, -10);
  const Index n = (Index(1) << 10) + 1;
  Eigen::ArrayXd square(n);
  for (Index j = 0; j < n; ++j) square(j) = std::pow(static_cast<double>(j) * h, 2.0);
  const double power_err = std::abs(rl_derivative_oracle_at(square, h, gamma, n - 1) - oracle::power_rule(2.0, gamma, 1.0));
  verdict(2, "fractional derivative vs GL oracle", ratios_ok && power_err <= 1e-3,
          fmt("halving ratios%s; power rule err %.2e", ratios.c_str(), power_err));
}

void residuals() {
  const EllipticProblem core = canonical(1.5);
  double elliptic_worst = 0.0;
  for (const double lambda : {0.0, 0.01, 1.0, 100.0}) {
    const SolveReport r = solve_elliptic(core, gaussian(core.grid), lambda);
    elliptic_worst = std::max(elliptic_worst, r.residual_norm / r.forcing_norm);
  }
  const GridFunction g = gaussian(core.grid);
  const auto profile = [](double t) { return Complex(std::sin(pi * t), 0.0); };
  double parabolic[2];
  const Index steps[] = {256, 1024};
  for (int i = 0; i < 2; ++i) {
    const ParabolicProblem p{core, TimeGrid(1.0, steps[i])};
    const SpaceTimeFunction f = SpaceTimeFunction::separable(p.time, profile, g);
    parabolic[i] = parabolic_coercive_report(p, f, solve_parabolic(p, f), 2.0, 2.0).residual;
  }
  verdict(3, "solver residuals", elliptic_worst <= 1e-9 && parabolic[0] <= 0.02 && parabolic[1] <= 0.005,
          fmt("elliptic %.2e; parabolic %.2e (Nt=256), %.2e (Nt=1024)", elliptic_worst, parabolic[0], parabolic[1]));
}

void sectoriality() {
  Eigen::MatrixXcd coupled(2, 2);
  coupled << 2.0, 1.0, 1.0, 2.0;
  bool ok = true;
  std::string detail;
  for (const double gamma : {1.5, 2.0})
    for (const bool matrix : {false, true}) {
      EllipticProblem p = canonical(gamma);
      if (matrix) p.op = OperatorSymbol::constant(coupled);
      SweepOptions options;
      options.angle = pi / 4.0;
      const SectorialityReport r = resolvent_sweep(p, options);
      ok = ok && r.singular.empty() && r.refinement_change < 0.05;
      if (gamma == 2.0 && !matrix) ok = ok && r.sup <= 1.0 + 1e-10;
      detail += fmt("%sg=%.1f%s sup %.4f d=%.1e", detail.empty() ? "" : "; ", gamma, matrix ? "/2x2" : "", r.sup,
                    r.refinement_change);
    }
  verdict(4, "resolvent sweep", ok, detail);
}

void coercive_estimate() {
  bool ok = true;
  double drift = 0.0, second_order = 0.0;
  for (const double gamma : {1.5, 2.0}) {
    const std::vector<double> s_set = default_s_set(gamma);
    for (int k = -2; k <= 4; ++k) {
      const double lambda = std::pow(10.0, k);
      const EllipticProblem coarse = canonical(gamma, 256);
      const EllipticProblem fine = coarse.refined();
      const double a = coercive_report(coarse, gaussian(coarse.grid), lambda, s_set, 2.0).coercive_ratio;
      const double b = coercive_report(fine, gaussian(fine.grid), lambda, s_set, 2.0).coercive_ratio;
      drift = std::max(drift, std::abs(b - a) / a);
      if (gamma == 2.0) second_order = std::max(second_order, b);
    }
  }
  ok = drift < 0.05 && second_order <= 3.01;
  verdict(5, "coercive ratio", ok, fmt("max drift under N doubling %.2e; gamma=2 max ratio %.4f", drift, second_order));
}

void separability() {
  const EllipticProblem p = canonical(1.5, 128);
  const SeparabilityReport small = separability_check(p, 50, 2.0);
  const SeparabilityReport large = separability_check(p, 200, 2.0);
  const double change = std::abs(large.upper_constant - small.upper_constant) / small.upper_constant;
  verdict(6, "separability", small.report.pass() && large.report.pass() && change < 0.1,
          fmt("lower %.4f upper %.4f (50) %.4f (200), change %.2e", large.lower_constant, small.upper_constant,
              large.upper_constant, change));
}

void inequalities() {
  double lowest = std::numeric_limits<double>::infinity();
  for (const double phi1 : lin_space(0.0, pi - 0.1, 9))
    for (const double phi2 : lin_space(0.0, pi - 0.1 - phi1, 5)) lowest = std::min(lowest, sector_sum_ratio(Sector(phi1), Sector(phi2)));
  const InequalityReport r = scalar_inequality_suite(Sector(pi / 4.0), Sector(pi / 2.0), 1.5, 10000);
  verdict(7, "scalar inequalities", lowest > 0.0 && r.interpolation.witnesses.empty(),
          fmt("min sector ratio %.4e; interpolation violations %zu / 10000", lowest, r.interpolation.witnesses.size()));
}

double slope(const std::vector<double>& h, const std::vector<double>& e) {
  const Index n = static_cast<Index>(h.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd rhs(n);
  for (Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = std::log(h[static_cast<std::size_t>(i)]);
    rhs(i) = std::log(e[static_cast<std::size_t>(i)]);
  }
  return design.colPivHouseholderQr().solve(rhs)(1);
}

void parabolic_schemes() {
  const EllipticProblem core = canonical(1.5, 64, 8.0);
  const SpectralGrid s(core.grid);
  const double xi = s.frequency(s.index_of(3));
  const GridFunction h = GridFunction::sample(core.grid, [xi](double x) { return std::polar(1.0, xi * x); });
  const GridFunction exact = constant_forcing_solution(core, h, 1.0);
  std::vector<double> dt, ie, cn;
  for (const Index n : {64, 128, 256, 512}) {
    const ParabolicProblem p{core, TimeGrid(1.0, n)};
    const SpaceTimeFunction f = SpaceTimeFunction::separable(p.time, [](double) { return Complex(1.0, 0.0); }, h);
    dt.push_back(p.time.step());
    ie.push_back(relative(solve_parabolic_stepped(p, f, TimeScheme::ImplicitEuler).slices().back(), exact.values()));
    cn.push_back(relative(solve_parabolic_stepped(p, f, TimeScheme::CrankNicolson).slices().back(), exact.values()));
  }
  const double ie_slope = slope(dt, ie), cn_slope = slope(dt, cn);

  const EllipticProblem wide = canonical(1.5, 128);
  const GridFunction g = gaussian(wide.grid);
  const double horizon = 50.0 / min_dissipation(wide);
  const ParabolicProblem p{wide, TimeGrid(horizon, 100)};
  const SpaceTimeFunction u =
      solve_parabolic(p, SpaceTimeFunction::separable(p.time, [](double) { return Complex(1.0, 0.0); }, g));
  const double steady = (u.slices().back() - solve_elliptic(wide, g, 0.0).solution.values()).cwiseAbs().maxCoeff();
  verdict(8, "parabolic time stepping", std::abs(ie_slope - 1.0) <= 0.15 && std::abs(cn_slope - 2.0) <= 0.15 && steady <= 1e-6,
          fmt("slopes IE %.3f CN %.3f; steady-state gap %.2e", ie_slope, cn_slope, steady));
}

void system_gate() {
  const SystemMatrix identity(Eigen::MatrixXd::Identity(2, 2));
  bool rejected = false;
  std::string message;
  try {
    Eigen::MatrixXd bad(2, 2);
    bad << 1.0, 2.0, 2.0, 1.0;
    SystemMatrix{bad};
  } catch (const DomainError& e) {
    message = e.what();
    rejected = message.find("-1") != std::string::npos;
  }
  const SpatialGrid grid(16.0, 128);
  const SystemMatrix diag(Eigen::Vector3d(1.0, 2.5, 4.0).asDiagonal().toDenseMatrix());
  std::mt19937_64 rng(9);
  const GridFunction f = random_band_limited(grid, 3, rng);
  const Complex lambda(1.0, 0.5);
  const SystemReport r = solve_system(diag, FractionalOrder::problem(1.5), CoefficientSymbol::constant(-1.0), lambda, f,
                                      Sector(pi / 4.0));
  double gap = 0.0;
  for (Index i = 0; i < 3; ++i) {
    EllipticProblem scalar = canonical(1.5, 128);
    scalar.op = OperatorSymbol::scalar(diag.entries()(i, i));
    const GridFunction ui = solve_elliptic(scalar, GridFunction(grid, f.values().row(i)), lambda).solution;
    gap = std::max(gap, (r.solve.solution.values().row(i) - ui.values()).cwiseAbs().maxCoeff());
  }
  verdict(9, "system SPD gate", identity.coercivity() == 1.0 && rejected && gap <= 1e-12,
          fmt("C0=%.3f; rejection: \"%s\"; decoupling gap %.2e", identity.coercivity(), message.c_str(), gap));
}

void boundary_value_problem() {
  const FractionalOrder order = FractionalOrder::problem(1.5);
  const CoefficientSymbol a = CoefficientSymbol::constant(-1.0);
  const SpatialGrid grid(16.0, 128);
  std::vector<double> errors;
  for (const Index m : {16, 32, 64}) {
    const BvpCoefficients c = BvpCoefficients::constant(1.0, 0.0, 0.0, m);
    const ManufacturedCase mc = manufactured_case(c, order, a, grid, 10.0);
    const EllipticProblem p = anisotropic_problem(c, order, a, grid, Sector(pi / 4.0));
    errors.push_back((solve_elliptic(p, mc.forcing, 10.0).solution.values() - mc.exact.values()).cwiseAbs().maxCoeff());
  }
  const double r1 = errors[0] / errors[1], r2 = errors[1] / errors[2];
  const bool converges = r1 >= 3.6 && r1 <= 4.4 && r2 >= 3.6 && r2 <= 4.4 && errors[2] <= 1e-4;

  const bool good = check_ellipticity(BvpCoefficients::constant(1.0, 0.0, 0.0, 32), Sector(0.5)).pass();
  const ConditionReport bad = check_ellipticity(BvpCoefficients::constant(-1.0, 0.0, 0.0, 32), Sector(0.5));
  bool witness = false;
  for (const Witness& w : bad.witnesses) witness = witness || std::abs(w.parameter - w.xi * w.xi) <= 1e-8 * std::abs(w.parameter);
  verdict(10, "anisotropic boundary problem", converges && good && !bad.pass() && witness,
          fmt("ratios %.3f %.3f, err(64) %.2e; b2=1 %s, b2=-1 %zu witnesses", r1, r2, errors[2], good ? "elliptic" : "rejected",
              bad.witnesses.size()));
}

double embedding_sup(std::uint64_t seed) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = 4.0;
  EllipticProblem p = canonical(2.0, 256);
  p.op = OperatorSymbol::constant(a);
  std::mt19937_64 rng(seed);
  std::vector<GridFunction> samples;
  for (int t = 0; t < 20; ++t) samples.push_back(random_band_limited(p.grid, 2, rng));
  double sup = 0.0;
  for (const double alpha : {0.0, 1.0})
    for (const double mu : {0.0, 0.25}) {
      EmbeddingParameters params;
      params.alpha = alpha;
      params.smoothness = 2.0;
      params.mu = mu;
      for (const GridFunction& u : samples) sup = std::max(sup, embedding_probe(p, u, params).max_ratio);
    }
  return sup;
}

void embedding() {
  const double first = embedding_sup(kDefaultSeed), second = embedding_sup(kDefaultSeed + 1);
  const double change = std::abs(first - second) / first;
  verdict(11, "embedding probe", std::isfinite(first) && std::isfinite(second) && change < 0.1,
          fmt("sup ratio %.4f (seed a) %.4f (seed b), change %.2e", first, second, change));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void determinism() {
  const fs::path root = fs::temp_directory_path() / ("fracspec_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  std::ofstream(root / "run.ini") << "[task]\nname = solve-elliptic\n[problem]\ngamma = 1.5\nsize = 256\n"
                                     "[parameters]\nforcing = random\nlambda = (1,0.5)\n";
  bool ok = true;
  for (const char* name : {"a", "b"}) {
    const std::string cmd = std::string("'") + FRACSPEC_CLI_PATH + "' --config '" + (root / "run.ini").string() +
                            "' --out '" + (root / name).string() + "' 2>/dev/null";
    const int status = std::system(cmd.c_str());
    ok = ok && WIFEXITED(status) && WEXITSTATUS(status) == 0;
  }
  const std::string a = slurp(root / "a" / "solution.csv"), b = slurp(root / "b" / "solution.csv");
  const bool same = ok && !a.empty() && a == b;
  fs::remove_all(root);
  verdict(12, "deterministic CLI output", same, fmt("two runs, %zu bytes each, %s", a.size(), same ? "identical" : "differ"));
}

}  // namespace

int main() {
  criterion(1, "spectral solve vs dense oracle", dense_oracle_agreement);
  criterion(2, "fractional derivative vs GL oracle", fractional_derivative_oracle);
  criterion(3, "solver residuals", residuals);
  criterion(4, "resolvent sweep", sectoriality);
  criterion(5, "coercive ratio", coercive_estimate);
  criterion(6, "separability", separability);
  criterion(7, "scalar inequalities", inequalities);
  criterion(8, "parabolic time stepping", parabolic_schemes);
  criterion(9, "system SPD gate", system_gate);
  criterion(10, "anisotropic boundary problem", boundary_value_problem);
  criterion(11, "embedding probe", embedding);
  criterion(12, "deterministic CLI output", determinism);
  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
