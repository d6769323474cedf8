#include "fracspec/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "fracspec/bvp.hpp"
#include "fracspec/elliptic.hpp"
#include "fracspec/errors.hpp"
#include "fracspec/parabolic.hpp"

namespace fracspec {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr double kQuarterPi = std::numbers::pi / 4.0;
constexpr double kErrorFloor = 1e-11;

std::vector<std::string> split(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  std::string token;
  while (in >> token) out.push_back(token);
  return out;
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

json number_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json witness_json(const Witness& w) {
  json out{{"xi", w.xi}, {"parameter", complex_json(w.parameter)}, {"magnitude", number_json(w.magnitude)},
           {"what", w.what}};
  if (w.y) out["y"] = *w.y;
  return out;
}

json condition_json(const ConditionReport& r) {
  json out{{"name", r.name},
           {"pass", r.pass()},
           {"constant", number_json(r.constant)},
           {"witness_count", r.witnesses.size()},
           {"notes", r.notes},
           {"grid_size", r.grid_size},
           {"half_width", r.half_width}};
  json witnesses = json::array();
  // the full list can be long; the CSV has all of them
  for (std::size_t i = 0; i < r.witnesses.size() && i < 20; ++i) witnesses.push_back(witness_json(r.witnesses[i]));
  out["witnesses"] = witnesses;
  if (r.extremal) out["extremal"] = witness_json(*r.extremal);
  return out;
}

json terms_json(const std::map<std::string, double>& terms) {
  json out = json::object();
  for (const auto& [k, v] : terms) out[k] = number_json(v);
  return out;
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::string& header) : out_(path, std::ios::binary) {
    if (!out_) throw ConfigurationError("[output] directory: cannot write " + path.string());
    out_ << header << '\n';
  }

  void row(std::initializer_list<double> values) { row(std::vector<double>(values)); }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_number(values[i]);
    out_ << '\n';
  }

  void raw(const std::string& line) { out_ << line << '\n'; }

 private:
  std::ofstream out_;
};

std::string component_header(Index dim) {
  if (dim == 1) return "re_u,im_u";
  std::string h;
  for (Index i = 1; i <= dim; ++i) {
    if (i > 1) h += ",";
    h += "re_u" + std::to_string(i) + ",im_u" + std::to_string(i);
  }
  return h;
}

struct Context {
  explicit Context(const RunConfig& c) : config(c) {}

  const RunConfig& config;
  fs::path base;
  fs::path out;
  bool csv = true;
  bool json_report = true;
  unsigned threads = 1;
  json results = json::object();
  bool failed = false;
  json files = json::array();

  fs::path file(const std::string& name) {
    files.push_back(name);
    return out / name;
  }
};

void write_grid_csv(Context& ctx, const std::string& name, const GridFunction& u) {
  if (!ctx.csv) return;
  CsvWriter csv(ctx.file(name), "x," + component_header(u.dim()));
  for (Index j = 0; j < u.size(); ++j) {
    std::vector<double> row{u.grid().point(j)};
    for (Index i = 0; i < u.dim(); ++i) {
      row.push_back(u.values()(i, j).real());
      row.push_back(u.values()(i, j).imag());
    }
    csv.row(row);
  }
}

void write_space_time_csv(Context& ctx, const std::string& name, const SpaceTimeFunction& u) {
  if (!ctx.csv) return;
  std::string header = "t,x";
  if (u.dim() == 1) {
    header += ",re_u1,im_u1";
  } else {
    header += "," + component_header(u.dim());
  }
  CsvWriter csv(ctx.file(name), header);
  for (Index m = 0; m < u.time().samples(); ++m) {
    const Eigen::MatrixXcd& slice = u.slices()[static_cast<std::size_t>(m)];
    for (Index j = 0; j < u.grid().size(); ++j) {
      std::vector<double> row{u.time().time(m), u.grid().point(j)};
      for (Index i = 0; i < u.dim(); ++i) {
        row.push_back(slice(i, j).real());
        row.push_back(slice(i, j).imag());
      }
      csv.row(row);
    }
  }
}

void write_witness_csv(Context& ctx, const std::string& name, const std::vector<const ConditionReport*>& reports) {
  if (!ctx.csv) return;
  CsvWriter csv(ctx.file(name), "check,xi,re_parameter,im_parameter,magnitude,y");
  for (const ConditionReport* r : reports) {
    for (const Witness& w : r->witnesses) {
      std::ostringstream line;
      line << r->name << ',' << format_number(w.xi) << ',' << format_number(w.parameter.real()) << ','
           << format_number(w.parameter.imag()) << ',' << format_number(w.magnitude) << ','
           << (w.y ? format_number(*w.y) : std::string());
      csv.raw(line.str());
    }
  }
}

std::uint64_t run_seed(const Context& ctx) { return ctx.config.seed("parameters", "seed", kDefaultSeed); }

Index positive_count(const RunConfig& c, const std::string& section, const std::string& key, long long fallback) {
  const long long v = c.integer(section, key, fallback);
  if (v < 1) throw ConfigurationError("[" + section + "] " + key + ": must be positive");
  return static_cast<Index>(v);
}

GridFunction forcing_from_config(const Context& ctx, const SpatialGrid& grid, Index dim) {
  const std::string spec = ctx.config.text("parameters", "forcing", "gaussian");
  const auto tokens = split(spec);
  if (tokens.empty()) throw ConfigurationError("[parameters] forcing: empty");
  if (tokens[0] == "gaussian" && tokens.size() == 1)
    return GridFunction::sample_vector(grid, dim, [dim](double x) {
      return Eigen::VectorXcd::Constant(dim, Complex(std::exp(-x * x), 0.0));
    });
  if (tokens[0] == "mode" && tokens.size() == 2) {
    const double m = parse_numbers(tokens[1]).at(0);
    const double xi = std::numbers::pi * m / grid.half_width();
    return GridFunction::sample_vector(grid, dim, [dim, xi](double x) {
      return Eigen::VectorXcd::Constant(dim, std::polar(1.0, xi * x));
    });
  }
  if (tokens[0] == "random" && tokens.size() == 1) {
    std::mt19937_64 rng(run_seed(ctx));
    return random_band_limited(grid, dim, rng);
  }
  throw ConfigurationError("[parameters] forcing: unknown forcing '" + spec + "'");
}

std::function<Complex(double)> time_profile(const Context& ctx, double horizon) {
  const std::string name = ctx.config.text("parameters", "time_profile", "constant");
  if (name == "constant") return [](double) { return Complex(1.0, 0.0); };
  if (name == "ramp") return [horizon](double t) { return Complex(t / horizon, 0.0); };
  if (name == "sine") return [horizon](double t) { return Complex(std::sin(std::numbers::pi * t / horizon), 0.0); };
  throw ConfigurationError("[parameters] time_profile: unknown profile '" + name + "'");
}

std::vector<double> s_set_from_config(const Context& ctx, double gamma) {
  return ctx.config.numbers("parameters", "s_set", default_s_set(gamma));
}

TimeGrid time_grid_from_config(const Context& ctx) {
  return TimeGrid(ctx.config.number("parameters", "horizon", 1.0), positive_count(ctx.config, "parameters", "steps", 256));
}

json solve_json(const SolveReport& r) {
  return json{{"lambda", complex_json(r.lambda)},
              {"residual", r.residual_norm},
              {"relative_residual", r.forcing_norm > 0.0 ? r.residual_norm / r.forcing_norm : 0.0},
              {"forcing_norm", r.forcing_norm},
              {"p", r.p},
              {"terms", terms_json(r.terms)},
              {"coercive_ratio", number_json(r.coercive_ratio)},
              {"coercive_ratio_direct", number_json(r.coercive_ratio_direct)}};
}

void task_solve_elliptic(Context& ctx, const EllipticProblem& prob) {
  const Complex lambda = ctx.config.complex("parameters", "lambda", Complex(1.0, 0.0));
  const double p = ctx.config.number("parameters", "p", 2.0);
  const GridFunction f = forcing_from_config(ctx, prob.grid, prob.dim());
  const std::vector<double> s_set = s_set_from_config(ctx, prob.gamma());
  const SolveReport r = coercive_report(prob, f, lambda, s_set, p);
  ctx.results = solve_json(r);
  write_grid_csv(ctx, "solution.csv", r.solution);
}

TimeScheme scheme_from_name(const std::string& key, const std::string& name) {
  if (name == "implicit-euler") return TimeScheme::ImplicitEuler;
  if (name == "crank-nicolson") return TimeScheme::CrankNicolson;
  throw ConfigurationError("[parameters] " + key + ": unknown scheme '" + name + "'");
}

MixedNormOrder norm_order(const Context& ctx) {
  const std::string name = ctx.config.text("parameters", "norm_order", "space-inner");
  if (name == "space-inner") return MixedNormOrder::SpaceInner;
  if (name == "time-inner") return MixedNormOrder::TimeInner;
  throw ConfigurationError("[parameters] norm_order: unknown order '" + name + "'");
}

void task_solve_parabolic(Context& ctx, const EllipticProblem& core) {
  const ParabolicProblem prob{core, time_grid_from_config(ctx)};
  const GridFunction profile = forcing_from_config(ctx, core.grid, core.dim());
  const SpaceTimeFunction f = SpaceTimeFunction::separable(prob.time, time_profile(ctx, prob.time.horizon()), profile);
  const std::string scheme = ctx.config.text("parameters", "scheme", "exact");
  const SpaceTimeFunction u = scheme == "exact"
                                  ? solve_parabolic(prob, f, ctx.threads)
                                  : solve_parabolic_stepped(prob, f, scheme_from_name("scheme", scheme), ctx.threads);
  const double p = ctx.config.number("parameters", "p", 2.0);
  const double p1 = ctx.config.number("parameters", "p1", 2.0);
  const ParabolicReport r = parabolic_coercive_report(prob, f, u, p, p1, norm_order(ctx));
  ctx.results = json{{"scheme", scheme},
                     {"terms", terms_json(r.terms)},
                     {"forcing_norm", r.forcing_norm},
                     {"ratio", r.ratio},
                     {"time_discretization_residual", r.residual},
                     {"min_dissipation", min_dissipation(core)},
                     {"p", p},
                     {"p1", p1}};
  write_space_time_csv(ctx, "solution.csv", u);
}

std::vector<double> radii_from_config(const Context& ctx) {
  const double lo = ctx.config.number("parameters", "radii_min", 1e-3);
  const double hi = ctx.config.number("parameters", "radii_max", 1e3);
  const Index count = positive_count(ctx.config, "parameters", "radii_count", 25);
  if (!(lo > 0.0 && hi >= lo)) throw ConfigurationError("[parameters] radii_min/radii_max: need 0 < min <= max");
  return log_space(lo, hi, count);
}

void task_resolvent_sweep(Context& ctx, const EllipticProblem& prob) {
  SweepOptions options;
  options.angle = ctx.config.number("parameters", "angle", prob.sector.angle());
  options.radii = radii_from_config(ctx);
  options.angles = positive_count(ctx.config, "parameters", "angles", 17);
  options.p = ctx.config.number("parameters", "p", 2.0);
  // the exact per-frequency norm is only the operator norm for p = 2
  options.probes = ctx.config.integer("parameters", "probes", options.p == 2.0 ? 0 : 64);
  options.seed = run_seed(ctx);
  options.refine = ctx.config.flag("parameters", "refine", true);
  options.threads = ctx.threads;
  const SectorialityReport r = resolvent_sweep(prob, options);
  json singular = json::array();
  for (const auto& w : r.singular) singular.push_back(witness_json(w));
  ctx.results = json{{"sup", r.sup},
                     {"probe_sup", r.probe_sup},
                     {"refined_sup", number_json(r.refined_sup)},
                     {"refinement_change", r.refinement_change},
                     {"stable", r.stable},
                     {"singular", singular},
                     {"points", r.lambdas.size()}};
  ctx.failed = !r.stable || !r.singular.empty();
  if (ctx.csv) {
    CsvWriter csv(ctx.file("sweep.csv"), "re_lambda,im_lambda,norm,probe");
    for (std::size_t i = 0; i < r.lambdas.size(); ++i)
      csv.row({r.lambdas[i].real(), r.lambdas[i].imag(), r.values[i],
               r.probe_values.empty() ? 0.0 : r.probe_values[i]});
  }
}

void task_verify_conditions(Context& ctx, const EllipticProblem& prob) {
  const Sector phi1(ctx.config.number("parameters", "phi1", kQuarterPi));
  const ConditionReport growth = check_symbol_sector_growth(prob, phi1);
  const std::string mode = ctx.config.text("parameters", "derivatives", "analytic");
  if (mode != "analytic" && mode != "finite-difference")
    throw ConfigurationError("[parameters] derivatives: unknown mode '" + mode + "'");
  const MikhlinReport mikhlin = check_mikhlin_bounds(
      prob, mode == "analytic" ? DerivativeMode::Analytic : DerivativeMode::FiniteDifference);

  std::vector<Complex> lambdas;
  const Index angles = positive_count(ctx.config, "parameters", "angles", 17);
  for (const double angle : lin_space(-prob.sector.angle(), prob.sector.angle(), angles))
    for (const double r : radii_from_config(ctx)) lambdas.push_back(std::polar(r, angle));
  ConditionReport resolvent;
  try {
    resolvent = symbol_resolvent_bound(prob, lambdas);
  } catch (const SolveError& e) {
    resolvent.name = "symbol resolvent bound";
    resolvent.witnesses.push_back({0.0, Complex(0.0, 0.0), 0.0, e.what(), {}});
  }

  InequalitySampling sampling;
  sampling.seed = run_seed(ctx);
  const Index samples = positive_count(ctx.config, "parameters", "samples", 10000);
  const InequalityReport inequalities =
      scalar_inequality_suite(phi1, prob.sector, prob.gamma(), samples, sampling);

  ctx.results = json{{"sector_growth", condition_json(growth)},
                     {"mikhlin_coefficient", condition_json(mikhlin.coefficient)},
                     {"mikhlin_operator", condition_json(mikhlin.operator_symbol)},
                     {"symbol_resolvent", condition_json(resolvent)},
                     {"sector_sum", condition_json(inequalities.sector_sum)},
                     {"interpolation", condition_json(inequalities.interpolation)}};
  ctx.failed = !(growth.pass() && mikhlin.pass() && resolvent.pass() && inequalities.pass());
  write_witness_csv(ctx, "witnesses.csv",
                    {&growth, &mikhlin.coefficient, &mikhlin.operator_symbol, &resolvent, &inequalities.sector_sum,
                     &inequalities.interpolation});
}

void task_separability(Context& ctx, const EllipticProblem& prob) {
  const Index trials = positive_count(ctx.config, "parameters", "trials", 50);
  const double p = ctx.config.number("parameters", "p", 2.0);
  const SeparabilityReport r =
      separability_check(prob, trials, p, run_seed(ctx), s_set_from_config(ctx, prob.gamma()));
  ctx.results = json{{"report", condition_json(r.report)},
                     {"lower_constant", r.lower_constant},
                     {"upper_constant", r.upper_constant}};
  ctx.failed = !r.report.pass();
  if (ctx.csv) {
    CsvWriter csv(ctx.file("ratios.csv"), "trial,ratio");
    for (std::size_t i = 0; i < r.ratios.size(); ++i) csv.row({static_cast<double>(i), r.ratios[i]});
  }
}

void task_embedding_probe(Context& ctx, const EllipticProblem& prob) {
  EmbeddingParameters params;
  params.alpha = ctx.config.number("parameters", "alpha", 0.0);
  params.smoothness = ctx.config.number("parameters", "smoothness", 2.0);
  params.p = ctx.config.number("parameters", "p", 2.0);
  params.q = ctx.config.number("parameters", "q", 2.0);
  params.mu = ctx.config.number("parameters", "mu", 0.0);
  params.h_set = ctx.config.numbers("parameters", "h_set", params.h_set);
  const Index trials = positive_count(ctx.config, "parameters", "trials", 20);
  std::mt19937_64 rng(run_seed(ctx));
  double max_ratio = 0.0, min_ratio = std::numeric_limits<double>::infinity();
  double kappa = 0.0;
  std::vector<EmbeddingReport> reports;
  for (Index t = 0; t < trials; ++t) {
    reports.push_back(embedding_probe(prob, random_band_limited(prob.grid, prob.dim(), rng), params));
    kappa = reports.back().kappa;
    for (const double r : reports.back().ratios) {
      max_ratio = std::max(max_ratio, r);
      min_ratio = std::min(min_ratio, r);
    }
  }
  ctx.results = json{{"kappa", kappa}, {"max_ratio", max_ratio}, {"min_ratio", number_json(min_ratio)}};
  if (ctx.csv) {
    CsvWriter csv(ctx.file("embedding.csv"), "trial,h,lhs,rhs,ratio");
    for (std::size_t t = 0; t < reports.size(); ++t)
      for (std::size_t i = 0; i < reports[t].h.size(); ++i)
        csv.row({static_cast<double>(t), reports[t].h[i], reports[t].lhs, reports[t].rhs[i], reports[t].ratios[i]});
  }
}

BvpCoefficients::Function bvp_function(const Context& ctx, const std::string& key, const std::string& fallback) {
  const std::string spec = ctx.config.text("parameters", key, fallback);
  const auto tokens = split(spec);
  try {
    if (tokens.size() == 2 && tokens[0] == "constant") {
      const double c = parse_numbers(tokens[1]).at(0);
      return [c](double) { return c; };
    }
    if (tokens.size() == 3 && tokens[0] == "linear") {
      const double c0 = parse_numbers(tokens[1]).at(0), c1 = parse_numbers(tokens[2]).at(0);
      return [c0, c1](double y) { return c0 + c1 * y; };
    }
  } catch (const ConfigurationError& e) {
    throw ConfigurationError("[parameters] " + key + ": " + e.what());
  }
  throw ConfigurationError("[parameters] " + key + ": unknown family '" + spec + "'");
}

BvpCoefficients bvp_from_config(const Context& ctx, Index interior_points) {
  return BvpCoefficients{bvp_function(ctx, "b2", "constant 1"), bvp_function(ctx, "b1", "constant 0"),
                         bvp_function(ctx, "b0", "constant 0"), interior_points};
}

double max_abs_difference(const GridFunction& a, const GridFunction& b) {
  return (a.values() - b.values()).cwiseAbs().maxCoeff();
}

void task_bvp(Context& ctx, const EllipticProblem& prob) {
  const BvpCoefficients coeffs = bvp_from_config(ctx, positive_count(ctx.config, "parameters", "interior_points", 64));
  const Sector phi0(ctx.config.number("parameters", "phi0", 0.5));
  const ConditionReport ellipticity = check_ellipticity(coeffs, phi0);
  ctx.results["ellipticity"] = condition_json(ellipticity);
  write_witness_csv(ctx, "witnesses.csv", {&ellipticity});
  if (!ellipticity.pass()) {
    ctx.failed = true;
    return;
  }
  const Complex lambda = ctx.config.complex("parameters", "lambda", Complex(10.0, 0.0));
  const ManufacturedCase mc = manufactured_case(coeffs, prob.order, prob.coefficient, prob.grid, lambda);
  const std::vector<double> s_set = s_set_from_config(ctx, prob.gamma());
  const double p = ctx.config.number("parameters", "p", 2.0);
  const AnisotropicReport r =
      solve_anisotropic(coeffs, prob.order, prob.coefficient, lambda, mc.forcing, prob.sector, s_set, p);
  ctx.results["solve"] = solve_json(r.solve);
  ctx.results["terms"] = terms_json(r.terms);
  ctx.results["ratio"] = r.ratio;
  ctx.results["max_error"] = max_abs_difference(r.solve.solution, mc.exact);
  ctx.results["min_eigenvalue"] = min_hermitian_eigenvalue(discretize_bvp(coeffs));
  if (ctx.csv) {
    CsvWriter csv(ctx.file("solution.csv"), "x,y,re_u,im_u");
    const GridFunction& u = r.solve.solution;
    for (Index j = 0; j < u.size(); ++j)
      for (Index i = 0; i < u.dim(); ++i)
        csv.row({u.grid().point(j), coeffs.node(i), u.values()(i, j).real(), u.values()(i, j).imag()});
  }
}

void task_system(Context& ctx, const EllipticProblem& prob) {
  const Eigen::MatrixXd entries = ctx.config.matrix("parameters", "matrix");
  const Complex lambda = ctx.config.complex("parameters", "lambda", Complex(1.0, 0.0));
  const std::string shift_name = ctx.config.text("parameters", "shift", "resolvent");
  if (shift_name != "resolvent" && shift_name != "literal")
    throw ConfigurationError("[parameters] shift: unknown shift '" + shift_name + "'");
  const SystemShift shift = shift_name == "resolvent" ? SystemShift::Resolvent : SystemShift::Literal;
  const std::string mode = ctx.config.text("parameters", "mode", "elliptic");
  if (mode != "elliptic" && mode != "parabolic")
    throw ConfigurationError("[parameters] mode: unknown mode '" + mode + "'");

  std::optional<SystemMatrix> mat;
  try {
    mat.emplace(entries);
  } catch (const DomainError& e) {
    // the SPD gate is a condition check, so it is reported rather than raised
    ctx.results = json{{"gate", {{"pass", false}, {"message", e.what()}}}};
    ctx.failed = true;
    return;
  }
  ctx.results["gate"] = json{{"pass", true}, {"coercivity", mat->coercivity()}};
  const GridFunction profile = forcing_from_config(ctx, prob.grid, mat->size());
  if (mode == "elliptic") {
    const SystemReport r = solve_system(*mat, prob.order, prob.coefficient, lambda, profile, prob.sector, shift);
    ctx.results["solve"] = solve_json(r.solve);
    ctx.results["weighted_norm"] = r.weighted_norm;
    write_grid_csv(ctx, "solution.csv", r.solve.solution);
  } else {
    const TimeGrid time = time_grid_from_config(ctx);
    const SpaceTimeFunction f = SpaceTimeFunction::separable(time, time_profile(ctx, time.horizon()), profile);
    const ParabolicSystemReport r =
        solve_system(*mat, prob.order, prob.coefficient, lambda, f, prob.sector, shift, ctx.threads);
    ctx.results["weighted_norm"] = r.weighted_norm;
    write_space_time_csv(ctx, "solution.csv", r.solution);
  }
}

double relative_l2(const GridFunction& u, const GridFunction& ref) {
  const double denom = lp_norm(ref, 2.0);
  const double diff = lp_norm(GridFunction(ref.grid(), u.values() - ref.values()), 2.0);
  return denom > 0.0 ? diff / denom : diff;
}

void task_convergence(Context& ctx, const EllipticProblem& prob) {
  const std::string study = ctx.config.required_text("parameters", "study");
  const std::vector<double> levels = ctx.config.numbers("parameters", "levels", {});
  if (levels.size() < 3) throw ConfigurationError("[parameters] levels: a convergence study needs at least 3 levels");
  for (const double l : levels)
    if (!(l >= 2.0 && l == std::floor(l)))
      throw ConfigurationError("[parameters] levels: levels must be integers >= 2");

  std::vector<double> errors, sizes;
  std::string column = "nt";
  if (study == "bvp") {
    column = "m";
    const Complex lambda = ctx.config.complex("parameters", "lambda", Complex(10.0, 0.0));
    for (const double level : levels) {
      const BvpCoefficients coeffs = bvp_from_config(ctx, static_cast<Index>(level));
      const ManufacturedCase mc = manufactured_case(coeffs, prob.order, prob.coefficient, prob.grid, lambda);
      const EllipticProblem aniso = anisotropic_problem(coeffs, prob.order, prob.coefficient, prob.grid, prob.sector);
      errors.push_back(max_abs_difference(solve_elliptic(aniso, mc.forcing, lambda).solution, mc.exact));
      sizes.push_back(coeffs.spacing());
    }
  } else if (study == "exact" || study == "implicit-euler" || study == "crank-nicolson") {
    const double horizon = ctx.config.number("parameters", "horizon", 1.0);
    const GridFunction profile = forcing_from_config(ctx, prob.grid, prob.dim());
    const GridFunction reference = constant_forcing_solution(prob, profile, horizon);
    for (const double level : levels) {
      const ParabolicProblem pp{prob, TimeGrid(horizon, static_cast<Index>(level))};
      const SpaceTimeFunction f =
          SpaceTimeFunction::separable(pp.time, [](double) { return Complex(1.0, 0.0); }, profile);
      const SpaceTimeFunction u = study == "exact"
                                      ? solve_parabolic(pp, f, ctx.threads)
                                      : solve_parabolic_stepped(pp, f, scheme_from_name("study", study), ctx.threads);
      errors.push_back(relative_l2(u.slice(pp.time.steps()), reference));
      sizes.push_back(pp.time.step());
    }
  } else {
    throw ConfigurationError("[parameters] study: unknown study '" + study + "'");
  }

  json rows = json::array();
  std::unique_ptr<CsvWriter> csv;
  if (ctx.csv) csv = std::make_unique<CsvWriter>(ctx.file("convergence.csv"), "level," + column + ",error,order");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    std::string order;
    json order_value = nullptr;
    if (i > 0) {
      if (errors[i] < kErrorFloor || errors[i - 1] < kErrorFloor) {
        order = "floor";
        order_value = "floor";
      } else {
        const double measured = std::log(errors[i - 1] / errors[i]) / std::log(sizes[i - 1] / sizes[i]);
        order = format_number(measured);
        order_value = measured;
      }
    }
    rows.push_back(json{{"level", i}, {column, levels[i]}, {"error", errors[i]}, {"order", order_value}});
    if (csv) {
      char level[32];
      std::snprintf(level, sizeof level, "%zu,%lld", i, static_cast<long long>(levels[i]));
      csv->raw(std::string(level) + "," + format_number(errors[i]) + "," + order);
    }
  }
  ctx.results = json{{"study", study}, {"rows", rows}};
}

const std::map<std::string, void (*)(Context&, const EllipticProblem&)>& tasks() {
  static const std::map<std::string, void (*)(Context&, const EllipticProblem&)> table{
      {"solve-elliptic", task_solve_elliptic}, {"solve-parabolic", task_solve_parabolic},
      {"resolvent-sweep", task_resolvent_sweep}, {"verify-conditions", task_verify_conditions},
      {"separability", task_separability},     {"embedding-probe", task_embedding_probe},
      {"bvp", task_bvp},                       {"system", task_system},
      {"convergence", task_convergence}};
  return table;
}

json sections_json(const RunConfig::Sections& sections) {
  json out = json::object();
  for (const auto& [section, entries] : sections)
    for (const auto& [key, value] : entries) out[section][key] = value;
  return out;
}

Eigen::MatrixXcd complex_matrix(const Eigen::MatrixXd& m) { return m.cast<Complex>(); }

}  // namespace

std::string format_number(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.16e", v);
  return buffer;
}

CoefficientSymbol coefficient_from_spec(const std::string& spec, double gamma) {
  const auto tokens = split(spec);
  if (tokens.size() == 2 && tokens[0] == "constant") return CoefficientSymbol::constant(parse_complex(tokens[1]));
  if (tokens.size() == 2 && tokens[0] == "scaled-decay")
    return CoefficientSymbol::scaled_decay(parse_complex(tokens[1]), gamma);
  if (tokens.size() == 3 && tokens[0] == "bracket")
    return CoefficientSymbol::bracket(parse_complex(tokens[1]), parse_numbers(tokens[2]).at(0));
  throw ConfigurationError("unknown coefficient family '" + spec + "'");
}

EllipticProblem problem_from_config(const RunConfig& c, const fs::path& base) {
  const double gamma_value = c.number("problem", "gamma", 1.5);
  FractionalOrder order = [&] {
    try {
      return FractionalOrder::problem(gamma_value);
    } catch (const DomainError& e) {
      throw DomainError(std::string("[problem] gamma: ") + e.what());
    }
  }();

  const std::string coefficient_spec = c.text("problem", "coefficient", "constant -1");
  CoefficientSymbol coefficient = [&] {
    try {
      return coefficient_from_spec(coefficient_spec, gamma_value);
    } catch (const ConfigurationError& e) {
      throw ConfigurationError(std::string("[problem] coefficient: ") + e.what());
    }
  }();

  const double reference = c.number("problem", "reference_frequency", 1.0);
  const std::string op_spec = c.text("problem", "operator", "scalar 1");
  const auto tokens = split(op_spec);
  std::optional<OperatorSymbol> op;
  try {
    if (tokens.size() == 2 && tokens[0] == "scalar") {
      op = OperatorSymbol::scalar(parse_complex(tokens[1]), reference);
    } else if (tokens.size() == 1 && tokens[0] == "matrix") {
      op = OperatorSymbol::constant(complex_matrix(c.matrix("problem", "operator_matrix")), reference);
    } else if (tokens.size() == 1 && tokens[0] == "perturbed") {
      op = OperatorSymbol::perturbed(complex_matrix(c.matrix("problem", "operator_matrix")),
                                     complex_matrix(c.matrix("problem", "operator_perturbation")), reference);
    } else if (tokens.size() == 2 && tokens[0] == "file") {
      fs::path path = tokens[1];
      if (path.is_relative()) path = base / path;
      op = OperatorSymbol::constant(complex_matrix(read_matrix_file(path)), reference);
    } else {
      throw ConfigurationError("unknown operator family '" + op_spec + "'");
    }
  } catch (const ConfigurationError& e) {
    throw ConfigurationError(std::string("[problem] operator: ") + e.what());
  } catch (const DomainError& e) {
    throw DomainError(std::string("[problem] operator: ") + e.what());
  }

  const double half_width = c.number("problem", "half_width", 16.0);
  const long long size = c.integer("problem", "size", 256);
  std::optional<SpatialGrid> grid;
  try {
    grid.emplace(half_width, static_cast<Index>(size));
  } catch (const ConfigurationError& e) {
    throw ConfigurationError(std::string("[problem] size/half_width: ") + e.what());
  }
  const std::string form = c.text("problem", "symbol_form", "unfactored");
  if (form != "unfactored" && form != "factored")
    throw ConfigurationError("[problem] symbol_form: unknown form '" + form + "'");
  std::optional<Sector> sector;
  try {
    sector.emplace(c.number("problem", "sector", kQuarterPi));
  } catch (const std::invalid_argument& e) {
    throw ConfigurationError(std::string("[problem] sector: ") + e.what());
  }

  return EllipticProblem{.order = order,
                         .coefficient = std::move(coefficient),
                         .op = std::move(*op),
                         .sector = *sector,
                         .grid = *grid,
                         .form = form == "factored" ? SymbolForm::Factored : SymbolForm::Unfactored};
}

int run(RunConfig config, const RunOptions& options, const fs::path& base, std::ostream& diagnostics) {
  try {
    if (options.seed) config.set("parameters", "seed", std::to_string(*options.seed));
    if (options.out) config.set("output", "directory", options.out->string());

    const std::string task = config.required_text("task", "name");
    const auto entry = tasks().find(task);
    if (entry == tasks().end()) throw ConfigurationError("[task] name: unknown task '" + task + "'");

    Context ctx(config);
    ctx.base = base;
    ctx.threads = options.threads;
    ctx.out = config.text("output", "directory", "out");
    const auto formats = split(config.text("output", "formats", "csv json"));
    ctx.csv = std::find(formats.begin(), formats.end(), "csv") != formats.end();
    ctx.json_report = std::find(formats.begin(), formats.end(), "json") != formats.end();
    fs::create_directories(ctx.out);

    const EllipticProblem prob = problem_from_config(config, base);
    entry->second(ctx, prob);

    if (ctx.json_report) {
      const json report{{"task", task},
                        {"status", ctx.failed ? "fail" : "pass"},
                        {"config", sections_json(config.resolved())},
                        {"results", ctx.results},
                        {"files", ctx.files}};
      std::ofstream file(ctx.out / "report.json", std::ios::binary);
      if (!file) throw ConfigurationError("[output] directory: cannot write report.json");
      file << report.dump(2) << '\n';
    }
    if (ctx.failed) {
      diagnostics << "condition check failed: see " << (ctx.out / "report.json").string() << '\n';
      return kExitCheckFailed;
    }
    return kExitSuccess;
  } catch (const std::exception& e) {
    diagnostics << "error: " << e.what() << '\n';
    return kExitError;
  }
}

int run(const RunOptions& options, std::ostream& diagnostics) {
  try {
    RunConfig config = RunConfig::load(options.config);
    return run(std::move(config), options, options.config.parent_path(), diagnostics);
  } catch (const std::exception& e) {
    diagnostics << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace fracspec
