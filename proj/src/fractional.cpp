#include "fracspec/fractional.hpp"

#include <string>

namespace fracspec {

namespace {

std::string format_order(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

}  // namespace

FractionalOrder FractionalOrder::problem(double gamma) {
  if (!(gamma > 1.0 && gamma <= 2.0))
    throw DomainError("order out of (1,2]: " + format_order(gamma));
  return FractionalOrder(gamma);
}

FractionalOrder FractionalOrder::probe(double s) {
  if (!(s >= 0.0 && s <= 2.0)) throw DomainError("probe order out of [0,2]: " + format_order(s));
  return FractionalOrder(s);
}

GridFunction liouville_derivative(const GridFunction& f, double s) {
  if (!(s >= 0.0) || !std::isfinite(s))
    throw PreconditionError("derivative order must be nonnegative, got " + format_order(s));
  if (s == 0.0) return f;
  return apply_scalar_multiplier(f, [s](double xi) { return frac_power_i_xi(xi, s); });
}

Eigen::ArrayXd grunwald_letnikov_weights(double gamma, Index count) {
  Eigen::ArrayXd w(count);
  if (count == 0) return w;
  w(0) = 1.0;
  for (Index k = 1; k < count; ++k)
    w(k) = w(k - 1) * (static_cast<double>(k) - 1.0 - gamma) / static_cast<double>(k);
  return w;
}

namespace {

void require_oracle_order(double gamma) {
  if (!(gamma > 1.0 && gamma < 2.0))
    throw DomainError("Grunwald-Letnikov oracle needs an order in (1,2), got " + format_order(gamma));
}

}  // namespace

Eigen::ArrayXd rl_derivative_oracle(const Eigen::ArrayXd& samples, double spacing, double gamma) {
  require_oracle_order(gamma);
  const Index n = samples.size();
  const Eigen::ArrayXd w = grunwald_letnikov_weights(gamma, n);
  const double scale = std::pow(spacing, -gamma);
  Eigen::ArrayXd out(n);
  for (Index j = 0; j < n; ++j) {
    // Σ_{k=0..j} w_k f_{j-k}
    out(j) = scale * (w.head(j + 1) * samples.head(j + 1).reverse()).sum();
  }
  return out;
}

double rl_derivative_oracle_at(const Eigen::ArrayXd& samples, double spacing, double gamma, Index j) {
  require_oracle_order(gamma);
  if (j < 0 || j >= samples.size()) throw ConfigurationError("oracle sample index out of range");
  const Eigen::ArrayXd w = grunwald_letnikov_weights(gamma, j + 1);
  return std::pow(spacing, -gamma) * (w * samples.head(j + 1).reverse()).sum();
}

}  // namespace fracspec
