#include "fracspec/core.hpp"

#include <algorithm>
#include <string>
#include <exception>
#include <thread>

#include <unsupported/Eigen/FFT>

namespace fracspec {

namespace {

// e^{iξ_k L} = (-1)^{m_k}: the phase between the j-origin FFT and x_0 = -L.
double origin_phase(const SpectralGrid& spectral, Index k) {
  return (spectral.signed_index(k) % 2 == 0) ? 1.0 : -1.0;
}

Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> engine;
  return engine;
}

bool all_finite(const Eigen::MatrixXcd& m) {
  return m.real().allFinite() && m.imag().allFinite();
}

}  // namespace

SpatialGrid::SpatialGrid(double half_width, Index size)
    : half_width_(half_width), size_(size), spacing_(2.0 * half_width / static_cast<double>(size)) {
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw ConfigurationError("grid half width must be positive and finite, got " +
                             std::to_string(half_width));
  if (size < 4 || size % 2 != 0)
    throw ConfigurationError("grid size must be even and at least 4, got " + std::to_string(size));
}

Eigen::ArrayXd SpatialGrid::points() const {
  Eigen::ArrayXd x(size_);
  for (Index j = 0; j < size_; ++j) x(j) = point(j);
  return x;
}

Eigen::ArrayXd SpectralGrid::frequencies() const {
  Eigen::ArrayXd xi(size_);
  for (Index k = 0; k < size_; ++k) xi(k) = frequency(k);
  return xi;
}

GridFunction::GridFunction(SpatialGrid grid, Eigen::MatrixXcd values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.cols() != grid_.size())
    throw ConfigurationError("grid function has " + std::to_string(values_.cols()) +
                             " samples but the grid has " + std::to_string(grid_.size()));
  if (values_.rows() < 1) throw ConfigurationError("grid function dimension must be at least 1");
  if (!all_finite(values_)) throw ConfigurationError("grid function has non-finite entries");
}

GridFunction GridFunction::zero(const SpatialGrid& grid, Index dim) {
  return GridFunction(grid, Eigen::MatrixXcd::Zero(dim, grid.size()));
}

GridFunction GridFunction::sample(const SpatialGrid& grid, const std::function<Complex(double)>& f,
                                  Index dim) {
  Eigen::MatrixXcd values(dim, grid.size());
  for (Index j = 0; j < grid.size(); ++j) values.col(j).setConstant(f(grid.point(j)));
  return GridFunction(grid, std::move(values));
}

GridFunction GridFunction::sample_vector(const SpatialGrid& grid, Index dim,
                                         const std::function<Eigen::VectorXcd(double)>& f) {
  Eigen::MatrixXcd values(dim, grid.size());
  for (Index j = 0; j < grid.size(); ++j) {
    Eigen::VectorXcd v = f(grid.point(j));
    if (v.size() != dim) throw ConfigurationError("sampled vector has the wrong dimension");
    values.col(j) = v;
  }
  return GridFunction(grid, std::move(values));
}

SpectralFunction::SpectralFunction(SpatialGrid grid, Eigen::MatrixXcd coefficients)
    : grid_(grid), coefficients_(std::move(coefficients)) {
  if (coefficients_.cols() != grid_.size())
    throw ConfigurationError("spectral function has " + std::to_string(coefficients_.cols()) +
                             " coefficients but the grid has " + std::to_string(grid_.size()));
}

SpectralFunction forward_transform(const GridFunction& f) {
  const SpatialGrid& grid = f.grid();
  const SpectralGrid spectral(grid);
  const Index n = grid.size();
  Eigen::MatrixXcd out(f.dim(), n);
  Eigen::VectorXcd row(n), transformed(n);
  for (Index r = 0; r < f.dim(); ++r) {
    row = f.values().row(r).transpose();
    fft_engine().fwd(transformed, row);
    for (Index k = 0; k < n; ++k)
      out(r, k) = grid.spacing() * origin_phase(spectral, k) * transformed(k);
  }
  return SpectralFunction(grid, std::move(out));
}

GridFunction inverse_transform(const SpectralFunction& F) {
  const SpatialGrid& grid = F.grid();
  const SpectralGrid spectral(grid);
  const Index n = grid.size();
  Eigen::MatrixXcd out(F.dim(), n);
  Eigen::VectorXcd row(n), transformed(n);
  for (Index r = 0; r < F.dim(); ++r) {
    for (Index k = 0; k < n; ++k) row(k) = origin_phase(spectral, k) * F.coefficients()(r, k);
    // Eigen's inverse carries 1/N; 1/(2L) = (1/N)(1/h)
    fft_engine().inv(transformed, row);
    out.row(r) = transformed.transpose() / grid.spacing();
  }
  return GridFunction(grid, std::move(out));
}

GridFunction apply_matrix_multiplier(const GridFunction& f,
                                     const std::function<Eigen::MatrixXcd(double)>& symbol) {
  SpectralFunction F = forward_transform(f);
  const SpectralGrid spectral = F.spectral_grid();
  for (Index k = 0; k < F.size(); ++k) {
    const Eigen::VectorXcd column = F.coefficients().col(k);
    F.coefficients().col(k) = symbol(spectral.frequency(k)) * column;
  }
  return inverse_transform(F);
}

GridFunction apply_scalar_multiplier(const GridFunction& f,
                                     const std::function<Complex(double)>& symbol) {
  SpectralFunction F = forward_transform(f);
  const SpectralGrid spectral = F.spectral_grid();
  for (Index k = 0; k < F.size(); ++k) F.coefficients().col(k) *= symbol(spectral.frequency(k));
  return inverse_transform(F);
}

void require_exponent(double p, const char* name) {
  if (!(p > 1.0) || !std::isfinite(p))
    throw PreconditionError(std::string("Lebesgue exponent ") + name + " must lie in (1, inf), got " +
                            std::to_string(p));
}

LebesgueExponents::LebesgueExponents(double p_, double p1_) : p(p_), p1(p1_) {
  require_exponent(p, "p");
  require_exponent(p1, "p1");
}

double lp_norm(const GridFunction& f, double p) {
  return lp_norm(f.values(), f.grid().spacing(), p);
}

TimeGrid::TimeGrid(double horizon, Index steps) : horizon_(horizon), steps_(steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw ConfigurationError("time horizon must be positive, got " + std::to_string(horizon));
  if (steps < 2) throw ConfigurationError("time steps must be at least 2, got " + std::to_string(steps));
}

double time_lp_norm(const Eigen::ArrayXd& magnitudes, const TimeGrid& time, double p) {
  require_exponent(p, "p1");
  if (magnitudes.size() != time.samples())
    throw ConfigurationError("time samples do not match the time grid");
  const double peak = magnitudes.maxCoeff();
  if (peak == 0.0) return 0.0;
  const Eigen::ArrayXd powered = (magnitudes / peak).pow(p);
  const Index last = powered.size() - 1;
  const double sum = powered.sum() - 0.5 * (powered(0) + powered(last));
  return peak * std::pow(time.step() * sum, 1.0 / p);
}

SpaceTimeFunction::SpaceTimeFunction(SpatialGrid grid, TimeGrid time, std::vector<Eigen::MatrixXcd> slices)
    : grid_(grid), time_(time), slices_(std::move(slices)) {
  if (static_cast<Index>(slices_.size()) != time_.samples())
    throw ConfigurationError("space-time function has " + std::to_string(slices_.size()) +
                             " slices but the time grid has " + std::to_string(time_.samples()));
  for (const auto& s : slices_) {
    if (s.cols() != grid_.size() || s.rows() != slices_.front().rows() || s.rows() < 1)
      throw ConfigurationError("space-time slice shape mismatch");
    if (!all_finite(s)) throw ConfigurationError("space-time function has non-finite entries");
  }
}

SpaceTimeFunction SpaceTimeFunction::zero(const SpatialGrid& grid, const TimeGrid& time, Index dim) {
  return SpaceTimeFunction(
      grid, time,
      std::vector<Eigen::MatrixXcd>(static_cast<std::size_t>(time.samples()),
                                    Eigen::MatrixXcd::Zero(dim, grid.size())));
}

SpaceTimeFunction SpaceTimeFunction::sample(const SpatialGrid& grid, const TimeGrid& time, Index dim,
                                            const std::function<Complex(double, double)>& f) {
  std::vector<Eigen::MatrixXcd> slices;
  slices.reserve(static_cast<std::size_t>(time.samples()));
  for (Index m = 0; m < time.samples(); ++m) {
    Eigen::MatrixXcd s(dim, grid.size());
    for (Index j = 0; j < grid.size(); ++j) s.col(j).setConstant(f(time.time(m), grid.point(j)));
    slices.push_back(std::move(s));
  }
  return SpaceTimeFunction(grid, time, std::move(slices));
}

SpaceTimeFunction SpaceTimeFunction::separable(const TimeGrid& time,
                                               const std::function<Complex(double)>& g,
                                               const GridFunction& h) {
  std::vector<Eigen::MatrixXcd> slices;
  slices.reserve(static_cast<std::size_t>(time.samples()));
  for (Index m = 0; m < time.samples(); ++m) slices.push_back(g(time.time(m)) * h.values());
  return SpaceTimeFunction(h.grid(), time, std::move(slices));
}

double mixed_norm(const SpaceTimeFunction& f, double p, double p1, MixedNormOrder order) {
  require_exponent(p, "p");
  require_exponent(p1, "p1");
  const TimeGrid& time = f.time();
  const double h = f.grid().spacing();
  if (order == MixedNormOrder::SpaceInner) {
    Eigen::ArrayXd inner(time.samples());
    for (Index m = 0; m < time.samples(); ++m)
      inner(m) = lp_norm(f.slices()[static_cast<std::size_t>(m)], h, p);
    return time_lp_norm(inner, time, p1);
  }
  const Index n = f.grid().size();
  Eigen::ArrayXd inner(n);
  Eigen::ArrayXd series(time.samples());
  for (Index j = 0; j < n; ++j) {
    for (Index m = 0; m < time.samples(); ++m)
      series(m) = f.slices()[static_cast<std::size_t>(m)].col(j).norm();
    inner(j) = time_lp_norm(series, time, p1);
  }
  return lp_norm(inner.matrix().transpose(), h, p);
}

Sector::Sector(double angle) : angle_(angle) {
  if (!(angle >= 0.0) || !(angle < std::numbers::pi))
    throw ConfigurationError("sector angle must lie in [0, pi), got " + std::to_string(angle));
}

bool Sector::contains(Complex z, double slack) const {
  if (z == Complex(0.0, 0.0)) return true;
  return std::abs(std::arg(z)) <= angle_ + slack;
}

GridFunction random_band_limited(const SpatialGrid& grid, Index dim, std::mt19937_64& rng) {
  const SpectralGrid spectral(grid);
  const Index n = grid.size();
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXcd coefficients = Eigen::MatrixXcd::Zero(dim, n);
  for (Index k = 0; k < n; ++k) {
    const Index m = spectral.signed_index(k);
    if (4 * std::abs(m) >= n) continue;
    for (Index r = 0; r < dim; ++r) {
      const double re = normal(rng);
      const double im = normal(rng);
      coefficients(r, k) = Complex(re, im);
    }
  }
  GridFunction u = inverse_transform(SpectralFunction(grid, std::move(coefficients)));
  const double norm = lp_norm(u, 2.0);
  return GridFunction(grid, u.values() / norm);
}

std::vector<double> log_space(double lo, double hi, Index count) {
  if (count == 1) return {lo};
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  const double a = std::log(lo), b = std::log(hi);
  for (Index i = 0; i < count; ++i)
    out.push_back(std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1)));
  return out;
}

std::vector<double> lin_space(double lo, double hi, Index count) {
  if (count == 1) return {0.5 * (lo + hi)};
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i)
    out.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
  return out;
}

void parallel_for(Index count, unsigned threads, const std::function<void(Index)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  const Index workers = std::min<Index>(static_cast<Index>(threads), count);
  if (workers <= 1) {
    for (Index i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(workers));
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (Index w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (Index i = w; i < count; i += workers) fn(i);
        } catch (...) {
          failures[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
  }
  for (const auto& failure : failures)
    if (failure) std::rethrow_exception(failure);
}

}  // namespace fracspec
