#pragma once

// Shared substrate: the truncated real line [-L, L) and its DFT dual,
// sampled functions (vector valued, one column per sample), the
// transform pair, Lebesgue and mixed norms, and sector geometry.

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fracspec/errors.hpp"

namespace fracspec {

using Index = Eigen::Index;
using Complex = std::complex<double>;

/// Uniform periodic sampling of [-L, L) with N points, N even and N >= 4.
class SpatialGrid {
 public:
  SpatialGrid(double half_width, Index size);

  double half_width() const { return half_width_; }
  Index size() const { return size_; }
  double spacing() const { return spacing_; }
  double length() const { return 2.0 * half_width_; }

  double point(Index j) const { return -half_width_ + static_cast<double>(j) * spacing_; }
  Eigen::ArrayXd points() const;

  /// Same interval, twice the samples.
  SpatialGrid refined() const { return SpatialGrid(half_width_, 2 * size_); }

  friend bool operator==(const SpatialGrid&, const SpatialGrid&) = default;

 private:
  double half_width_;
  Index size_;
  double spacing_;
};

/// Discrete frequencies dual to a SpatialGrid, stored in natural FFT order:
/// index k carries the signed DFT index m_k in [-N/2, N/2) and ξ_k = π m_k / L.
class SpectralGrid {
 public:
  explicit SpectralGrid(const SpatialGrid& grid)
      : half_width_(grid.half_width()), size_(grid.size()) {}

  Index size() const { return size_; }
  Index signed_index(Index k) const { return k < size_ / 2 ? k : k - size_; }
  double frequency(Index k) const {
    return std::numbers::pi * static_cast<double>(signed_index(k)) / half_width_;
  }
  Eigen::ArrayXd frequencies() const;
  /// Storage index of a signed DFT index m (the inverse of signed_index).
  Index index_of(Index m) const { return m >= 0 ? m : m + size_; }
  /// Largest |ξ| represented on the grid.
  double max_frequency() const { return std::numbers::pi * static_cast<double>(size_ / 2) / half_width_; }

 private:
  double half_width_;
  Index size_;
};

/// Samples of a ℂ^d-valued function: column j holds the value at x_j.
class GridFunction {
 public:
  GridFunction(SpatialGrid grid, Eigen::MatrixXcd values);

  static GridFunction zero(const SpatialGrid& grid, Index dim);
  /// Samples a scalar function into every one of `dim` components.
  static GridFunction sample(const SpatialGrid& grid, const std::function<Complex(double)>& f,
                             Index dim = 1);
  static GridFunction sample_vector(const SpatialGrid& grid, Index dim,
                                    const std::function<Eigen::VectorXcd(double)>& f);

  const SpatialGrid& grid() const { return grid_; }
  Index dim() const { return values_.rows(); }
  Index size() const { return values_.cols(); }
  const Eigen::MatrixXcd& values() const { return values_; }

 private:
  SpatialGrid grid_;
  Eigen::MatrixXcd values_;
};

/// DFT coefficients: column k holds the ℂ^d coefficient at ξ_k.
class SpectralFunction {
 public:
  SpectralFunction(SpatialGrid grid, Eigen::MatrixXcd coefficients);

  const SpatialGrid& grid() const { return grid_; }
  SpectralGrid spectral_grid() const { return SpectralGrid(grid_); }
  Index dim() const { return coefficients_.rows(); }
  Index size() const { return coefficients_.cols(); }
  const Eigen::MatrixXcd& coefficients() const { return coefficients_; }
  Eigen::MatrixXcd& coefficients() { return coefficients_; }

 private:
  SpatialGrid grid_;
  Eigen::MatrixXcd coefficients_;
};

/// F_k = h Σ_j f_j e^{-iξ_k x_j}. A constant c maps to 2L·c at ξ = 0.
SpectralFunction forward_transform(const GridFunction& f);
/// f_j = (1/2L) Σ_k F_k e^{iξ_k x_j}; exact inverse of forward_transform.
GridFunction inverse_transform(const SpectralFunction& F);

/// Applies a per-frequency d×d multiplier: u = F⁻¹[M(ξ_k) F f].
GridFunction apply_matrix_multiplier(const GridFunction& f,
                                     const std::function<Eigen::MatrixXcd(double)>& symbol);
/// Applies a per-frequency scalar multiplier to every component.
GridFunction apply_scalar_multiplier(const GridFunction& f,
                                     const std::function<Complex(double)>& symbol);

/// Lebesgue exponent pair; p1 is only used by mixed norms.
struct LebesgueExponents {
  double p = 2.0;
  double p1 = 2.0;

  LebesgueExponents() = default;
  LebesgueExponents(double p_, double p1_ = 2.0);
};

/// Throws PreconditionError unless 1 < p < ∞.
void require_exponent(double p, const char* name = "p");

/// Rectangle-rule L_p norm of per-sample Euclidean norms: (h Σ_j |f_j|^p)^{1/p}.
template <typename Derived>
double lp_norm(const Eigen::MatrixBase<Derived>& samples, double spacing, double p) {
  require_exponent(p);
  if (samples.cols() == 0) return 0.0;
  const Eigen::ArrayXd magnitudes = samples.colwise().norm().transpose().array();
  const double peak = magnitudes.maxCoeff();
  if (peak == 0.0) return 0.0;
  // scale by the peak so large p does not overflow
  return peak * std::pow(spacing * (magnitudes / peak).pow(p).sum(), 1.0 / p);
}

double lp_norm(const GridFunction& f, double p);

/// Uniform time samples t_m = m T / Nt, m = 0..Nt.
class TimeGrid {
 public:
  TimeGrid(double horizon, Index steps);

  double horizon() const { return horizon_; }
  Index steps() const { return steps_; }
  Index samples() const { return steps_ + 1; }
  double step() const { return horizon_ / static_cast<double>(steps_); }
  double time(Index m) const { return horizon_ * static_cast<double>(m) / static_cast<double>(steps_); }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double horizon_;
  Index steps_;
};

/// Trapezoid-rule L_p norm of nonnegative time samples on a TimeGrid.
double time_lp_norm(const Eigen::ArrayXd& magnitudes, const TimeGrid& time, double p);

/// u(t_m, x_j): one d×N slice per time sample.
class SpaceTimeFunction {
 public:
  SpaceTimeFunction(SpatialGrid grid, TimeGrid time, std::vector<Eigen::MatrixXcd> slices);

  static SpaceTimeFunction zero(const SpatialGrid& grid, const TimeGrid& time, Index dim);
  static SpaceTimeFunction sample(const SpatialGrid& grid, const TimeGrid& time, Index dim,
                                  const std::function<Complex(double t, double x)>& f);
  /// f(t, x) = g(t) · h(x).
  static SpaceTimeFunction separable(const TimeGrid& time, const std::function<Complex(double)>& g,
                                     const GridFunction& h);

  const SpatialGrid& grid() const { return grid_; }
  const TimeGrid& time() const { return time_; }
  Index dim() const { return slices_.front().rows(); }
  const std::vector<Eigen::MatrixXcd>& slices() const { return slices_; }
  GridFunction slice(Index m) const { return GridFunction(grid_, slices_.at(static_cast<std::size_t>(m))); }

 private:
  SpatialGrid grid_;
  TimeGrid time_;
  std::vector<Eigen::MatrixXcd> slices_;
};

enum class MixedNormOrder {
  SpaceInner,  ///< inner x with p, outer t with p1 (the parabolic setting)
  TimeInner,   ///< inner t with p1, outer x with p
};

double mixed_norm(const SpaceTimeFunction& f, double p, double p1,
                  MixedNormOrder order = MixedNormOrder::SpaceInner);

/// S_φ = {z : |arg z| ≤ φ} ∪ {0}, 0 ≤ φ < π.
class Sector {
 public:
  explicit Sector(double angle);

  double angle() const { return angle_; }
  /// `slack` widens the angular test; the exact set is slack = 0.
  bool contains(Complex z, double slack = 0.0) const;

 private:
  double angle_;
};

template <typename Real>
bool sector_contains(const Sector& sector, std::complex<Real> z) {
  return sector.contains(Complex(static_cast<double>(z.real()), static_cast<double>(z.imag())));
}

/// Random test function whose DFT is supported on |m| < N/4, unit L₂ norm.
GridFunction random_band_limited(const SpatialGrid& grid, Index dim, std::mt19937_64& rng);

/// `count` points log-spaced on [lo, hi].
std::vector<double> log_space(double lo, double hi, Index count);
/// `count` points evenly spaced on [lo, hi] (both endpoints included).
std::vector<double> lin_space(double lo, double hi, Index count);

/// Runs fn(i) for i in [0, count) on up to `threads` workers (0 = hardware).
void parallel_for(Index count, unsigned threads, const std::function<void(Index)>& fn);

}  // namespace fracspec
