#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "specgeo/error.hpp"
#include "specgeo/kernel.hpp"
#include "specgeo/mixture.hpp"
#include "specgeo/numerics/quadrature.hpp"

namespace specgeo {

enum class DensityMethod { automatic, closed, quadrature };
enum class DensityForm { closed, quadrature };

struct QuadratureOptions {
  double step_fraction = 0.25;  // panel width relative to the finest length scale
  std::size_t order = 8;
  double tolerance = 1e-6;      // self-consistency bound for the quadrature form
  bool self_check = true;
};

inline double standard_normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

/// Whether the base-kernel smoothing of `c` has a closed form here.
inline bool has_closed_form(const Kernel& k, const Component& c) {
  if (!k.is_translation_invariant()) return false;
  switch (c.family) {
    case ComponentFamily::gaussian:
      return k.family == KernelFamily::gaussian || k.family == KernelFamily::uniform_box;
    case ComponentFamily::triangular:
    case ComponentFamily::uniform:
      return k.family == KernelFamily::uniform_box ||
             (k.family == KernelFamily::gaussian && c.family == ComponentFamily::uniform);
    case ComponentFamily::composite:
      return std::all_of(c.parts.begin(), c.parts.end(), [&](const Component& p) { return has_closed_form(k, p); });
  }
  return false;
}

/// Closed-form value of the base kernel smoothed against `c` at x (offset
/// excluded).
inline double smoothed_base_closed(const Kernel& k, const Component& c, double x) {
  if (c.family == ComponentFamily::composite) {
    double s = 0.0;
    for (std::size_t i = 0; i < c.parts.size(); ++i) s += c.part_weights[i] * smoothed_base_closed(k, c.parts[i], x);
    return s;
  }
  if (k.family == KernelFamily::uniform_box) return c.mass(x - k.nu, x + k.nu) / (2.0 * k.nu);
  if (k.family == KernelFamily::gaussian) {
    if (c.family == ComponentFamily::gaussian) {
      const double v = c.sigma * c.sigma + k.nu * k.nu;
      const double r = x - c.mu;
      return std::exp(-r * r / (2.0 * v)) / std::sqrt(2.0 * std::numbers::pi * v);
    }
    if (c.family == ComponentFamily::uniform) {
      const double lo = (c.a - x) / k.nu;
      const double hi = (c.b - x) / k.nu;
      // Mass of N(0,1) on [lo, hi], taken from the thinner tail.
      const double m = lo >= 0.0 ? standard_normal_sf(lo) - standard_normal_sf(hi)
                                 : standard_normal_sf(-hi) - standard_normal_sf(-lo);
      return std::max(0.0, m) / (c.b - c.a);
    }
  }
  fail(ErrorKind::BadParameter, "no closed form for " + k.name() + " against " + c.describe());
}

/// Piecewise form of the box-kernel smoothing of the unit triangle centred
/// at mu, valid for nu in (0, 1).
inline double triangular_box_q2(double x, double mu, double nu) {
  const double t = x - mu;
  if (t > -1.0 - nu && t < -1.0 + nu) return (1.0 + nu + t) * (1.0 + nu + t) / (4.0 * nu);
  if (t > -nu && t < nu) return 1.0 - nu / 2.0 - t * t / (2.0 * nu);
  if (t > 1.0 - nu && t < 1.0 + nu) return (1.0 + nu - t) * (1.0 + nu - t) / (4.0 * nu);
  const double r = std::abs(t);
  return r < 1.0 ? 1.0 - r : 0.0;
}

/// The same piecewise form with the two edge branches as printed, where the
/// left window carries (1 + nu - t)^2 and the right one (1 + nu + t)^2.
inline double triangular_box_q2_published(double x, double mu, double nu) {
  const double t = x - mu;
  if (t > -1.0 - nu && t < -1.0 + nu) return (1.0 + nu - t) * (1.0 + nu - t) / (4.0 * nu);
  if (t > -nu && t < nu) return 1.0 - nu / 2.0 - t * t / (2.0 * nu);
  if (t > 1.0 - nu && t < 1.0 + nu) return (1.0 + nu + t) * (1.0 + nu + t) / (4.0 * nu);
  const double r = std::abs(t);
  return r < 1.0 ? 1.0 - r : 0.0;
}

/// Panel width used when integrating against `c` under `k`.
inline double integration_step(const Kernel& k, const Component& c, const QuadratureOptions& opt) {
  return opt.step_fraction * std::min(c.smooth_scale(), k.resolution());
}

/// Quadrature value of the base kernel smoothed against `c` at x.
inline double smoothed_base_quadrature(const Kernel& k, const Component& c, double x, double step,
                                       std::size_t order) {
  std::vector<double> bps = c.breakpoints();
  const std::vector<double> kb = k.breakpoints(x);
  bps.insert(bps.end(), kb.begin(), kb.end());
  const double reach = k.reach();
  double total = 0.0;
  for (const Interval& piece : c.support_pieces()) {
    const Interval range{std::max(piece.lo, x - reach), std::min(piece.hi, x + reach)};
    total += integrate([&](double y) { return k.base(x, y) * c.pdf(y); }, range, bps, step, order);
  }
  return total;
}

/// Square-root kernelized density q of a mixture (or of a single component,
/// as a one-component mixture): q(x)^2 = integral of k(x, y) dP(y).
class KernelizedDensity {
 public:
  static KernelizedDensity make(const Kernel& k, const Mixture& dist, DensityMethod method = DensityMethod::automatic,
                                QuadratureOptions opt = {}) {
    require_population_kernel(k);
    KernelizedDensity q;
    q.kernel_ = k;
    q.dist_ = dist;
    q.opt_ = opt;
    const bool closed_ok = std::all_of(dist.components.begin(), dist.components.end(),
                                       [&](const Component& c) { return has_closed_form(k, c); });
    if (method == DensityMethod::closed && !closed_ok)
      fail(ErrorKind::BadParameter, "closed form requested but unavailable for " + k.name());
    q.form_ = (method == DensityMethod::quadrature || !closed_ok) ? DensityForm::quadrature : DensityForm::closed;
    if (q.form_ == DensityForm::quadrature && opt.self_check) q.check_resolution();
    return q;
  }

  static KernelizedDensity make(const Kernel& k, const Component& c, DensityMethod method = DensityMethod::automatic,
                                QuadratureOptions opt = {}) {
    return make(k, Mixture::make({c}, {1.0}), method, opt);
  }

  /// q(x)^2.
  double squared(double x) const {
    double s = 0.0;
    for (std::size_t m = 0; m < dist_.size(); ++m) s += dist_.weights[m] * base_term(m, x, 1.0);
    return s + kernel_.offset;
  }

  double operator()(double x) const { return std::sqrt(std::max(0.0, squared(x))); }

  std::vector<double> tabulate(std::span<const double> xs) const {
    std::vector<double> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = (*this)(xs[i]);
    return out;
  }

  /// Points where q may fail to be smooth.
  std::vector<double> breakpoints() const {
    std::vector<double> out;
    if (kernel_.family == KernelFamily::uniform_box) {
      for (double b : dist_.breakpoints()) {
        out.push_back(b - kernel_.nu);
        out.push_back(b + kernel_.nu);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Region where q^2 exceeds the offset.
  Interval reach() const {
    const Interval s = dist_.support();
    return {s.lo - kernel_.reach(), s.hi + kernel_.reach()};
  }

  DensityForm form() const noexcept { return form_; }
  const Kernel& kernel() const noexcept { return kernel_; }
  const Mixture& distribution() const noexcept { return dist_; }

 private:
  double base_term(std::size_t m, double x, double step_scale) const {
    const Component& c = dist_.components[m];
    if (form_ == DensityForm::closed) return smoothed_base_closed(kernel_, c, x);
    return smoothed_base_quadrature(kernel_, c, x, step_scale * integration_step(kernel_, c, opt_), opt_.order);
  }

  void check_resolution() const {
    const Interval r = reach();
    double worst = 0.0;
    constexpr int probes = 65;
    for (int i = 0; i < probes; ++i) {
      const double x = r.lo + (r.hi - r.lo) * (static_cast<double>(i) + 0.5) / probes;
      for (std::size_t m = 0; m < dist_.size(); ++m)
        worst = std::max(worst, std::abs(base_term(m, x, 1.0) - base_term(m, x, 0.5)));
    }
    if (worst > opt_.tolerance)
      fail(ErrorKind::GridTooCoarse, "halving the panel width moved q^2 by " + std::to_string(worst));
  }

  Kernel kernel_;
  Mixture dist_;
  QuadratureOptions opt_;
  DensityForm form_ = DensityForm::closed;
};

/// One kernelized density per mixture component.
inline std::vector<KernelizedDensity> component_densities(const Mixture& mix, const Kernel& k,
                                                          DensityMethod method = DensityMethod::automatic,
                                                          QuadratureOptions opt = {}) {
  std::vector<KernelizedDensity> out;
  out.reserve(mix.size());
  for (const Component& c : mix.components) out.push_back(KernelizedDensity::make(k, c, method, opt));
  return out;
}

inline constexpr double kDefaultRFloor = 1e-8;

/// k(x, y) / (q_left(x) q_right(y)).
class NormalizedKernel {
 public:
  NormalizedKernel(Kernel k, KernelizedDensity left, KernelizedDensity right)
      : kernel_(k), left_(std::move(left)), right_(std::move(right)) {}

  /// Builds the kernel after checking both densities stay above `r_floor`
  /// on `nodes`.
  static NormalizedKernel make(const Kernel& k, const KernelizedDensity& left, const KernelizedDensity& right,
                               std::span<const double> nodes, double r_floor = kDefaultRFloor) {
    for (double x : nodes) {
      const double ql = left(x);
      const double qr = right(x);
      if (ql < r_floor || qr < r_floor)
        fail(ErrorKind::DensityUnderflow,
             "kernelized density " + std::to_string(std::min(ql, qr)) + " below floor at x = " + std::to_string(x));
    }
    return NormalizedKernel(k, left, right);
  }

  double operator()(double x, double y) const { return kernel_(x, y) / (left_(x) * right_(y)); }

  const Kernel& kernel() const noexcept { return kernel_; }
  const KernelizedDensity& left() const noexcept { return left_; }
  const KernelizedDensity& right() const noexcept { return right_; }

 private:
  Kernel kernel_;
  KernelizedDensity left_;
  KernelizedDensity right_;
};

/// (q_1(x), ..., q_K(x)).
inline Vector sqrt_density_embedding(std::span<const KernelizedDensity> per_component, double x) {
  Vector out(static_cast<Eigen::Index>(per_component.size()));
  for (std::size_t m = 0; m < per_component.size(); ++m) out[static_cast<Eigen::Index>(m)] = per_component[m](x);
  return out;
}

inline Vector sqrt_density_embedding(const Mixture& mix, const Kernel& k, double x) {
  const auto qs = component_densities(mix, k);
  return sqrt_density_embedding(qs, x);
}

}  // namespace specgeo
