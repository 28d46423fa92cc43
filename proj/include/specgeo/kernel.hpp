#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "specgeo/error.hpp"
#include "specgeo/numerics/eigen.hpp"

namespace specgeo {

enum class KernelFamily { gaussian, uniform_box, linear };

/// Translation-invariant kernel with an optional constant offset. The linear
/// kernel x*y is carried only so the similarity counterexample can be
/// evaluated; population routines reject it.
struct Kernel {
  KernelFamily family = KernelFamily::gaussian;
  double nu = 1.0;
  double offset = 0.0;

  static Kernel gaussian(double nu, double offset = 0.0) { return make(KernelFamily::gaussian, nu, offset); }
  static Kernel uniform_box(double nu, double offset = 0.0) { return make(KernelFamily::uniform_box, nu, offset); }
  static Kernel regularized(Kernel base, double offset) { return make(base.family, base.nu, base.offset + offset); }
  static Kernel linear() {
    Kernel k;
    k.family = KernelFamily::linear;
    return k;
  }

  bool is_regularized() const noexcept { return offset > 0.0; }
  bool is_translation_invariant() const noexcept { return family != KernelFamily::linear; }
  bool positive_definite() const noexcept { return family == KernelFamily::gaussian; }

  /// The kernel without its offset.
  double base(double x, double y) const noexcept {
    const double r = x - y;
    switch (family) {
      case KernelFamily::gaussian:
        return std::exp(-r * r / (2.0 * nu * nu)) / (std::sqrt(2.0 * std::numbers::pi) * nu);
      case KernelFamily::uniform_box:
        return std::abs(r) <= nu ? 0.5 / nu : 0.0;
      case KernelFamily::linear:
        return x * y;
    }
    return 0.0;
  }

  double operator()(double x, double y) const noexcept { return base(x, y) + offset; }

  /// Product kernel in d dimensions, from the squared distance.
  double from_squared_distance(double r2, std::size_t dim) const {
    switch (family) {
      case KernelFamily::gaussian:
        return std::pow(2.0 * std::numbers::pi * nu * nu, -0.5 * static_cast<double>(dim)) *
                   std::exp(-r2 / (2.0 * nu * nu)) +
               offset;
      case KernelFamily::uniform_box:
        if (dim != 1) fail(ErrorKind::BadParameter, "box kernel is one-dimensional");
        return (std::sqrt(r2) <= nu ? 0.5 / nu : 0.0) + offset;
      case KernelFamily::linear:
        break;
    }
    fail(ErrorKind::BadParameter, "linear kernel has no distance form");
  }

  /// sup k.
  double bound() const {
    switch (family) {
      case KernelFamily::gaussian: return 1.0 / (std::sqrt(2.0 * std::numbers::pi) * nu) + offset;
      case KernelFamily::uniform_box: return 0.5 / nu + offset;
      case KernelFamily::linear: return std::numeric_limits<double>::infinity();
    }
    return 0.0;
  }

  /// Distance beyond which the base kernel is negligible (exactly zero for
  /// the box kernel).
  double reach() const noexcept {
    switch (family) {
      case KernelFamily::gaussian: return 10.0 * nu;
      case KernelFamily::uniform_box: return nu;
      case KernelFamily::linear: return std::numeric_limits<double>::infinity();
    }
    return 0.0;
  }

  /// Points y where y -> k(x, y) is not smooth.
  std::vector<double> breakpoints(double x) const {
    if (family == KernelFamily::uniform_box) return {x - nu, x + nu};
    return {};
  }

  /// Quadrature panel width that resolves the kernel's scale.
  double resolution() const noexcept { return family == KernelFamily::linear ? 1.0 : nu; }

  std::string name() const {
    std::string base_name = family == KernelFamily::gaussian      ? "gaussian"
                            : family == KernelFamily::uniform_box ? "uniform_box"
                                                                  : "linear";
    return offset > 0.0 ? "regularized(" + base_name + ")" : base_name;
  }

 private:
  static Kernel make(KernelFamily family, double nu, double offset) {
    if (!(nu > 0.0) || !std::isfinite(nu)) fail(ErrorKind::BadParameter, "bandwidth must be positive");
    if (!(offset >= 0.0)) fail(ErrorKind::BadParameter, "offset must be nonnegative");
    Kernel k;
    k.family = family;
    k.nu = nu;
    k.offset = offset;
    return k;
  }
};

inline void require_population_kernel(const Kernel& k) {
  if (!k.is_translation_invariant())
    fail(ErrorKind::BadParameter, "the linear kernel is only supported by similarity()");
}

/// A_ij = k(x_i, x_j) / n.
inline Matrix kernel_matrix(const Kernel& k, std::span<const double> points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n < 1) fail(ErrorKind::BadParameter, "kernel matrix needs at least one point");
  const double inv_n = 1.0 / static_cast<double>(n);
  Matrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) = k(points[i], points[i]) * inv_n;
    for (Eigen::Index j = i + 1; j < n; ++j) a(i, j) = a(j, i) = k(points[i], points[j]) * inv_n;
  }
  return a;
}

/// Kernel matrix for points stored as the rows of `points`.
inline Matrix kernel_matrix(const Kernel& k, const Matrix& points) {
  const Eigen::Index n = points.rows();
  if (n < 1) fail(ErrorKind::BadParameter, "kernel matrix needs at least one point");
  require_population_kernel(k);
  const auto dim = static_cast<std::size_t>(points.cols());
  const double inv_n = 1.0 / static_cast<double>(n);
  Matrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) = k.from_squared_distance(0.0, dim) * inv_n;
    for (Eigen::Index j = i + 1; j < n; ++j)
      a(i, j) = a(j, i) = k.from_squared_distance((points.row(i) - points.row(j)).squaredNorm(), dim) * inv_n;
  }
  return a;
}

struct PsdReport {
  bool psd = false;
  double min_eigenvalue = 0.0;
};

/// Positive semidefiniteness of the kernel matrix on `points`, judged by its
/// smallest eigenvalue against -tolerance.
inline PsdReport psd_check(const Kernel& k, std::span<const double> points, double tolerance) {
  if (points.size() < 2) fail(ErrorKind::BadParameter, "psd_check needs at least two points");
  const Vector values = sym_eigenvalues(kernel_matrix(k, points));
  PsdReport r;
  r.min_eigenvalue = values[values.size() - 1];
  r.psd = r.min_eigenvalue >= -tolerance;
  return r;
}

}  // namespace specgeo
