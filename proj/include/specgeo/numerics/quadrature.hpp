#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "specgeo/error.hpp"

namespace specgeo {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const noexcept { return hi - lo; }
  bool contains(double x) const noexcept { return x >= lo && x <= hi; }
};

enum class QuadratureRule { trapezoid, simpson };

/// Nodes and positive weights discretizing one closed interval, or a union of
/// closed intervals laid end to end (see merge_grids).
struct QuadratureGrid {
  std::vector<double> nodes;
  std::vector<double> weights;
  Interval domain;

  std::size_t size() const noexcept { return nodes.size(); }

  template <class F>
  double integrate(F&& f) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
  }
};

/// Composite trapezoid or Simpson rule with `n_nodes` equispaced nodes.
inline QuadratureGrid make_grid(Interval domain, std::size_t n_nodes, QuadratureRule rule) {
  if (n_nodes < 3) fail(ErrorKind::BadNodeCount, "need at least 3 nodes, got " + std::to_string(n_nodes));
  if (rule == QuadratureRule::simpson && n_nodes % 2 == 0)
    fail(ErrorKind::BadNodeCount, "simpson rule needs an odd node count, got " + std::to_string(n_nodes));
  if (!(domain.hi > domain.lo)) fail(ErrorKind::BadParameter, "empty quadrature domain");

  QuadratureGrid grid;
  grid.domain = domain;
  grid.nodes.resize(n_nodes);
  grid.weights.resize(n_nodes);
  const double h = domain.length() / static_cast<double>(n_nodes - 1);
  for (std::size_t i = 0; i < n_nodes; ++i) grid.nodes[i] = domain.lo + h * static_cast<double>(i);
  grid.nodes.back() = domain.hi;

  if (rule == QuadratureRule::trapezoid) {
    std::fill(grid.weights.begin(), grid.weights.end(), h);
    grid.weights.front() = grid.weights.back() = 0.5 * h;
  } else {
    for (std::size_t i = 0; i < n_nodes; ++i) {
      const double c = (i == 0 || i + 1 == n_nodes) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      grid.weights[i] = c * h / 3.0;
    }
  }
  return grid;
}

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussLegendre gauss_legendre(std::size_t order) {
  if (order < 1) fail(ErrorKind::BadNodeCount, "Gauss-Legendre order must be positive");
  GaussLegendre gl;
  gl.nodes.resize(order);
  gl.weights.resize(order);
  const auto n = static_cast<double>(order);
  for (std::size_t i = 0; i < (order + 1) / 2; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= order; ++k) {
        const auto kd = static_cast<double>(k);
        const double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged root.
    double p0 = 1.0;
    double p1 = x;
    for (std::size_t k = 2; k <= order; ++k) {
      const auto kd = static_cast<double>(k);
      const double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
      p0 = p1;
      p1 = p2;
    }
    dp = order == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    gl.nodes[i] = -x;
    gl.nodes[order - 1 - i] = x;
    gl.weights[i] = w;
    gl.weights[order - 1 - i] = w;
  }
  if (order % 2 == 1) gl.nodes[order / 2] = 0.0;
  return gl;
}

/// Cached rules for orders 1..32.
inline const GaussLegendre& gauss_legendre_rule(std::size_t order) {
  static const std::vector<GaussLegendre> table = [] {
    std::vector<GaussLegendre> t;
    for (std::size_t k = 1; k <= 32; ++k) t.push_back(gauss_legendre(k));
    return t;
  }();
  if (order < 1 || order > table.size())
    fail(ErrorKind::BadNodeCount, "Gauss-Legendre order must lie in [1, 32]");
  return table[order - 1];
}

namespace detail {

inline std::vector<double> panel_edges(Interval domain, std::span<const double> breakpoints) {
  std::vector<double> edges{domain.lo, domain.hi};
  for (double b : breakpoints)
    if (b > domain.lo && b < domain.hi) edges.push_back(b);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](double a, double b) { return b - a <= 1e-14 * (1.0 + std::abs(a)); }),
              edges.end());
  edges.back() = domain.hi;
  return edges;
}

// Calls visit(node, weight) for every node of the composite rule.
template <class Visit>
void for_each_panel_node(Interval domain, std::span<const double> breakpoints, double max_step,
                         std::size_t order, Visit&& visit) {
  const GaussLegendre& gl = gauss_legendre_rule(order);
  const std::vector<double> edges = panel_edges(domain, breakpoints);
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
    const double a = edges[e];
    const double b = edges[e + 1];
    const auto panels = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / max_step)));
    const double width = (b - a) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
      const double mid = a + width * (static_cast<double>(p) + 0.5);
      for (std::size_t k = 0; k < order; ++k)
        visit(mid + 0.5 * width * gl.nodes[k], 0.5 * width * gl.weights[k]);
    }
  }
}

}  // namespace detail

/// Composite Gauss-Legendre grid on `domain`. Panel edges include every
/// breakpoint inside the domain and no panel is longer than `max_step`, so a
/// piecewise-smooth integrand with kinks or jumps only at breakpoints is
/// integrated at the rule's full order.
inline QuadratureGrid make_panel_grid(Interval domain, std::span<const double> breakpoints,
                                      double max_step, std::size_t order = 8) {
  if (!(domain.hi > domain.lo)) fail(ErrorKind::BadParameter, "empty quadrature domain");
  if (!(max_step > 0.0)) fail(ErrorKind::BadParameter, "panel step must be positive");
  QuadratureGrid grid;
  grid.domain = domain;
  detail::for_each_panel_node(domain, breakpoints, max_step, order, [&](double x, double w) {
    grid.nodes.push_back(x);
    grid.weights.push_back(w);
  });
  return grid;
}

/// Concatenates grids over disjoint, increasing intervals. The domain becomes
/// the hull; weights keep their own interval's scale.
inline QuadratureGrid merge_grids(std::span<const QuadratureGrid> parts) {
  QuadratureGrid out;
  if (parts.empty()) return out;
  out.domain = parts.front().domain;
  for (const auto& part : parts) {
    if (!out.nodes.empty() && !part.nodes.empty() && part.nodes.front() <= out.nodes.back())
      fail(ErrorKind::BadParameter, "merged grids must be disjoint and increasing");
    out.nodes.insert(out.nodes.end(), part.nodes.begin(), part.nodes.end());
    out.weights.insert(out.weights.end(), part.weights.begin(), part.weights.end());
    out.domain.lo = std::min(out.domain.lo, part.domain.lo);
    out.domain.hi = std::max(out.domain.hi, part.domain.hi);
  }
  return out;
}

/// Integrates f over [a, b] with breakpoint-aligned Gauss-Legendre panels.
template <class F>
double integrate(F&& f, Interval range, std::span<const double> breakpoints, double max_step,
                 std::size_t order = 8) {
  if (!(range.hi > range.lo)) return 0.0;
  double sum = 0.0;
  detail::for_each_panel_node(range, breakpoints, max_step, order,
                              [&](double x, double w) { sum += w * f(x); });
  return sum;
}

}  // namespace specgeo
