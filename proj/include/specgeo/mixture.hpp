#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "specgeo/error.hpp"
#include "specgeo/kernel.hpp"
#include "specgeo/numerics/quadrature.hpp"
#include "specgeo/numerics/rng.hpp"

namespace specgeo {

enum class ComponentFamily { gaussian, triangular, uniform, composite };

/// Gaussian tails are cut here, in standard deviations.
inline constexpr double kGaussianTruncation = 8.0;

/// One mixture component. Triangular components have unit half-width:
/// density x - mu + 1 on (mu - 1, mu) and mu + 1 - x on (mu, mu + 1).
struct Component {
  ComponentFamily family = ComponentFamily::gaussian;
  double mu = 0.0;
  double sigma = 1.0;
  double a = 0.0;
  double b = 1.0;
  std::vector<Component> parts;
  std::vector<double> part_weights;

  static Component gaussian(double mu, double sigma) {
    if (!(sigma > 0.0)) fail(ErrorKind::BadParameter, "gaussian sigma must be positive");
    Component c;
    c.family = ComponentFamily::gaussian;
    c.mu = mu;
    c.sigma = sigma;
    return c;
  }

  static Component triangular(double mu) {
    Component c;
    c.family = ComponentFamily::triangular;
    c.mu = mu;
    return c;
  }

  static Component uniform(double a, double b) {
    if (!(b > a)) fail(ErrorKind::BadParameter, "uniform needs a < b");
    Component c;
    c.family = ComponentFamily::uniform;
    c.a = a;
    c.b = b;
    return c;
  }

  static Component composite(std::vector<Component> parts, std::vector<double> weights) {
    if (parts.empty() || parts.size() != weights.size())
      fail(ErrorKind::BadParameter, "composite needs one weight per part");
    double total = 0.0;
    for (double w : weights) {
      if (!(w > 0.0)) fail(ErrorKind::BadParameter, "composite weights must be positive");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) fail(ErrorKind::BadParameter, "composite weights must sum to 1");
    Component c;
    c.family = ComponentFamily::composite;
    c.parts = std::move(parts);
    c.part_weights = std::move(weights);
    return c;
  }

  double pdf(double x) const {
    switch (family) {
      case ComponentFamily::gaussian: {
        const double z = (x - mu) / sigma;
        return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * sigma);
      }
      case ComponentFamily::triangular: {
        const double r = std::abs(x - mu);
        return r < 1.0 ? 1.0 - r : 0.0;
      }
      case ComponentFamily::uniform:
        return (x >= a && x <= b) ? 1.0 / (b - a) : 0.0;
      case ComponentFamily::composite: {
        double s = 0.0;
        for (std::size_t i = 0; i < parts.size(); ++i) s += part_weights[i] * parts[i].pdf(x);
        return s;
      }
    }
    return 0.0;
  }

  double cdf(double x) const {
    switch (family) {
      case ComponentFamily::gaussian:
        return 0.5 * std::erfc(-(x - mu) / (sigma * std::numbers::sqrt2));
      case ComponentFamily::triangular: {
        const double t = x - mu;
        if (t <= -1.0) return 0.0;
        if (t <= 0.0) return 0.5 * (t + 1.0) * (t + 1.0);
        if (t < 1.0) return 1.0 - 0.5 * (1.0 - t) * (1.0 - t);
        return 1.0;
      }
      case ComponentFamily::uniform:
        return std::clamp((x - a) / (b - a), 0.0, 1.0);
      case ComponentFamily::composite: {
        double s = 0.0;
        for (std::size_t i = 0; i < parts.size(); ++i) s += part_weights[i] * parts[i].cdf(x);
        return s;
      }
    }
    return 0.0;
  }

  /// Upper tail mass P[X > x], accurate far into the right tail.
  double survival(double x) const {
    switch (family) {
      case ComponentFamily::gaussian:
        return 0.5 * std::erfc((x - mu) / (sigma * std::numbers::sqrt2));
      case ComponentFamily::triangular: {
        const double t = x - mu;
        if (t >= 1.0) return 0.0;
        if (t >= 0.0) return 0.5 * (1.0 - t) * (1.0 - t);
        if (t > -1.0) return 1.0 - 0.5 * (t + 1.0) * (t + 1.0);
        return 1.0;
      }
      case ComponentFamily::uniform:
        return std::clamp((b - x) / (b - a), 0.0, 1.0);
      case ComponentFamily::composite: {
        double s = 0.0;
        for (std::size_t i = 0; i < parts.size(); ++i) s += part_weights[i] * parts[i].survival(x);
        return s;
      }
    }
    return 0.0;
  }

  /// Mass of the interval [lo, hi], computed from whichever tail is smaller.
  double mass(double lo, double hi) const {
    if (!(hi > lo)) return 0.0;
    const double left = cdf(hi) - cdf(lo);
    const double right = survival(lo) - survival(hi);
    return std::max(0.0, cdf(lo) < 0.5 ? left : right);
  }

  /// Triangular draws use the piecewise inverse CDF: u < 1/2 maps to
  /// mu - 1 + sqrt(2u), otherwise to mu + 1 - sqrt(2(1 - u)).
  double sample(Rng& rng) const {
    switch (family) {
      case ComponentFamily::gaussian:
        return mu + sigma * rng.gaussian();
      case ComponentFamily::triangular: {
        const double u = rng.uniform();
        return u < 0.5 ? mu - 1.0 + std::sqrt(2.0 * u) : mu + 1.0 - std::sqrt(2.0 * (1.0 - u));
      }
      case ComponentFamily::uniform:
        return a + (b - a) * rng.uniform();
      case ComponentFamily::composite: {
        const double u = rng.uniform();
        double acc = 0.0;
        std::size_t pick = parts.size() - 1;
        for (std::size_t i = 0; i < parts.size(); ++i) {
          acc += part_weights[i];
          if (u < acc) {
            pick = i;
            break;
          }
        }
        return parts[pick].sample(rng);
      }
    }
    return 0.0;
  }

  /// Closed support, with Gaussian tails truncated.
  Interval support() const {
    switch (family) {
      case ComponentFamily::gaussian:
        return {mu - kGaussianTruncation * sigma, mu + kGaussianTruncation * sigma};
      case ComponentFamily::triangular:
        return {mu - 1.0, mu + 1.0};
      case ComponentFamily::uniform:
        return {a, b};
      case ComponentFamily::composite: {
        Interval hull = parts.front().support();
        for (const auto& p : parts) {
          const Interval s = p.support();
          hull.lo = std::min(hull.lo, s.lo);
          hull.hi = std::max(hull.hi, s.hi);
        }
        return hull;
      }
    }
    return {};
  }

  /// Disjoint, increasing intervals whose union is the support.
  std::vector<Interval> support_pieces() const {
    std::vector<Interval> raw;
    collect_supports(raw);
    return merge_intervals(std::move(raw));
  }

  /// Points where the density is not smooth.
  std::vector<double> breakpoints() const {
    std::vector<double> out;
    collect_breakpoints(out);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Length scale on which the density varies smoothly.
  double smooth_scale() const {
    switch (family) {
      case ComponentFamily::gaussian: return sigma;
      case ComponentFamily::triangular: return 1.0;
      case ComponentFamily::uniform: return b - a;
      case ComponentFamily::composite: {
        double s = parts.front().smooth_scale();
        for (const auto& p : parts) s = std::min(s, p.smooth_scale());
        return s;
      }
    }
    return 1.0;
  }

  std::string describe() const {
    switch (family) {
      case ComponentFamily::gaussian:
        return "N(" + fmt(mu) + "," + fmt(sigma) + ")";
      case ComponentFamily::triangular:
        return "T(" + fmt(mu) + ")";
      case ComponentFamily::uniform:
        return "U(" + fmt(a) + "," + fmt(b) + ")";
      case ComponentFamily::composite: {
        std::string s = "mix[";
        for (std::size_t i = 0; i < parts.size(); ++i) {
          if (i) s += " + ";
          s += fmt(part_weights[i]) + "*" + parts[i].describe();
        }
        return s + "]";
      }
    }
    return "?";
  }

  static std::vector<Interval> merge_intervals(std::vector<Interval> raw) {
    std::sort(raw.begin(), raw.end(), [](const Interval& l, const Interval& r) { return l.lo < r.lo; });
    std::vector<Interval> out;
    for (const auto& iv : raw) {
      if (!out.empty() && iv.lo <= out.back().hi)
        out.back().hi = std::max(out.back().hi, iv.hi);
      else
        out.push_back(iv);
    }
    return out;
  }

 private:
  static std::string fmt(double v) {
    std::string s = std::to_string(v);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  }

  void collect_supports(std::vector<Interval>& out) const {
    if (family == ComponentFamily::composite) {
      for (const auto& p : parts) p.collect_supports(out);
    } else {
      out.push_back(support());
    }
  }

  void collect_breakpoints(std::vector<double>& out) const {
    switch (family) {
      case ComponentFamily::gaussian:
        out.push_back(mu);
        break;
      case ComponentFamily::triangular:
        out.insert(out.end(), {mu - 1.0, mu, mu + 1.0});
        break;
      case ComponentFamily::uniform:
        out.insert(out.end(), {a, b});
        break;
      case ComponentFamily::composite:
        for (const auto& p : parts) p.collect_breakpoints(out);
        break;
    }
  }
};

/// Draw with its latent label (0-based component index).
struct LabeledSample {
  double x = 0.0;
  std::size_t z = 0;
};

struct Mixture {
  std::vector<Component> components;
  std::vector<double> weights;

  static Mixture make(std::vector<Component> components, std::vector<double> weights) {
    if (components.empty()) fail(ErrorKind::BadParameter, "mixture needs at least one component");
    if (components.size() != weights.size())
      fail(ErrorKind::BadParameter, "mixture needs one weight per component");
    double total = 0.0;
    for (double w : weights) {
      if (!(w > 0.0)) fail(ErrorKind::BadParameter, "mixture weights must be strictly positive");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) fail(ErrorKind::BadParameter, "mixture weights must sum to 1");
    Mixture m;
    m.components = std::move(components);
    m.weights = std::move(weights);
    return m;
  }

  std::size_t size() const noexcept { return components.size(); }

  double w_min() const { return *std::min_element(weights.begin(), weights.end()); }

  double pdf(double x) const {
    double s = 0.0;
    for (std::size_t m = 0; m < components.size(); ++m) s += weights[m] * components[m].pdf(x);
    return s;
  }

  double cdf(double x) const {
    double s = 0.0;
    for (std::size_t m = 0; m < components.size(); ++m) s += weights[m] * components[m].cdf(x);
    return s;
  }

  /// The mixture viewed as a single composite component.
  Component as_component() const {
    if (components.size() == 1) return components.front();
    return Component::composite(components, weights);
  }

  std::size_t draw_label(Rng& rng) const {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t m = 0; m < weights.size(); ++m) {
      acc += weights[m];
      if (u < acc) return m;
    }
    return weights.size() - 1;
  }

  std::vector<LabeledSample> sample(std::size_t n, Rng& rng) const {
    if (n < 1) fail(ErrorKind::BadParameter, "sample size must be positive");
    std::vector<LabeledSample> out(n);
    for (auto& s : out) {
      s.z = draw_label(rng);
      s.x = components[s.z].sample(rng);
    }
    return out;
  }

  Interval support() const { return as_component().support(); }
  std::vector<Interval> support_pieces() const { return as_component().support_pieces(); }
  std::vector<double> breakpoints() const { return as_component().breakpoints(); }
  double smooth_scale() const { return as_component().smooth_scale(); }
};

/// A mixture bundled with the kernel it is studied under.
struct Preset {
  std::string name;
  Mixture mixture;
  Kernel kernel;
};

inline Preset triangular_pair(double mu, double nu) {
  if (!(nu > 0.0 && nu < 1.0)) fail(ErrorKind::BadParameter, "triangular presets need nu in (0, 1)");
  return {"triangular_pair",
          Mixture::make({Component::triangular(0.0), Component::triangular(mu)}, {0.5, 0.5}),
          Kernel::uniform_box(nu)};
}

inline Preset gaussian_pair(double mu, double nu) {
  return {"gaussian_pair",
          Mixture::make({Component::gaussian(0.0, 1.0), Component::gaussian(mu, 1.0)}, {0.5, 0.5}),
          Kernel::gaussian(nu)};
}

/// First component is the bimodal T(0)/T(mu) blend, second is T(2 mu).
inline Preset triangular_bad(double mu, double nu = 0.05) {
  if (!(nu > 0.0 && nu < 1.0)) fail(ErrorKind::BadParameter, "triangular presets need nu in (0, 1)");
  Component bimodal = Component::composite({Component::triangular(0.0), Component::triangular(mu)}, {0.5, 0.5});
  return {"triangular_bad", Mixture::make({bimodal, Component::triangular(2.0 * mu)}, {0.5, 0.5}),
          Kernel::uniform_box(nu)};
}

inline Preset uniform_linear(double delta) {
  if (!(delta >= 0.0)) fail(ErrorKind::BadParameter, "uniform_linear needs delta >= 0");
  return {"uniform_linear",
          Mixture::make({Component::uniform(1.0, 2.0), Component::uniform(2.0 + delta, 3.0 + delta)}, {0.5, 0.5}),
          Kernel::linear()};
}

}  // namespace specgeo
