#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "specgeo/density.hpp"
#include "specgeo/error.hpp"
#include "specgeo/kernel.hpp"
#include "specgeo/mixture.hpp"
#include "specgeo/numerics/quadrature.hpp"
#include "specgeo/numerics/rng.hpp"
#include "specgeo/numerics/stats.hpp"

namespace specgeo {

enum class Provenance { closed, quadrature, monte_carlo };

constexpr std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::closed: return "closed";
    case Provenance::quadrature: return "quadrature";
    case Provenance::monte_carlo: return "monte_carlo";
  }
  return "unknown";
}

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;  // zero unless Monte Carlo
  Provenance provenance = Provenance::quadrature;
};

enum class EstimatorKind { quadrature, monte_carlo };

struct ParamMethod {
  EstimatorKind kind = EstimatorKind::quadrature;
  std::size_t mc_samples = 1'000'000;
  std::uint64_t seed = 0;
  QuadratureOptions quad{};
  std::size_t scan_thresholds = 201;
  bool refine_scan = true;
  bool closed_gamma = false;  // use a closed-form indivisibility when one exists
  std::size_t bmax_points = 401;

  static ParamMethod monte_carlo(std::size_t n, std::uint64_t seed) {
    ParamMethod m;
    m.kind = EstimatorKind::monte_carlo;
    m.mc_samples = n;
    m.seed = seed;
    return m;
  }
};

namespace closed_form {

/// Maximum similarity of 1/2 N(0,1) + 1/2 N(mu,1) under the Gaussian kernel.
inline double gaussian_pair_s_max(double mu, double nu) {
  const double e = std::exp(-mu * mu / (2.0 * nu * nu + 4.0));
  return 2.0 * e / (1.0 + e);
}

/// Indivisibility of N(mu, sigma^2) under the Gaussian kernel of bandwidth nu
/// (the optimal split is the half-line at the mean).
inline double gaussian_gamma(double nu, double sigma = 1.0) {
  const double r = nu / sigma;
  return 2.0 / std::numbers::pi * std::atan(r * std::sqrt(2.0 + r * r));
}

/// Split ratio of a unit triangle under the box kernel for the half-line at
/// its peak. This is an upper bound on the indivisibility; for small nu other
/// half-lines give lower ratios.
inline double triangular_peak_split_gamma(double nu) {
  return 2.0 * (6.0 - nu) * (2.0 - nu) * nu / (16.0 - 8.0 * nu * nu + 3.0 * nu * nu * nu);
}

/// Published closed form for the maximum similarity of the triangular pair
/// under the box kernel. It disagrees with direct integration (see
/// triangular_pair_s_max); kept so the two can be compared.
inline double triangular_pair_s_max_published(double mu, double nu) {
  const double t = std::max(0.0, 2.0 + nu - mu);
  const double t4 = t * t * t * t;
  return 2.0 * t4 / (nu * (16.0 - 8.0 * nu * nu + 3.0 * nu * nu * nu) + t4);
}

/// Exact maximum similarity of the triangular pair under the box kernel,
/// valid when the two supports overlap only through the kernel tails, i.e.
/// mu >= max(2 - nu, 1 + nu). Outside that range use similarity().
inline double triangular_pair_s_max(double mu, double nu) {
  const double t = std::max(0.0, 2.0 + nu - mu);
  const double t4 = t * t * t * t;
  return 2.0 * t4 / (2.0 * nu * (16.0 - 8.0 * nu * nu + 3.0 * nu * nu * nu) + t4);
}

inline bool triangular_pair_s_max_valid(double mu, double nu) { return mu >= std::max(2.0 - nu, 1.0 + nu); }

/// Upper bound on the coupling of the Gaussian pair: expand
/// 1 - ((1 + a)(1 + b))^{-1/2} <= (a + b + ab)/2 with a, b the density
/// ratios q_2^2/q_1^2 at x and y, and integrate each Gaussian term exactly.
inline double gaussian_pair_coupling_bound(double mu, double nu) {
  const double s = nu * nu + 1.0;
  const double pref = s / (2.0 * std::numbers::pi * nu * nu);
  const double p11 = 1.0 - 1.0 / s + 2.0 / (nu * nu);
  const double p12 = -2.0 / (nu * nu);
  const double det = p11 * p11 - p12 * p12;
  struct Term {
    int i, j;
    double coef;
  };
  constexpr Term terms[] = {{2, 0, 1.0}, {0, 2, 1.0}, {2, 2, 1.0}, {1, 1, 2.0}, {2, 1, 2.0}, {1, 2, 2.0}};
  double total = 0.0;
  for (const Term& t : terms) {
    const double h1 = t.i * mu / s;
    const double h2 = t.j * mu / s;
    const double c0 = -(t.i + t.j) * mu * mu / (2.0 * s);
    // h^T P^{-1} h for the symmetric 2x2 precision matrix.
    const double quad = (p11 * h1 * h1 - 2.0 * p12 * h1 * h2 + p11 * h2 * h2) / det;
    total += t.coef * pref * std::exp(c0 + 0.5 * quad) * 2.0 * std::numbers::pi / std::sqrt(det);
  }
  return 0.25 * total;
}

}  // namespace closed_form

namespace detail {

inline double normal_mass(double mean, double sd, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  const double zl = (lo - mean) / sd;
  const double zh = (hi - mean) / sd;
  const double m = zl >= 0.0 ? standard_normal_sf(zl) - standard_normal_sf(zh)
                             : standard_normal_sf(-zh) - standard_normal_sf(-zl);
  return std::max(0.0, m);
}

/// Integral of the base kernel k(x, y) p(y) over y in (lo, hi).
inline double band_smooth(const Kernel& k, const Component& c, double x, double lo, double hi,
                          const QuadratureOptions& opt) {
  if (!(hi > lo)) return 0.0;
  if (c.family == ComponentFamily::composite) {
    double s = 0.0;
    for (std::size_t i = 0; i < c.parts.size(); ++i) s += c.part_weights[i] * band_smooth(k, c.parts[i], x, lo, hi, opt);
    return s;
  }
  if (k.family == KernelFamily::uniform_box)
    return c.mass(std::max(lo, x - k.nu), std::min(hi, x + k.nu)) / (2.0 * k.nu);
  if (k.family == KernelFamily::gaussian && c.family == ComponentFamily::gaussian) {
    const double v = c.sigma * c.sigma + k.nu * k.nu;
    const double r = x - c.mu;
    const double m = (x * c.sigma * c.sigma + c.mu * k.nu * k.nu) / v;
    const double tau = c.sigma * k.nu / std::sqrt(v);
    return std::exp(-r * r / (2.0 * v)) / std::sqrt(2.0 * std::numbers::pi * v) * normal_mass(m, tau, lo, hi);
  }
  if (k.family == KernelFamily::gaussian && c.family == ComponentFamily::uniform)
    return normal_mass(x, k.nu, std::max(lo, c.a), std::min(hi, c.b)) / (c.b - c.a);

  std::vector<double> bps = c.breakpoints();
  const double reach = k.reach();
  double total = 0.0;
  for (const Interval& piece : c.support_pieces()) {
    const Interval range{std::max({piece.lo, lo, x - reach}), std::min({piece.hi, hi, x + reach})};
    total += integrate([&](double y) { return k.base(x, y) * c.pdf(y); }, range, bps, integration_step(k, c, opt),
                       opt.order);
  }
  return total;
}

/// E_c[f(X)] by breakpoint-aligned quadrature over the support of c,
/// optionally restricted to [lo, hi].
template <class F>
double expect(const Component& c, F&& f, std::span<const double> extra_breakpoints, double step, std::size_t order,
              double lo = -std::numeric_limits<double>::infinity(),
              double hi = std::numeric_limits<double>::infinity()) {
  std::vector<double> bps = c.breakpoints();
  bps.insert(bps.end(), extra_breakpoints.begin(), extra_breakpoints.end());
  double total = 0.0;
  for (const Interval& piece : c.support_pieces()) {
    const Interval range{std::max(piece.lo, lo), std::min(piece.hi, hi)};
    total += integrate([&](double x) { return f(x) * c.pdf(x); }, range, bps, step, order);
  }
  return total;
}

inline double component_mean(const Component& c) {
  return expect(c, [](double x) { return x; }, {}, 0.25 * c.smooth_scale(), 8);
}

inline double draw_from_mixture(const Mixture& mix, Rng& rng) {
  return mix.components[mix.draw_label(rng)].sample(rng);
}

}  // namespace detail

/// Expected kernel value between components: the (j, l) entry is the double
/// integral of k against P_j x P_l. Quadrature only.
inline Matrix cross_kernel_means(const Mixture& mix, const Kernel& k, const QuadratureOptions& opt = {}) {
  const auto K = static_cast<Eigen::Index>(mix.size());
  Matrix n(K, K);
  if (k.family == KernelFamily::linear) {
    std::vector<double> means;
    for (const Component& c : mix.components) means.push_back(detail::component_mean(c));
    for (Eigen::Index j = 0; j < K; ++j)
      for (Eigen::Index l = 0; l < K; ++l) n(j, l) = means[static_cast<std::size_t>(j)] * means[static_cast<std::size_t>(l)];
    return n;
  }
  const auto qs = component_densities(mix, k, DensityMethod::automatic, opt);
  for (Eigen::Index j = 0; j < K; ++j) {
    const std::vector<double> qb = qs[static_cast<std::size_t>(j)].breakpoints();
    for (Eigen::Index l = 0; l < K; ++l) {
      const Component& cl = mix.components[static_cast<std::size_t>(l)];
      n(j, l) = detail::expect(
          cl, [&](double y) { return qs[static_cast<std::size_t>(j)].squared(y); }, qb,
          integration_step(k, cl, opt), opt.order);
    }
  }
  return n;
}

/// S(P_l, P_m): expected kernel between P_m and P_l relative to that between
/// the whole mixture and P_l.
inline Estimate similarity(const Mixture& mix, const Kernel& k, std::size_t l, std::size_t m,
                           const ParamMethod& method = {}) {
  if (l >= mix.size() || m >= mix.size()) fail(ErrorKind::BadParameter, "component index out of range");
  if (l == m) fail(ErrorKind::BadParameter, "similarity needs two distinct components");
  if (method.kind == EstimatorKind::quadrature) {
    const Matrix n = cross_kernel_means(mix, k, method.quad);
    double den = 0.0;
    for (std::size_t j = 0; j < mix.size(); ++j)
      den += mix.weights[j] * n(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l));
    return {n(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(l)) / den, 0.0, Provenance::quadrature};
  }
  // Paired draws: the same Y ~ P_l feeds numerator and denominator; the
  // standard error follows from the delta method for a ratio of means.
  Rng rng(derive_seed(method.seed, l * mix.size() + m));
  const std::size_t n = method.mc_samples;
  std::vector<double> num(n), den(n);
  double sn = 0.0, sd = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = mix.components[l].sample(rng);
    const double x = mix.components[m].sample(rng);
    const double xbar = detail::draw_from_mixture(mix, rng);
    num[i] = k(x, y);
    den[i] = k(xbar, y);
    sn += num[i];
    sd += den[i];
  }
  const double ratio = sn / sd;
  const double mean_den = sd / static_cast<double>(n);
  RunningStats resid;
  for (std::size_t i = 0; i < n; ++i) resid.add(num[i] - ratio * den[i]);
  return {ratio, resid.std_error() / mean_den, Provenance::monte_carlo};
}

/// Largest similarity over ordered pairs of distinct components.
inline Estimate s_max(const Mixture& mix, const Kernel& k, const ParamMethod& method = {}) {
  if (mix.size() < 2) fail(ErrorKind::BadParameter, "s_max needs at least two components");
  Estimate best{-1.0, 0.0, Provenance::quadrature};
  if (method.kind == EstimatorKind::quadrature) {
    const Matrix n = cross_kernel_means(mix, k, method.quad);
    for (std::size_t l = 0; l < mix.size(); ++l) {
      double den = 0.0;
      for (std::size_t j = 0; j < mix.size(); ++j)
        den += mix.weights[j] * n(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l));
      for (std::size_t m = 0; m < mix.size(); ++m)
        if (m != l) best.value = std::max(best.value, n(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(l)) / den);
    }
    return best;
  }
  for (std::size_t l = 0; l < mix.size(); ++l)
    for (std::size_t m = 0; m < mix.size(); ++m)
      if (m != l) {
        const Estimate e = similarity(mix, k, l, m, method);
        if (e.value > best.value) best = e;
      }
  return best;
}

namespace detail {

// (k_m - w_m kbar)(x, y), written so that no two nearly equal quantities are
// subtracted: with r = qbar^2 - w_m q_m^2 (the other components' share),
// qbar(x)qbar(y) - w_m q_m(x)q_m(y) = [w_m q_m^2(x) r(y) + r(x) w_m q_m^2(y)
// + r(x) r(y)] / [qbar(x)qbar(y) + w_m q_m(x)q_m(y)].
struct CouplingIntegrand {
  const Kernel& k;
  double w;

  double operator()(double x, double y, double qm2x, double rx, double qm2y, double ry) const {
    const double qbx = std::sqrt(w * qm2x + rx);
    const double qby = std::sqrt(w * qm2y + ry);
    const double qmx = std::sqrt(qm2x);
    const double qmy = std::sqrt(qm2y);
    const double a = qbx * qby;
    const double b = w * qmx * qmy;
    const double diff = (w * qm2x * ry + rx * w * qm2y + rx * ry) / (a + b);
    return k(x, y) * diff / (qmx * qmy * a);
  }
};

}  // namespace detail

/// Squared P_m x P_m norm of k_m - w_m kbar for one component.
inline Estimate coupling_component(const Mixture& mix, const Kernel& k, std::size_t m, const ParamMethod& method = {}) {
  require_population_kernel(k);
  const auto qs = component_densities(mix, k, DensityMethod::automatic, method.quad);
  const double w = mix.weights[m];
  auto share = [&](double x) {
    double r = 0.0;
    for (std::size_t j = 0; j < mix.size(); ++j)
      if (j != m) r += mix.weights[j] * qs[j].squared(x);
    return r;
  };
  const detail::CouplingIntegrand f{k, w};
  const Component& c = mix.components[m];

  if (method.kind == EstimatorKind::monte_carlo) {
    Rng rng(derive_seed(method.seed, 1000 + m));
    RunningStats st;
    for (std::size_t i = 0; i < method.mc_samples; ++i) {
      const double x = c.sample(rng);
      const double y = c.sample(rng);
      const double v = f(x, y, qs[m].squared(x), share(x), qs[m].squared(y), share(y));
      st.add(v * v);
    }
    return {st.mean(), st.std_error(), Provenance::monte_carlo};
  }

  std::vector<double> qbps;
  for (const auto& q : qs) {
    const auto b = q.breakpoints();
    qbps.insert(qbps.end(), b.begin(), b.end());
  }
  const double step = integration_step(k, c, method.quad);
  const double reach = k.reach();
  const double value = detail::expect(
      c,
      [&](double x) {
        const double qm2x = qs[m].squared(x);
        const double rx = share(x);
        std::vector<double> inner_bps = qbps;
        const auto kb = k.breakpoints(x);
        inner_bps.insert(inner_bps.end(), kb.begin(), kb.end());
        auto g = [&](double y) {
          const double v = f(x, y, qm2x, rx, qs[m].squared(y), share(y));
          return v * v;
        };
        // With an offset the kernel never vanishes, so the whole support counts.
        const double lo = k.offset > 0.0 ? -std::numeric_limits<double>::infinity() : x - reach;
        const double hi = k.offset > 0.0 ? std::numeric_limits<double>::infinity() : x + reach;
        return detail::expect(c, g, inner_bps, step, method.quad.order, lo, hi);
      },
      qbps, step, method.quad.order);
  return {value, 0.0, Provenance::quadrature};
}

/// Coupling parameter: the largest per-component value.
inline Estimate coupling(const Mixture& mix, const Kernel& k, const ParamMethod& method = {}) {
  Estimate best{0.0, 0.0, method.kind == EstimatorKind::quadrature ? Provenance::quadrature : Provenance::monte_carlo};
  if (mix.size() == 1) return best;
  for (std::size_t m = 0; m < mix.size(); ++m) {
    const Estimate e = coupling_component(mix, k, m, method);
    if (e.value > best.value) best = e;
  }
  return best;
}

struct IndivisibilityResult {
  double value = 0.0;
  Provenance provenance = Provenance::quadrature;
  // The best split found: S = (-inf, split_lo] when interval_split is
  // false, otherwise S is the complement of (split_lo, split_hi).
  double split_lo = 0.0;
  double split_hi = 0.0;
  bool interval_split = false;
  bool upper_bound = true;
};

namespace detail {

class SplitEvaluator {
 public:
  SplitEvaluator(const Component& c, const Kernel& k, const QuadratureOptions& opt)
      : c_(c), k_(k), opt_(opt), q_(KernelizedDensity::make(k, c, DensityMethod::automatic, opt)) {
    bps_ = c.breakpoints();
    const auto qb = q_.breakpoints();
    bps_.insert(bps_.end(), qb.begin(), qb.end());
    step_ = integration_step(k, c, opt);
    total_ = p_range(-inf(), inf());
  }

  double total() const noexcept { return total_; }

  /// Split ratio for S = (-inf, s], or nullopt when S or its complement is
  /// (numerically) null.
  std::optional<double> halfline(double s) const {
    const double mass_s = c_.cdf(s);
    if (mass_s < 1e-9 || c_.survival(s) < 1e-9) return std::nullopt;
    const double ps = p_range(-inf(), s);
    const double pc = total_ - ps;
    if (!(ps > 0.0) || !(pc > 0.0)) return std::nullopt;
    const double reach = k_.reach();
    std::vector<double> bps = bps_;
    bps.push_back(s - k_.nu);
    double cut = expect(
        c_, [&](double x) { return band_smooth(k_, c_, x, s, inf(), opt_); }, bps, step_, opt_.order, s - reach, s);
    cut += k_.offset * mass_s * c_.survival(s);
    return total_ * cut / (ps * pc);
  }

  /// Split ratio for S = complement of (lo, hi).
  std::optional<double> interval(double lo, double hi) const {
    const double inside = c_.mass(lo, hi);
    if (inside < 1e-9 || 1.0 - inside < 1e-9) return std::nullopt;
    const double pin = p_range(lo, hi);
    const double pout = total_ - pin;
    if (!(pin > 0.0) || !(pout > 0.0)) return std::nullopt;
    std::vector<double> bps = bps_;
    bps.insert(bps.end(), {lo + k_.nu, hi - k_.nu});
    double cut = expect(
        c_,
        [&](double x) { return band_smooth(k_, c_, x, -inf(), lo, opt_) + band_smooth(k_, c_, x, hi, inf(), opt_); },
        bps, step_, opt_.order, lo, hi);
    cut += k_.offset * inside * (1.0 - inside);
    return total_ * cut / (pin * pout);
  }

 private:
  static constexpr double inf() { return std::numeric_limits<double>::infinity(); }

  double p_range(double lo, double hi) const {
    return expect(c_, [&](double x) { return q_.squared(x); }, bps_, step_, opt_.order, lo, hi);
  }

  const Component& c_;
  const Kernel& k_;
  QuadratureOptions opt_;
  KernelizedDensity q_;
  std::vector<double> bps_;
  double step_ = 0.0;
  double total_ = 0.0;
};

template <class F>
double golden_min(F&& f, double lo, double hi, double& arg, int iterations = 40) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iterations; ++i) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
    }
  }
  if (f1 <= f2) {
    arg = x1;
    return f1;
  }
  arg = x2;
  return f2;
}

}  // namespace detail

/// Indivisibility of one distribution. The infimum over all sets is replaced
/// by a scan over half-lines (-inf, s] with s on an even grid of the
/// support, refined by golden-section search around the best threshold.
/// Composite distributions additionally scan complements of intervals
/// centred on their mean. The result is an upper bound on the infimum.
inline IndivisibilityResult indivisibility(const Component& c, const Kernel& k, const ParamMethod& method = {}) {
  require_population_kernel(k);
  IndivisibilityResult best;
  if (method.closed_gamma && k.offset == 0.0) {
    if (c.family == ComponentFamily::gaussian && k.family == KernelFamily::gaussian) {
      best.value = closed_form::gaussian_gamma(k.nu, c.sigma);
      best.provenance = Provenance::closed;
      best.split_lo = c.mu;
      return best;
    }
  }

  const detail::SplitEvaluator eval(c, k, method.quad);
  const Interval sup = c.support();
  const std::size_t n = std::max<std::size_t>(method.scan_thresholds, 3);
  best.value = std::numeric_limits<double>::infinity();
  std::vector<double> thresholds(n);
  std::vector<double> ratios(n, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    thresholds[i] = sup.lo + sup.length() * static_cast<double>(i + 1) / static_cast<double>(n + 1);
    if (auto r = eval.halfline(thresholds[i])) ratios[i] = *r;
  }
  const auto it = std::min_element(ratios.begin(), ratios.end());
  if (std::isfinite(*it)) {
    const auto i = static_cast<std::size_t>(it - ratios.begin());
    best.value = *it;
    best.split_lo = thresholds[i];
    if (method.refine_scan) {
      const double lo = i > 0 ? thresholds[i - 1] : sup.lo;
      const double hi = i + 1 < n ? thresholds[i + 1] : sup.hi;
      double arg = best.split_lo;
      const double v = detail::golden_min(
          [&](double s) { return eval.halfline(s).value_or(std::numeric_limits<double>::infinity()); }, lo, hi, arg);
      if (v < best.value) {
        best.value = v;
        best.split_lo = arg;
      }
    }
  }

  if (c.family == ComponentFamily::composite) {
    const double center = detail::component_mean(c);
    const double half_max = std::max(center - sup.lo, sup.hi - center);
    const std::size_t m = std::max<std::size_t>(n / 4, 8);
    for (std::size_t i = 1; i <= m; ++i) {
      const double h = half_max * static_cast<double>(i) / static_cast<double>(m + 1);
      if (auto r = eval.interval(center - h, center + h); r && *r < best.value) {
        best.value = *r;
        best.split_lo = center - h;
        best.split_hi = center + h;
        best.interval_split = true;
      }
    }
  }
  if (!std::isfinite(best.value)) fail(ErrorKind::DegenerateSplit, "every scanned split has a null side");
  best.value = std::max(0.0, best.value);
  return best;
}

/// Smallest indivisibility over the mixture components.
inline IndivisibilityResult min_indivisibility(const Mixture& mix, const Kernel& k, const ParamMethod& method = {},
                                               std::vector<double>* per_component = nullptr) {
  IndivisibilityResult best;
  best.value = std::numeric_limits<double>::infinity();
  for (const Component& c : mix.components) {
    const IndivisibilityResult r = indivisibility(c, k, method);
    if (per_component) per_component->push_back(r.value);
    if (r.value < best.value) best = r;
  }
  return best;
}

/// max over m of sup_x of the integral of k_m(x, y) dP_m(y), with the sup
/// taken over an even grid of each (truncated) component support.
inline double b_max(const Mixture& mix, const Kernel& k, const ParamMethod& method = {}) {
  require_population_kernel(k);
  const auto qs = component_densities(mix, k, DensityMethod::automatic, method.quad);
  double best = 0.0;
  const double reach = k.reach();
  for (std::size_t m = 0; m < mix.size(); ++m) {
    const Component& c = mix.components[m];
    const KernelizedDensity& q = qs[m];
    std::vector<double> bps = q.breakpoints();
    const double step = integration_step(k, c, method.quad);
    const Interval sup = c.support();
    std::vector<double> xs;
    const std::size_t n = std::max<std::size_t>(method.bmax_points, 3);
    for (std::size_t i = 0; i < n; ++i)
      xs.push_back(sup.lo + sup.length() * static_cast<double>(i) / static_cast<double>(n - 1));
    const auto cb = c.breakpoints();
    xs.insert(xs.end(), cb.begin(), cb.end());
    for (double x : xs) {
      const double qx = q(x);
      if (!(qx > 0.0)) continue;
      std::vector<double> inner_bps = bps;
      const auto kb = k.breakpoints(x);
      inner_bps.insert(inner_bps.end(), kb.begin(), kb.end());
      const double lo = k.offset > 0.0 ? -std::numeric_limits<double>::infinity() : x - reach;
      const double hi = k.offset > 0.0 ? std::numeric_limits<double>::infinity() : x + reach;
      const double v = detail::expect(
          c, [&](double y) { return k(x, y) / q(y); }, inner_bps, step, method.quad.order, lo, hi);
      best = std::max(best, v / qx);
    }
  }
  return best;
}

/// sqrt(K) sqrt(S + C) / (w_min Gamma^2).
inline double difficulty_value(std::size_t K, double s_max_value, double coupling_value, double w_min, double gamma) {
  return std::sqrt(static_cast<double>(K)) * std::sqrt(s_max_value + coupling_value) / (w_min * gamma * gamma);
}

struct Diagnostics {
  std::size_t K = 0;
  double s_max = 0.0;
  double coupling = 0.0;
  double gamma = 0.0;
  double w_min = 0.0;
  double b_max = 0.0;
  double phi = 0.0;
  double s_max_se = 0.0;
  double coupling_se = 0.0;
  std::vector<double> gammas;  // per component
  Provenance s_max_provenance = Provenance::quadrature;
  Provenance coupling_provenance = Provenance::quadrature;
  Provenance gamma_provenance = Provenance::quadrature;
  Provenance b_max_provenance = Provenance::quadrature;

  double recompute_phi() const { return difficulty_value(K, s_max, coupling, w_min, gamma); }
};

inline Diagnostics difficulty(const Mixture& mix, const Kernel& k, const ParamMethod& method = {}) {
  if (mix.size() < 2) fail(ErrorKind::BadParameter, "difficulty needs at least two components");
  Diagnostics d;
  d.K = mix.size();
  const Estimate s = s_max(mix, k, method);
  const Estimate c = coupling(mix, k, method);
  const IndivisibilityResult g = min_indivisibility(mix, k, method, &d.gammas);
  d.s_max = s.value;
  d.s_max_se = s.std_error;
  d.s_max_provenance = s.provenance;
  d.coupling = c.value;
  d.coupling_se = c.std_error;
  d.coupling_provenance = c.provenance;
  d.gamma = g.value;
  d.gamma_provenance = g.provenance;
  d.w_min = mix.w_min();
  d.b_max = b_max(mix, k, method);
  d.phi = d.recompute_phi();
  return d;
}

/// phi + (1/Gamma^2)(1/sqrt(n) + delta).
inline double phi_n(const Diagnostics& d, std::size_t n, double delta) {
  if (n < 1) fail(ErrorKind::BadParameter, "n must be positive");
  if (delta < 0.0) fail(ErrorKind::BadParameter, "delta must be nonnegative");
  return d.phi + (1.0 / std::sqrt(static_cast<double>(n)) + delta) / (d.gamma * d.gamma);
}

/// Whether phi_n(delta) <= c Gamma^2.
inline bool phi_n_condition(const Diagnostics& d, std::size_t n, double delta, double c) {
  return phi_n(d, n, delta) <= c * d.gamma * d.gamma;
}

enum class TailNorm { squared, unsquared };
enum class TailForm { quadrature, empirical };

/// psi(t) = sum over m of P_m[q_m^2(X) / N_m < t], where N_m is the squared
/// L2(P_m) norm of q_m by default (TailNorm::unsquared divides by the norm
/// itself).
class TailDecay {
 public:
  static TailDecay quadrature(const Mixture& mix, const Kernel& k, TailNorm norm = TailNorm::squared,
                              QuadratureOptions opt = {}) {
    TailDecay t = base(mix, k, norm, opt);
    t.form_ = TailForm::quadrature;
    return t;
  }

  static TailDecay empirical(const Mixture& mix, const Kernel& k, std::span<const LabeledSample> sample,
                             TailNorm norm = TailNorm::squared, QuadratureOptions opt = {}) {
    TailDecay t = base(mix, k, norm, opt);
    t.form_ = TailForm::empirical;
    t.levels_.assign(mix.size(), {});
    for (const LabeledSample& s : sample) {
      if (s.z >= mix.size()) fail(ErrorKind::BadParameter, "sample label out of range");
      t.levels_[s.z].push_back(t.qs_[s.z].squared(s.x) / t.norms_[s.z]);
    }
    for (auto& v : t.levels_) std::sort(v.begin(), v.end());
    return t;
  }

  double operator()(double t) const {
    if (!(t > 0.0)) return 0.0;
    double total = 0.0;
    for (std::size_t m = 0; m < qs_.size(); ++m) total += form_ == TailForm::empirical ? empirical_mass(m, t) : mass(m, t);
    return total;
  }

  TailForm form() const noexcept { return form_; }
  double norm(std::size_t m) const { return norms_.at(m); }

 private:
  static TailDecay base(const Mixture& mix, const Kernel& k, TailNorm norm, const QuadratureOptions& opt) {
    require_population_kernel(k);
    TailDecay t;
    t.mix_ = mix;
    t.qs_ = component_densities(mix, k, DensityMethod::automatic, opt);
    for (std::size_t m = 0; m < mix.size(); ++m) {
      const Component& c = mix.components[m];
      const auto qb = t.qs_[m].breakpoints();
      const double sq = detail::expect(
          c, [&](double x) { return t.qs_[m].squared(x); }, qb, integration_step(k, c, opt), opt.order);
      t.norms_.push_back(norm == TailNorm::squared ? sq : std::sqrt(sq));
    }
    return t;
  }

  double empirical_mass(std::size_t m, double t) const {
    const auto& v = levels_[m];
    if (v.empty()) return 0.0;
    const auto below = std::lower_bound(v.begin(), v.end(), t) - v.begin();
    return static_cast<double>(below) / static_cast<double>(v.size());
  }

  // Mass of {x : q_m^2(x) < t N_m}: locate the level crossings on a fine
  // scan, bisect each, and add up component masses of the sublevel pieces.
  double mass(std::size_t m, double t) const {
    const Component& c = mix_.components[m];
    const KernelizedDensity& q = qs_[m];
    const double level = t * norms_[m];
    const Interval sup = c.support();
    const double pad = std::max(q.kernel().reach(), 4.0 * sup.length());
    const double lo = sup.lo - pad;
    const double hi = sup.hi + pad;
    constexpr std::size_t scan = 4001;
    auto g = [&](double x) { return q.squared(x) - level; };
    std::vector<double> cuts{-std::numeric_limits<double>::infinity()};
    double prev_x = lo;
    double prev_g = g(lo);
    for (std::size_t i = 1; i < scan; ++i) {
      const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(scan - 1);
      const double gx = g(x);
      if ((prev_g < 0.0) != (gx < 0.0)) {
        double a = prev_x, b = x;
        const bool a_below = prev_g < 0.0;
        for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
          const double mid = 0.5 * (a + b);
          if ((g(mid) < 0.0) == a_below)
            a = mid;
          else
            b = mid;
        }
        cuts.push_back(0.5 * (a + b));
      }
      prev_x = x;
      prev_g = gx;
    }
    cuts.push_back(std::numeric_limits<double>::infinity());
    double total = 0.0;
    bool below = g(lo) < 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      if (below) {
        const double a = cuts[i], b = cuts[i + 1];
        if (std::isinf(a) && std::isinf(b))
          total += 1.0;
        else if (std::isinf(a))
          total += c.cdf(b);
        else if (std::isinf(b))
          total += c.survival(a);
        else
          total += c.mass(a, b);
      }
      below = !below;
    }
    return std::min(1.0, total);
  }

  Mixture mix_;
  std::vector<KernelizedDensity> qs_;
  std::vector<double> norms_;
  std::vector<std::vector<double>> levels_;
  TailForm form_ = TailForm::quadrature;
};

inline TailDecay tail_decay(const Mixture& mix, const Kernel& k, TailNorm norm = TailNorm::squared) {
  return TailDecay::quadrature(mix, k, norm);
}

}  // namespace specgeo
