// Acceptance run: one PASS/FAIL line per criterion, optionally a single one
// with --only N. Lines starting with "info" are diagnostics, not verdicts.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cluster_suite.hpp"
#include "json.hpp"
#include "numerics_suite.hpp"
#include "specgeo/specgeo.hpp"
#include "specgeo/experiments/figures.hpp"
#include "specgeo/experiments/report.hpp"

using namespace specgeo;
using namespace specgeo::experiments;

namespace {

constexpr double pi = std::numbers::pi;

struct Verdict {
  bool pass = false;
  std::string detail;
};

template <class... Args>
void info(const char* fmt, Args... args) {
  std::printf("info    ");
  std::printf(fmt, args...);
  std::printf("\n");
}

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

std::vector<double> range(double lo, double hi, double step) {
  std::vector<double> v;
  for (int i = 0; lo + i * step <= hi + 1e-9; ++i) v.push_back(lo + i * step);
  return v;
}

// Population sweep shared by criteria 4 to 6.
const std::vector<SweepPoint>& sweep() {
  static const std::vector<SweepPoint> points = [] {
    RunConfig cfg;
    cfg.sweep_nu = 2.0;
    cfg.sweep_mu = range(5.0, 12.0, 1.0);
    cfg.jobs = 4;
    return population_sweep(cfg);
  }();
  return points;
}

Verdict criterion1() {
  double worst = 0.0;
  bool exact = false;
  for (double nu : {0.5, 1.0, 2.0}) {
    const double scan = indivisibility(Component::gaussian(3.0, 1.0), Kernel::gaussian(nu)).value;
    const double closed = 2.0 / pi * std::atan(nu * std::sqrt(2.0 + nu * nu));
    worst = std::max(worst, rel_err(scan, closed));
    info("nu=%g scan=%.10f closed=%.10f", nu, scan, closed);
    if (nu == 1.0) exact = std::abs(closed - 2.0 / 3.0) < 1e-15 && rel_err(scan, 2.0 / 3.0) <= 1e-3;
  }
  return {worst <= 1e-3 && exact, "max relative error " + std::to_string(worst)};
}

Verdict criterion2() {
  const double nu = 2.0;
  double worst_quad = 0.0, worst_z = 0.0;
  for (double mu : range(2.0, 12.0, 1.0)) {
    const Preset p = gaussian_pair(mu, nu);
    const double closed = closed_form::gaussian_pair_s_max(mu, nu);
    const double quad = s_max(p.mixture, p.kernel).value;
    const Estimate mc = s_max(p.mixture, p.kernel, ParamMethod::monte_carlo(1'000'000, derive_seed(42, 100 + mu)));
    worst_quad = std::max(worst_quad, rel_err(quad, closed));
    worst_z = std::max(worst_z, std::abs(mc.value - closed) / mc.std_error);
  }
  info("gaussian pair: max relative error %.3g, max |mc - closed| / se %.3g", worst_quad, worst_z);

  double worst_tri = 0.0, worst_corrected = 0.0;
  std::size_t valid = 0, total = 0;
  for (double tnu : {0.05, 0.5})
    for (double mu : range(1.0, 2.2, 0.1)) {
      const Preset p = triangular_pair(mu, tnu);
      const double quad = s_max(p.mixture, p.kernel).value;
      const double published = closed_form::triangular_pair_s_max_published(mu, tnu);
      const double err = quad == 0.0 && published == 0.0 ? 0.0 : std::abs(quad - published) / std::max(std::abs(published), 1e-300);
      worst_tri = std::max(worst_tri, err);
      ++total;
      if (closed_form::triangular_pair_s_max_valid(mu, tnu)) {
        ++valid;
        const double corrected = closed_form::triangular_pair_s_max(mu, tnu);
        if (corrected > 0.0) worst_corrected = std::max(worst_corrected, rel_err(quad, corrected));
      }
    }
  info("triangular pair, printed formula: max relative error %.3g over %zu points", worst_tri, total);
  info("triangular pair, corrected denominator: max relative error %.3g over the %zu points where it applies",
       worst_corrected, valid);
  const bool pass = worst_quad <= 1e-3 && worst_z <= 3.0 && worst_tri <= 1e-3;
  return {pass, "gaussian " + std::string(worst_quad <= 1e-3 && worst_z <= 3.0 ? "ok" : "off") +
                    ", triangular printed formula rel err " + std::to_string(worst_tri)};
}

Verdict criterion3() {
  const double nu = 0.05;
  const auto q = KernelizedDensity::make(Kernel::uniform_box(nu), Component::triangular(0.0), DensityMethod::quadrature);
  const QuadratureGrid grid = make_grid({-1.0 - 4.0 * nu, 1.0 + 4.0 * nu}, 601, QuadratureRule::trapezoid);
  double sup_published = 0.0, sup_corrected = 0.0;
  for (double x : grid.nodes) {
    const double quad = q.squared(x);
    sup_published = std::max(sup_published, std::abs(quad - triangular_box_q2_published(x, 0.0, nu)));
    sup_corrected = std::max(sup_corrected, std::abs(quad - triangular_box_q2(x, 0.0, nu)));
  }
  info("sup-norm against the printed piecewise form %.3g, against the form with its edge branches exchanged %.3g",
       sup_published, sup_corrected);
  return {sup_published <= 1e-6, "sup-norm " + std::to_string(sup_published)};
}

Verdict criterion4() {
  std::size_t tested = 0, violations = 0;
  for (const auto& s : sweep()) {
    if (s.mu < 6.0) continue;
    const auto& t = s.theorem;
    info("mu=%g phi=%.4g threshold=%.4g hypothesis=%d rho=%.4g bound=%.4g", s.mu, t.diagnostics.phi,
         t.hypothesis_threshold, t.hypothesis_ok ? 1 : 0, t.rho, t.bound);
    if (!t.hypothesis_ok) continue;
    ++tested;
    if (!(t.rho <= t.bound)) ++violations;
  }
  return {violations == 0, std::to_string(tested) + " sweep points meet the hypothesis, " + std::to_string(violations) +
                               " violations"};
}

Verdict criterion5() {
  std::vector<double> x, y;
  for (const auto& s : sweep()) {
    x.push_back(s.theorem.diagnostics.s_max + s.theorem.diagnostics.coupling);
    y.push_back(s.theorem.rho);
    info("mu=%g overlap=%.6g rho=%.6g", s.mu, x.back(), y.back());
  }
  const LinearFit fit = linear_fit(x, y);
  return {fit.r2 >= 0.95, "R^2 " + std::to_string(fit.r2)};
}

Verdict criterion6() {
  std::size_t violations = 0;
  for (const auto& s : sweep()) {
    const auto& l = s.lemma;
    if (!(l.hs_ok && l.a_ok && l.b_ok)) {
      ++violations;
      info("mu=%g hs %.4g<=%.4g sigma_min(A) %.4g>=%.4g sigma_max(B) %.4g<=%.4g", s.mu, l.hs_G, l.hs_G_bound,
           l.sigma_min_A, l.sigma_min_A_bound, l.sigma_max_B, l.sigma_max_B_bound);
    }
  }
  RunConfig cfg;
  std::vector<CheegerCase> cases = cheeger_cases(cfg);
  for (double mu : {0.0, 12.0})
    cases.push_back({"sweep component", Component::gaussian(mu, 1.0), Kernel::gaussian(2.0)});
  for (const auto& c : cases) {
    const CheegerReport r = cheeger_check(c.component, c.kernel);
    info("%s: %.4g <= lambda2=%.6g <= %.6g", c.name.c_str(), r.lower, r.lambda2, r.upper);
    if (!r.holds) ++violations;
  }
  return {violations == 0, std::to_string(violations) + " violations"};
}

Verdict criterion7() {
  std::ifstream in(std::string(SPECGEO_FIXTURE_DIR) + "/ocs_pilot.json");
  if (!in) return {false, "fixture missing"};
  const nlohmann::json pilot = nlohmann::json::parse(in);
  RunConfig cfg;
  cfg.seed = pilot.at("seed").get<std::uint64_t>();
  cfg.embed_n = pilot.at("n").get<std::size_t>();
  cfg.embed_mu = pilot.at("mu").get<double>();
  cfg.embed_nu = pilot.at("nu").get<double>();
  cfg.embed_offset = pilot.at("offset").get<double>();
  const auto [e, x] = gaussian_pair_embedding(cfg);
  const double alpha = ocs_search(e.points, e.labels, pilot.at("ocs_theta").get<double>()).alpha;
  Rng tuples(derive_seed(cfg.seed, pilot.at("orth_tuple_stream").get<std::uint64_t>()));
  const double frac = theta_orthogonal_fraction(e.points, e.labels, pilot.at("orth_theta").get<double>(),
                                                pilot.at("orth_tuples").get<std::size_t>(), tuples);
  const bool pass = alpha <= pilot.at("alpha_threshold").get<double>() &&
                    frac >= pilot.at("orthogonal_fraction_threshold").get<double>();
  return {pass, "alpha " + std::to_string(alpha) + ", orthogonal fraction " + std::to_string(frac)};
}

// Fraction of seeded runs whose K-means result misclusters more than
// alpha * n points, plus the number of runs where one mean absorbed nearly
// both clusters.
struct KMeansTrials {
  double failure_fraction = 0.0;
  std::size_t merged = 0;
  bool clouds_certified = true;
};

KMeansTrials kmeans_trials(std::size_t runs, std::size_t per_cluster, double alpha, double theta, std::uint64_t root) {
  struct Run {
    bool cloud_ok = false;
    bool bad = false;
    bool merged = false;
  };
  const auto results = parallel_map<Run>(runs, 4, [&](std::size_t i) {
    Rng cloud_rng(derive_seed(root, 2 * i));
    const auto cloud = testing::ocs_cloud(per_cluster, alpha, theta, cloud_rng);
    Run r;
    r.cloud_ok = ocs_alpha(cloud.points, cloud.labels, cloud.basis, theta).alpha <= alpha + 1e-12;
    Rng init(derive_seed(root, 2 * i + 1));
    const KMeansResult km = kmeans_run(cloud.points, 2, init);
    const double mis = misclustering(km.assignments, cloud.labels);
    r.bad = mis > alpha;
    r.merged = mis >= 0.4;
    return r;
  });
  KMeansTrials t;
  std::size_t bad = 0;
  for (const auto& r : results) {
    bad += r.bad;
    t.merged += r.merged;
    t.clouds_certified = t.clouds_certified && r.cloud_ok;
  }
  t.failure_fraction = static_cast<double>(bad) / static_cast<double>(runs);
  return t;
}

Verdict criterion8() {
  constexpr std::size_t runs = 1000, per_cluster = 500;
  constexpr double alpha = 0.02, theta = pi / 10;
  const std::size_t sizes[] = {per_cluster, per_cluster};
  if (!proposition1_condition(alpha, theta, sizes, 2 * per_cluster)) return {false, "cloud parameters break the condition"};
  const KMeansTrials t = kmeans_trials(runs, per_cluster, alpha, theta, 42);
  const double p0 = 4.0 * theta / (2.0 * pi);
  const double limit = p0 + 3.0 * std::sqrt(p0 * (1.0 - p0) / runs);
  info("%zu of %zu failing runs misclustered at least 40%% of the points", t.merged,
       static_cast<std::size_t>(std::lround(t.failure_fraction * runs)));
  const KMeansTrials tight = kmeans_trials(runs, per_cluster, 0.0, 1e-6, 43);
  info("with alpha=0 and theta=1e-6 the failure fraction is still %.3f (%zu runs misclustered at least 40%%)", tight.failure_fraction,
       tight.merged);
  return {t.clouds_certified && t.failure_fraction <= limit,
          "failure fraction " + std::to_string(t.failure_fraction) + " against limit " + std::to_string(limit)};
}

Verdict criterion9() {
  RunConfig cfg;
  cfg.tail_bandwidths = {0.15, 0.45, 0.75, 1.0, 1.5, 2.5};
  cfg.tail_t_min = 0.05;
  cfg.tail_t_max = 0.8;
  const FigureResult r = fig_tail_decay(cfg);
  for (const auto& c : r.checks) info("%s: %s", c.name.c_str(), c.detail.c_str());
  return {r.ok() && r.checks.size() == cfg.tail_bandwidths.size(), std::to_string(r.checks.size()) + " fits"};
}

Verdict criterion10() {
  RunConfig a;
  a.seed = 42;
  RunConfig b = a;
  b.jobs = 4;
  auto manifest = [](const RunConfig& c) {
    for (const auto& f : report_all(c).files)
      if (f.name == "manifest.json") return f.content;
    return std::string();
  };
  const std::string ma = manifest(a), mb = manifest(b);
  return {!ma.empty() && ma == mb, "manifest hash " + hex64(fnv1a64(ma)) + " vs " + hex64(fnv1a64(mb))};
}

Verdict criterion11() {
  double worst = 0.0;
  std::size_t count = 0;
  for (const Matrix& m : testing::eigen_corpus()) {
    const auto r = testing::eigen_residual(m);
    worst = std::max(worst, r.residual);
    ++count;
  }
  bool orders = true;
  for (double r : testing::halving_ratios(QuadratureRule::trapezoid, [](double x) { return std::exp(x); }, {0.0, 1.0},
                                          std::exp(1.0) - 1.0, 9, 5))
    orders = orders && r >= 3.9;
  for (double r : testing::halving_ratios(QuadratureRule::simpson, [](double x) { return std::sin(x); }, {0.0, 2.0},
                                          1.0 - std::cos(2.0), 9, 4))
    orders = orders && r >= 15.0;
  for (std::size_t order : {2u, 5u, 8u}) {
    const auto& rule = gauss_legendre_rule(order);
    const auto degree = static_cast<int>(2 * order - 2);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * std::pow(rule.nodes[i], degree);
    orders = orders && std::abs(sum - 2.0 / (degree + 1)) <= 1e-14;
  }
  info("%zu matrices, worst relative residual %.3g", count, worst);
  return {count == 200 && worst <= 1e-10 && orders, "worst residual " + std::to_string(worst) +
                                                        (orders ? ", quadrature orders ok" : ", quadrature order check failed")};
}

struct Criterion {
  int id;
  double max_seconds;  // 0 when no runtime bound applies
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  app.add_option("--only", only, "run a single criterion")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all = {
      {1, 10.0, criterion1}, {2, 30.0, criterion2}, {3, 0.0, criterion3},  {4, 0.0, criterion4},
      {5, 120.0, criterion5}, {6, 0.0, criterion6}, {7, 60.0, criterion7}, {8, 0.0, criterion8},
      {9, 0.0, criterion9},  {10, 0.0, criterion10}, {11, 0.0, criterion11},
  };
  bool all_pass = true;
  for (const auto& c : all) {
    if (only && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.max_seconds > 0.0 && secs >= c.max_seconds) {
      v.pass = false;
      v.detail += ", over the runtime limit";
    }
    std::printf("%s criterion %d: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", c.id, v.detail.c_str(), secs);
    std::fflush(stdout);
    all_pass = all_pass && v.pass;
  }
  return all_pass ? 0 : 1;
}
