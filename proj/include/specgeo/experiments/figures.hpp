#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "specgeo/cluster.hpp"
#include "specgeo/density.hpp"
#include "specgeo/embedding.hpp"
#include "specgeo/experiments/config.hpp"
#include "specgeo/experiments/csv.hpp"
#include "specgeo/experiments/parallel.hpp"
#include "specgeo/experiments/svg.hpp"
#include "specgeo/mixture.hpp"
#include "specgeo/numerics/stats.hpp"
#include "specgeo/params.hpp"
#include "specgeo/popoperator.hpp"

namespace specgeo::experiments {

struct Check {
  std::string name;
  bool ok = false;
  std::string detail;
};

struct Artifact {
  std::string name;
  std::string content;
};

struct FigureResult {
  std::vector<Artifact> files;
  std::vector<Check> checks;

  void append(FigureResult other) {
    for (auto& f : other.files) files.push_back(std::move(f));
    for (auto& c : other.checks) checks.push_back(std::move(c));
  }
  bool ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.ok; });
  }
};

inline const std::vector<std::string> kFigureNames = {"triangular-density", "coupling", "rho-linearity", "tail-decay",
                                                      "embedding-ocs"};

inline CsvTable make_table(const std::string& what, const RunConfig& cfg, std::vector<std::string> columns) {
  CsvTable t(std::move(columns));
  t.comment("specgeo " + what + " config=" + config_hash(cfg) + " seed=" + std::to_string(cfg.seed));
  return t;
}

inline std::string fmt(double v) { return format_double(v); }

// Plots are built from the table as written, so the SVG depends on nothing
// but the CSV content.
inline SvgPlot plot_columns(const CsvTable& table, std::size_t xcol, const std::vector<std::size_t>& ycols) {
  const CsvData data = parse_csv(table.str());
  SvgPlot p;
  auto col = [&](std::size_t j) {
    std::vector<double> v;
    for (const auto& r : data.rows) v.push_back(std::stod(r[j]));
    return v;
  };
  const auto xs = col(xcol);
  for (std::size_t j : ycols) p.series.push_back({data.columns[j], xs, col(j), SeriesStyle::line});
  p.xlabel = data.columns[xcol];
  return p;
}

inline FigureResult fig_triangular_density(const RunConfig& cfg) {
  const double nu = cfg.triangular_nu;
  if (!(nu > 0.0 && nu < 1.0)) fail(ErrorKind::BadConfig, "triangular nu must lie in (0, 1)");
  const Kernel k = Kernel::uniform_box(nu);
  const auto q = KernelizedDensity::make(k, Component::triangular(0.0), DensityMethod::quadrature);
  const double half = 1.0 + 4.0 * nu;
  const QuadratureGrid grid = make_grid({-half, half}, cfg.triangular_nodes, QuadratureRule::trapezoid);

  CsvTable t = make_table("triangular-density", cfg, {"x", "q1_sq_closed", "q1_sq_quadrature", "q1_sq_published"});
  double sup = 0.0;
  double sup_published = 0.0;
  for (double x : grid.nodes) {
    const double closed = triangular_box_q2(x, 0.0, nu);
    const double quad = q.squared(x);
    const double published = triangular_box_q2_published(x, 0.0, nu);
    sup = std::max(sup, std::abs(closed - quad));
    sup_published = std::max(sup_published, std::abs(published - quad));
    t.add_row(std::vector<double>{x, closed, quad, published});
  }
  t.footer("sup|closed - quadrature| = " + fmt(sup));
  t.footer("sup|published - quadrature| = " + fmt(sup_published));

  SvgPlot p = plot_columns(t, 0, {1, 2});
  p.title = "kernelized density of T(0), box kernel nu=" + fmt(nu);
  p.ylabel = "q1^2(x)";
  FigureResult r;
  r.files.push_back({"triangular_density.csv", t.str()});
  r.files.push_back({"triangular_density.svg", p.render()});
  r.checks.push_back({"triangular-density: quadrature matches closed form within 1e-6", sup <= 1e-6, "sup=" + fmt(sup)});
  return r;
}

struct CouplingPoint {
  double mu = 0.0;
  Estimate mc;
  double quadrature = 0.0;
  double bound = 0.0;
};

inline FigureResult fig_coupling(const RunConfig& cfg) {
  const auto& mus = cfg.coupling_mu;
  const auto pts = parallel_map<CouplingPoint>(mus.size(), cfg.jobs, [&](std::size_t i) {
    const Preset p = gaussian_pair(mus[i], cfg.coupling_nu);
    CouplingPoint c;
    c.mu = mus[i];
    c.mc = coupling(p.mixture, p.kernel, ParamMethod::monte_carlo(cfg.coupling_samples, derive_seed(cfg.seed, i)));
    c.quadrature = coupling(p.mixture, p.kernel).value;
    c.bound = closed_form::gaussian_pair_coupling_bound(mus[i], cfg.coupling_nu);
    return c;
  });
  CsvTable t = make_table("coupling", cfg, {"mu", "coupling_mc", "coupling_se", "analytic_style_bound", "coupling_quadrature"});
  bool decreasing = true;
  bool below = true;
  std::string where;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& c = pts[i];
    t.add_row(std::vector<double>{c.mu, c.mc.value, c.mc.std_error, c.bound, c.quadrature});
    if (i > 0 && !(c.mc.value < pts[i - 1].mc.value)) decreasing = false;
    if (!(c.mc.value <= c.bound)) {
      below = false;
      where += " mu=" + fmt(c.mu);
    }
  }
  SvgPlot p = plot_columns(t, 0, {1, 3, 4});
  p.log_y = true;
  p.title = "coupling vs offset, gaussian pair, nu=" + fmt(cfg.coupling_nu);
  p.ylabel = "C";
  FigureResult r;
  r.files.push_back({"coupling.csv", t.str()});
  r.files.push_back({"coupling.svg", p.render()});
  r.checks.push_back({"coupling: Monte Carlo estimate decreases in mu", decreasing, ""});
  r.checks.push_back({"coupling: Monte Carlo estimate below analytic bound", below, where});
  return r;
}

struct SweepPoint {
  double mu = 0.0;
  Theorem1Report theorem;
  LemmaReport lemma;
  double lambda1 = 0.0;
};

/// Population quantities for gaussian_pair(mu, sweep_nu) at every sweep mu.
inline std::vector<SweepPoint> population_sweep(const RunConfig& cfg) {
  const auto& mus = cfg.sweep_mu;
  return parallel_map<SweepPoint>(mus.size(), cfg.jobs, [&](std::size_t i) {
    const Preset p = gaussian_pair(mus[i], cfg.sweep_nu);
    PopulationCheckOptions opt;
    opt.grid_nodes = cfg.grid_nodes;
    const Diagnostics d = difficulty(p.mixture, p.kernel, opt.params);
    const PopulationAnalysis a = analyze_population(p.mixture, p.kernel, opt);
    SweepPoint s;
    s.mu = mus[i];
    s.theorem = theorem1_check(p.mixture, p.kernel, d, a);
    s.lemma = lemma_checks(p.mixture, d, a);
    s.lambda1 = a.op.values()[0];
    return s;
  });
}

inline FigureResult fig_rho_linearity(const RunConfig& cfg, const std::vector<SweepPoint>& sweep) {
  CsvTable t = make_table("rho-linearity", cfg,
                          {"mu", "s_max", "coupling", "overlap", "gamma", "phi", "rho", "bound", "hypothesis_ok"});
  std::vector<double> xs, ys;
  bool within = true;
  for (const auto& s : sweep) {
    const auto& d = s.theorem.diagnostics;
    const double overlap = d.s_max + d.coupling;
    xs.push_back(overlap);
    ys.push_back(s.theorem.rho);
    within = within && s.theorem.holds;
    t.add_row(std::vector<std::string>{fmt(s.mu), fmt(d.s_max), fmt(d.coupling), fmt(overlap), fmt(d.gamma), fmt(d.phi),
                                       fmt(s.theorem.rho), fmt(s.theorem.bound), s.theorem.hypothesis_ok ? "1" : "0"});
  }
  const LinearFit fit = linear_fit(xs, ys);
  t.footer("fit rho ~ overlap: slope=" + fmt(fit.slope) + " intercept=" + fmt(fit.intercept) + " r2=" + fmt(fit.r2));

  SvgPlot p;
  {
    const CsvData data = parse_csv(t.str());
    std::vector<double> ox, oy;
    for (const auto& r : data.rows) {
      ox.push_back(std::stod(r[3]));
      oy.push_back(std::stod(r[6]));
    }
    p.series.push_back({"rho", ox, oy, SeriesStyle::points});
    const double lo = *std::min_element(ox.begin(), ox.end());
    const double hi = *std::max_element(ox.begin(), ox.end());
    p.series.push_back({"least squares", {lo, hi}, {fit.intercept + fit.slope * lo, fit.intercept + fit.slope * hi}});
  }
  p.title = "subspace distance vs S + C, gaussian pair, nu=" + fmt(cfg.sweep_nu);
  p.xlabel = "S_max + C";
  p.ylabel = "rho(Q, R)";
  FigureResult r;
  r.files.push_back({"rho_linearity.csv", t.str()});
  r.files.push_back({"rho_linearity.svg", p.render()});
  r.checks.push_back({"rho-linearity: least-squares R^2 >= 0.95", fit.r2 >= 0.95, "r2=" + fmt(fit.r2)});
  r.checks.push_back({"rho-linearity: rho within the population bound where its hypothesis holds", within, ""});
  return r;
}

inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i)
    t[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
  return t;
}

inline FigureResult fig_tail_decay(const RunConfig& cfg) {
  const Mixture standard = Mixture::make({Component::gaussian(0.0, 1.0)}, {1.0});
  const auto ts = log_grid(cfg.tail_t_min, cfg.tail_t_max, cfg.tail_points);
  const auto& nus = cfg.tail_bandwidths;
  const auto curves = parallel_map<std::vector<double>>(nus.size(), cfg.jobs, [&](std::size_t j) {
    const TailDecay psi = TailDecay::quadrature(standard, Kernel::gaussian(nus[j]));
    std::vector<double> v;
    for (double t : ts) v.push_back(psi(t));
    return v;
  });
  std::vector<std::string> cols = {"t"};
  for (double nu : nus) cols.push_back("psi_nu_" + fmt(nu));
  CsvTable t = make_table("tail-decay", cfg, cols);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    std::vector<double> row = {ts[i]};
    for (const auto& c : curves) row.push_back(c[i]);
    t.add_row(row);
  }
  FigureResult r;
  for (std::size_t j = 0; j < nus.size(); ++j) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < ts.size(); ++i)
      if (curves[j][i] > 0.0) {
        lx.push_back(std::log(ts[i]));
        ly.push_back(std::log(curves[j][i]));
      }
    LinearFit fit;
    if (lx.size() >= 2) fit = linear_fit(lx, ly);
    t.footer("nu=" + fmt(nus[j]) + " log-log slope=" + fmt(fit.slope) + " r2=" + fmt(fit.r2));
    r.checks.push_back({"tail-decay: log-log fit R^2 >= 0.98 at nu=" + fmt(nus[j]), fit.r2 >= 0.98, "r2=" + fmt(fit.r2)});
  }
  std::vector<std::size_t> ycols(nus.size());
  for (std::size_t j = 0; j < nus.size(); ++j) ycols[j] = j + 1;
  SvgPlot p = plot_columns(t, 0, ycols);
  p.log_x = p.log_y = true;
  p.title = "tail decay of N(0,1) under gaussian kernels";
  p.ylabel = "psi(t)";
  r.files.insert(r.files.begin(), {"tail_decay.svg", p.render()});
  r.files.insert(r.files.begin(), {"tail_decay.csv", t.str()});
  return r;
}

/// Three isotropic gaussian blobs with centres on a circle, equal weights.
inline std::pair<Matrix, std::vector<std::size_t>> three_blobs(std::size_t n, double radius, double sd, Rng& rng) {
  Matrix x(static_cast<Eigen::Index>(n), 2);
  std::vector<std::size_t> z(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t m = rng.below(3);
    const double a = 2.0 * std::numbers::pi * static_cast<double>(m) / 3.0;
    z[i] = m;
    x(static_cast<Eigen::Index>(i), 0) = radius * std::cos(a) + sd * rng.gaussian();
    x(static_cast<Eigen::Index>(i), 1) = radius * std::sin(a) + sd * rng.gaussian();
  }
  return {x, z};
}

inline CsvTable embedding_table(const std::string& what, const RunConfig& cfg, const EmbeddedDataset& e,
                                const std::vector<std::size_t>& labels) {
  std::vector<std::string> cols;
  for (Eigen::Index j = 0; j < e.dim(); ++j) cols.push_back("phi_" + std::to_string(j + 1));
  cols.push_back("label");
  CsvTable t = make_table(what, cfg, cols);
  std::string ev = "eigenvalues";
  for (Eigen::Index j = 0; j < e.eigenvalues.size(); ++j) ev += " " + fmt(e.eigenvalues[j]);
  t.comment(ev);
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    std::vector<std::string> row;
    for (Eigen::Index j = 0; j < e.dim(); ++j) row.push_back(fmt(e.points(i, j)));
    row.push_back(std::to_string(labels[static_cast<std::size_t>(i)]));
    t.add_row(std::move(row));
  }
  return t;
}

inline SvgPlot scatter_by_label(const CsvTable& t, std::size_t xcol, std::size_t ycol, std::size_t label_col) {
  const CsvData data = parse_csv(t.str());
  std::size_t K = 0;
  for (const auto& r : data.rows) K = std::max<std::size_t>(K, std::stoul(r[label_col]) + 1);
  SvgPlot p;
  p.series.resize(K);
  for (std::size_t m = 0; m < K; ++m) {
    p.series[m].name = "label " + std::to_string(m);
    p.series[m].style = SeriesStyle::points;
  }
  for (const auto& r : data.rows) {
    auto& s = p.series[std::stoul(r[label_col])];
    s.x.push_back(std::stod(r[xcol]));
    s.y.push_back(std::stod(r[ycol]));
  }
  p.xlabel = data.columns[xcol];
  p.ylabel = data.columns[ycol];
  return p;
}

struct OcsSummary {
  double alpha = 1.0;
  double orthogonal_fraction = 0.0;
  double kmeans_misclustering = 1.0;
  std::size_t kmeans_iterations = 0;
};

inline OcsSummary ocs_summary(const EmbeddedDataset& e, const std::vector<std::size_t>& labels, const RunConfig& cfg,
                              std::uint64_t stream) {
  OcsSummary s;
  s.alpha = ocs_search(e.points, labels, cfg.ocs_theta).alpha;
  Rng tuples(derive_seed(cfg.seed, stream));
  s.orthogonal_fraction = theta_orthogonal_fraction(e.points, labels, cfg.orth_theta, cfg.orth_tuples, tuples);
  Rng init(derive_seed(cfg.seed, stream + 1));
  const KMeansResult km = kmeans_run(e.points, e.dim(), init);
  s.kmeans_misclustering = misclustering(km.assignments, labels);
  s.kmeans_iterations = km.n_iterations;
  return s;
}

/// The K=2 gaussian pair embedding behind the finite-sample OCS check.
inline std::pair<EmbeddedDataset, std::vector<double>> gaussian_pair_embedding(const RunConfig& cfg) {
  const Preset p = gaussian_pair(cfg.embed_mu, cfg.embed_nu);
  Rng rng(cfg.seed);
  const auto sample = p.mixture.sample(cfg.embed_n, rng);
  std::vector<double> x;
  std::vector<std::size_t> z;
  for (const auto& s : sample) {
    x.push_back(s.x);
    z.push_back(s.z);
  }
  EmbeddedDataset e = embed(std::span<const double>(x), Kernel::regularized(p.kernel, cfg.embed_offset), 2);
  e.labels = std::move(z);
  e.source_seed = cfg.seed;
  return {std::move(e), std::move(x)};
}

inline FigureResult fig_embedding_ocs(const RunConfig& cfg) {
  if (cfg.embed_n > 3000 || cfg.blobs_n > 3000) fail(ErrorKind::BadConfig, "embedding runs are limited to n <= 3000");
  FigureResult r;
  CsvTable summary = make_table("embedding-ocs", cfg,
                                {"case", "n", "K", "alpha", "theta", "orthogonal_fraction", "orth_theta",
                                 "kmeans_misclustering", "kmeans_iterations", "eigengap_warning"});

  {
    const auto [e, x] = gaussian_pair_embedding(cfg);
    CsvTable input = make_table("embedding-ocs gaussian_pair input", cfg, {"x", "label"});
    for (std::size_t i = 0; i < x.size(); ++i) input.add_row({fmt(x[i]), std::to_string(e.labels[i])});
    const CsvTable emb = embedding_table("embedding-ocs gaussian_pair embedding", cfg, e, e.labels);
    const OcsSummary s = ocs_summary(e, e.labels, cfg, 1);
    summary.add_row({"gaussian_pair", std::to_string(cfg.embed_n), "2", fmt(s.alpha), fmt(cfg.ocs_theta),
                     fmt(s.orthogonal_fraction), fmt(cfg.orth_theta), fmt(s.kmeans_misclustering),
                     std::to_string(s.kmeans_iterations), e.eigengap_collapse ? "1" : "0"});
    SvgPlot p = scatter_by_label(emb, 0, 1, 2);
    p.title = "embedding of gaussian pair sample, n=" + std::to_string(cfg.embed_n);
    r.files.push_back({"embedding_k2_input.csv", input.str()});
    r.files.push_back({"embedding_k2.csv", emb.str()});
    r.files.push_back({"embedding_k2.svg", p.render()});
    r.checks.push_back({"embedding-ocs: alpha <= 0.05 at theta=" + fmt(cfg.ocs_theta), s.alpha <= 0.05, "alpha=" + fmt(s.alpha)});
    r.checks.push_back({"embedding-ocs: theta-orthogonal pair fraction >= 0.95", s.orthogonal_fraction >= 0.95,
                        "fraction=" + fmt(s.orthogonal_fraction)});
  }
  {
    Rng rng(derive_seed(cfg.seed, 10));
    const auto [x, z] = three_blobs(cfg.blobs_n, cfg.blobs_radius, cfg.blobs_sd, rng);
    EmbeddedDataset e = embed(x, Kernel::gaussian(cfg.blobs_nu, cfg.blobs_offset), 3);
    e.labels = z;
    e.source_seed = cfg.seed;
    CsvTable input = make_table("embedding-ocs three_blobs input", cfg, {"x", "y", "label"});
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      input.add_row({fmt(x(i, 0)), fmt(x(i, 1)), std::to_string(z[static_cast<std::size_t>(i)])});
    const CsvTable emb = embedding_table("embedding-ocs three_blobs embedding", cfg, e, z);
    const OcsSummary s = ocs_summary(e, z, cfg, 11);
    summary.add_row({"three_blobs", std::to_string(cfg.blobs_n), "3", fmt(s.alpha), fmt(cfg.ocs_theta),
                     fmt(s.orthogonal_fraction), fmt(cfg.orth_theta), fmt(s.kmeans_misclustering),
                     std::to_string(s.kmeans_iterations), e.eigengap_collapse ? "1" : "0"});
    SvgPlot pin = scatter_by_label(input, 0, 1, 2);
    pin.title = "three gaussian blobs";
    SvgPlot p12 = scatter_by_label(emb, 1, 2, 3);
    p12.title = "embedding of three blobs, second and third coordinates";
    r.files.push_back({"embedding_k3_input.csv", input.str()});
    r.files.push_back({"embedding_k3_input.svg", pin.render()});
    r.files.push_back({"embedding_k3.csv", emb.str()});
    r.files.push_back({"embedding_k3.svg", p12.render()});
    r.checks.push_back({"embedding-ocs: three-blob embedding has 3 columns", emb.columns().size() == 4, ""});
  }
  r.files.insert(r.files.begin(), {"embedding_ocs_summary.csv", summary.str()});
  return r;
}

inline FigureResult params_table(const RunConfig& cfg) {
  const Preset p = cfg.mixture.build(cfg.kernel);
  const Diagnostics d = difficulty(p.mixture, p.kernel);
  CsvTable t = make_table("params " + p.name + " kernel=" + p.kernel.name(), cfg,
                          {"K", "s_max", "s_max_se", "coupling", "coupling_se", "gamma", "w_min", "b_max", "phi",
                           "s_max_provenance", "coupling_provenance", "gamma_provenance", "b_max_provenance"});
  t.add_row({std::to_string(d.K), fmt(d.s_max), fmt(d.s_max_se), fmt(d.coupling), fmt(d.coupling_se), fmt(d.gamma),
             fmt(d.w_min), fmt(d.b_max), fmt(d.phi), std::string(to_string(d.s_max_provenance)),
             std::string(to_string(d.coupling_provenance)), std::string(to_string(d.gamma_provenance)),
             std::string(to_string(d.b_max_provenance))});
  std::string gammas = "component gammas";
  for (double g : d.gammas) gammas += " " + fmt(g);
  t.footer(gammas);
  FigureResult r;
  r.files.push_back({"params.csv", t.str()});
  return r;
}

struct CheegerCase {
  std::string name;
  Component component;
  Kernel kernel;
};

inline std::vector<CheegerCase> cheeger_cases(const RunConfig& cfg) {
  return {
      {"N(0,1) gaussian nu=" + fmt(cfg.sweep_nu), Component::gaussian(0.0, 1.0), Kernel::gaussian(cfg.sweep_nu)},
      {"N(0,1) gaussian nu=1", Component::gaussian(0.0, 1.0), Kernel::gaussian(1.0)},
      {"T(0) box nu=0.5", Component::triangular(0.0), Kernel::uniform_box(0.5)},
      {"T(0)/T(4) blend box nu=0.05",
       Component::composite({Component::triangular(0.0), Component::triangular(4.0)}, {0.5, 0.5}),
       Kernel::uniform_box(0.05)},
  };
}

/// Theorem, lemma and Cheeger reports over the population sweep.
inline FigureResult check_suite(const RunConfig& cfg, const std::vector<SweepPoint>& sweep) {
  FigureResult r;
  CsvTable t = make_table("population checks", cfg,
                          {"mu", "rho", "theorem1_bound", "hypothesis_ok", "hs_G", "hs_G_bound", "sigma_min_A",
                           "sigma_min_A_bound", "sigma_max_B", "sigma_max_B_bound", "sep", "sep_bound", "lambda1"});
  std::size_t theorem_bad = 0, lemma_bad = 0;
  for (const auto& s : sweep) {
    const auto& l = s.lemma;
    t.add_row(std::vector<std::string>{fmt(s.mu), fmt(s.theorem.rho), fmt(s.theorem.bound), s.theorem.hypothesis_ok ? "1" : "0",
                                       fmt(l.hs_G), fmt(l.hs_G_bound), fmt(l.sigma_min_A), fmt(l.sigma_min_A_bound),
                                       fmt(l.sigma_max_B), fmt(l.sigma_max_B_bound), fmt(l.sep), fmt(l.sep_bound),
                                       fmt(s.lambda1)});
    if (!s.theorem.holds) ++theorem_bad;
    if (!(l.hs_ok && l.a_ok && l.b_ok && l.sep_ok)) ++lemma_bad;
  }
  r.files.push_back({"population_checks.csv", t.str()});
  r.checks.push_back({"check: population bound holds wherever its hypothesis holds", theorem_bad == 0,
                      std::to_string(theorem_bad) + " violations"});
  r.checks.push_back({"check: Hilbert-Schmidt and separation bounds", lemma_bad == 0, std::to_string(lemma_bad) + " violations"});

  const auto cases = cheeger_cases(cfg);
  const auto reports = parallel_map<CheegerReport>(cases.size(), cfg.jobs, [&](std::size_t i) {
    return cheeger_check(cases[i].component, cases[i].kernel, cfg.grid_nodes);
  });
  CsvTable c = make_table("cheeger", cfg, {"case", "gamma", "lambda2", "lower", "upper", "holds"});
  std::size_t cheeger_bad = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& rep = reports[i];
    c.add_row({cases[i].name, fmt(rep.gamma), fmt(rep.lambda2), fmt(rep.lower), fmt(rep.upper), rep.holds ? "1" : "0"});
    if (!rep.holds) ++cheeger_bad;
  }
  r.files.push_back({"cheeger.csv", c.str()});
  r.checks.push_back({"check: Cheeger sandwich for single components", cheeger_bad == 0, std::to_string(cheeger_bad) + " violations"});
  return r;
}

inline FigureResult run_figure(const std::string& name, const RunConfig& cfg) {
  if (name == "triangular-density") return fig_triangular_density(cfg);
  if (name == "coupling") return fig_coupling(cfg);
  if (name == "rho-linearity") return fig_rho_linearity(cfg, population_sweep(cfg));
  if (name == "tail-decay") return fig_tail_decay(cfg);
  if (name == "embedding-ocs") return fig_embedding_ocs(cfg);
  fail(ErrorKind::BadConfig, "unknown figure '" + name + "'");
}

}  // namespace specgeo::experiments
