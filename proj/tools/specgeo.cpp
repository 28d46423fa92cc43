#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "specgeo/experiments/report.hpp"
#include "specgeo/specgeo.hpp"

namespace fs = std::filesystem;
using namespace specgeo;
using namespace specgeo::experiments;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitBadConfig = 2;

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> jobs;
  std::optional<std::size_t> grid_nodes;
};

RunConfig resolve(const GlobalFlags& g) {
  RunConfig cfg = g.config.empty() ? RunConfig{} : load_config(g.config);
  if (g.seed) cfg.seed = *g.seed;
  if (g.out) cfg.out = *g.out;
  if (g.jobs) cfg.jobs = std::max<std::size_t>(1, *g.jobs);
  if (g.grid_nodes) {
    if (*g.grid_nodes < 3) fail(ErrorKind::BadConfig, "--grid-nodes must be at least 3");
    cfg.grid_nodes = *g.grid_nodes;
  }
  return cfg;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::BadConfig, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes under --out when it was given, otherwise to stdout.
void emit(const GlobalFlags& g, const RunConfig& cfg, const std::string& name, const std::string& content) {
  if (g.out) {
    write_file(fs::path(cfg.out) / name, content);
    std::cout << "wrote " << (fs::path(cfg.out) / name).string() << "\n";
  } else {
    std::cout << content;
  }
}

void warn_box(const Kernel& k) {
  if (k.family == KernelFamily::uniform_box)
    std::cerr << "warning: the uniform box kernel is not positive semidefinite and vanishes beyond its bandwidth\n";
}

int report_checks(const FigureResult& r) {
  for (const auto& c : r.checks)
    std::cout << (c.ok ? "[ok]   " : "[FAIL] ") << c.name << (c.detail.empty() ? "" : " (" + c.detail + ")") << "\n";
  return r.ok() ? kExitOk : kExitCheckFailed;
}

int finish_figure(const FigureResult& r, const RunConfig& cfg) {
  write_artifacts(cfg.out, r.files);
  for (const auto& f : r.files) std::cout << "wrote " << (fs::path(cfg.out) / f.name).string() << "\n";
  return report_checks(r);
}

int run_embed(const GlobalFlags& g, const std::string& input, long K, double offset) {
  const RunConfig cfg = resolve(g);
  if (K < 1) fail(ErrorKind::BadConfig, "--K must be positive");
  const Preset preset = cfg.mixture.build(cfg.kernel);
  const Kernel kernel = Kernel::regularized(preset.kernel, offset);
  warn_box(kernel);
  EmbeddedDataset e;
  std::vector<std::size_t> labels;
  if (input.empty()) {
    Rng rng(cfg.seed);
    std::vector<double> x;
    for (const auto& s : preset.mixture.sample(cfg.embed_n, rng)) {
      x.push_back(s.x);
      labels.push_back(s.z);
    }
    e = embed(std::span<const double>(x), kernel, K);
  } else {
    const CsvData d = parse_csv(read_text(input));
    const std::size_t jx = d.index_of("x"), jy = d.index_of("y"), jl = d.index_of("label");
    if (jx == d.columns.size()) fail(ErrorKind::BadConfig, "input CSV needs an 'x' column");
    const bool two_d = jy != d.columns.size();
    Matrix pts(static_cast<Eigen::Index>(d.rows.size()), two_d ? 2 : 1);
    for (std::size_t i = 0; i < d.rows.size(); ++i) {
      pts(static_cast<Eigen::Index>(i), 0) = std::stod(d.rows[i][jx]);
      if (two_d) pts(static_cast<Eigen::Index>(i), 1) = std::stod(d.rows[i][jy]);
      if (jl != d.columns.size()) labels.push_back(std::stoul(d.rows[i][jl]));
    }
    e = embed(pts, kernel, K);
  }
  if (labels.empty()) labels.assign(static_cast<std::size_t>(e.size()), 0);
  e.source_seed = cfg.seed;
  if (e.eigengap_collapse)
    std::cerr << "warning: eigengap collapse, lambda_K=" << format_double(e.eigengap_collapse->first)
              << " lambda_K+1=" << format_double(e.eigengap_collapse->second) << "\n";
  emit(g, cfg, "embedding.csv", embedding_table("embed kernel=" + kernel.name(), cfg, e, labels).str());
  return kExitOk;
}

int run_cluster(const GlobalFlags& g, const std::string& input, double theta) {
  const RunConfig cfg = resolve(g);
  if (input.empty()) fail(ErrorKind::BadConfig, "cluster needs --input <embedding.csv>");
  const CsvData d = parse_csv(read_text(input));
  std::vector<std::size_t> phi;
  for (std::size_t j = 0; j < d.columns.size(); ++j)
    if (d.columns[j].rfind("phi_", 0) == 0) phi.push_back(j);
  if (phi.empty()) fail(ErrorKind::BadConfig, "embedding CSV needs phi_1..phi_K columns");
  const std::size_t jl = d.index_of("label");
  const bool has_labels = jl != d.columns.size();
  Matrix pts(static_cast<Eigen::Index>(d.rows.size()), static_cast<Eigen::Index>(phi.size()));
  std::vector<std::size_t> labels;
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    for (std::size_t j = 0; j < phi.size(); ++j)
      pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::stod(d.rows[i][phi[j]]);
    if (has_labels) labels.push_back(std::stoul(d.rows[i][jl]));
  }
  Rng rng(cfg.seed);
  const KMeansResult km = kmeans_run(pts, pts.cols(), rng);
  if (!km.dropped.empty()) std::cerr << "warning: dropped " << km.dropped.size() << " zero embedded vectors\n";

  CsvTable t = make_table("cluster", cfg, {"index", "assignment", "label", "correct_after_matching"});
  std::string summary = "theta=" + format_double(theta);
  if (has_labels) {
    const auto match = label_matching(km.assignments, labels);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const std::size_t a = km.assignments[i];
      const bool correct = a != kUnassigned && match[a] == labels[i];
      t.add_row({std::to_string(i), a == kUnassigned ? "" : std::to_string(a), std::to_string(labels[i]), correct ? "1" : "0"});
    }
    const OCSCertificate c = ocs_search(pts, labels, theta);
    summary = "alpha=" + format_double(c.alpha) + " " + summary +
              " misclustering=" + format_double(misclustering(km.assignments, labels));
  } else {
    for (std::size_t i = 0; i < km.assignments.size(); ++i) {
      const std::size_t a = km.assignments[i];
      t.add_row({std::to_string(i), a == kUnassigned ? "" : std::to_string(a), "", ""});
    }
  }
  summary += " iterations=" + std::to_string(km.n_iterations);
  t.footer(summary);
  emit(g, cfg, "assignments.csv", t.str());
  (g.out ? std::cout : std::cerr) << summary << "\n";
  return kExitOk;
}

int run_params(const GlobalFlags& g) {
  const RunConfig cfg = resolve(g);
  warn_box(cfg.mixture.build(cfg.kernel).kernel);
  const FigureResult r = params_table(cfg);
  emit(g, cfg, "params.csv", r.files.front().content);
  return kExitOk;
}

int run_figure_cmd(const GlobalFlags& g, const std::string& name) {
  const RunConfig cfg = resolve(g);
  return finish_figure(run_figure(name, cfg), cfg);
}

int run_check(const GlobalFlags& g) {
  const RunConfig cfg = resolve(g);
  return finish_figure(check_suite(cfg, population_sweep(cfg)), cfg);
}

int run_report_all(const GlobalFlags& g) {
  const RunConfig cfg = resolve(g);
  const FigureResult r = report_all(cfg);
  return finish_figure(r, cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral clustering geometry laboratory"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalFlags g;
  app.add_option("--config", g.config, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "root seed");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--jobs", g.jobs, "parallel sweep points");
  app.add_option("--grid-nodes", g.grid_nodes, "operator grid size");

  std::string input;
  long K = 2;
  double offset = 0.0;
  double theta = std::numbers::pi / 8;
  std::string figure_name;

  auto* params = app.add_subcommand("params", "similarity, coupling, indivisibility and difficulty of a mixture");
  auto* embed_cmd = app.add_subcommand("embed", "normalized Laplacian embedding of a points CSV or a fresh sample");
  embed_cmd->add_option("--input", input, "CSV with columns x[,y][,label]");
  embed_cmd->add_option("--K", K, "embedding dimension");
  embed_cmd->add_option("--offset", offset, "constant added to the kernel");
  auto* cluster = app.add_subcommand("cluster", "K-means on an embedding CSV with OCS summary");
  cluster->add_option("--input", input, "embedding CSV with phi_* columns and optional label")->required();
  cluster->add_option("--theta", theta, "cone angle for the OCS certificate");
  auto* rho = app.add_subcommand("rho-sweep", "subspace distance over the gaussian pair sweep");
  auto* tail = app.add_subcommand("tail-decay", "tail decay curves for the configured bandwidths");
  auto* figure = app.add_subcommand("figure", "one named figure");
  figure->add_option("name", figure_name, "figure name")->required()->check(CLI::IsMember(kFigureNames));
  auto* report = app.add_subcommand("report-all", "every figure, parameter table and check, with a manifest");
  auto* check = app.add_subcommand("check", "population bound, lemma and Cheeger checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadConfig;
  }

  try {
    if (*params) return run_params(g);
    if (*embed_cmd) return run_embed(g, input, K, offset);
    if (*cluster) return run_cluster(g, input, theta);
    if (*rho) return run_figure_cmd(g, "rho-linearity");
    if (*tail) return run_figure_cmd(g, "tail-decay");
    if (*figure) return run_figure_cmd(g, figure_name);
    if (*report) return run_report_all(g);
    if (*check) return run_check(g);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadConfig;
  }
  return kExitOk;
}
