#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "specgeo/experiments/config.hpp"
#include "specgeo/experiments/csv.hpp"
#include "specgeo/experiments/figures.hpp"

namespace specgeo::experiments {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::BadConfig, "cannot write '" + path.string() + "'");
  out << content;
  if (!out) fail(ErrorKind::BadConfig, "failed while writing '" + path.string() + "'");
}

inline void write_artifacts(const std::filesystem::path& dir, const std::vector<Artifact>& files) {
  for (const auto& f : files) write_file(dir / f.name, f.content);
}

/// Manifest listing each artifact with its FNV-1a hash, plus every check.
inline std::string manifest_json(const RunConfig& cfg, const FigureResult& r) {
  Json m;
  m["config_hash"] = config_hash(cfg);
  m["seed"] = cfg.seed;
  Json files = Json::array();
  std::vector<const Artifact*> sorted;
  for (const auto& f : r.files) sorted.push_back(&f);
  std::sort(sorted.begin(), sorted.end(), [](const Artifact* a, const Artifact* b) { return a->name < b->name; });
  for (const Artifact* f : sorted)
    files.push_back(Json{{"name", f->name}, {"bytes", f->content.size()}, {"fnv1a64", hex64(fnv1a64(f->content))}});
  m["files"] = files;
  Json checks = Json::array();
  for (const auto& c : r.checks) checks.push_back(Json{{"name", c.name}, {"ok", c.ok}, {"detail", c.detail}});
  m["checks"] = checks;
  m["all_checks_passed"] = r.ok();
  m["config"] = to_json(cfg);
  return m.dump(2) + "\n";
}

/// Every figure, the parameter table and the population check suite.
inline FigureResult report_all(const RunConfig& cfg) {
  FigureResult r;
  r.append(params_table(cfg));
  r.append(fig_triangular_density(cfg));
  r.append(fig_coupling(cfg));
  const auto sweep = population_sweep(cfg);
  r.append(fig_rho_linearity(cfg, sweep));
  r.append(check_suite(cfg, sweep));
  r.append(fig_tail_decay(cfg));
  r.append(fig_embedding_ocs(cfg));
  r.files.push_back({"manifest.json", manifest_json(cfg, r)});
  return r;
}

}  // namespace specgeo::experiments
