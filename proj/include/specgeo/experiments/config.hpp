#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "specgeo/error.hpp"
#include "specgeo/experiments/csv.hpp"
#include "specgeo/kernel.hpp"
#include "specgeo/mixture.hpp"

namespace specgeo::experiments {

using Json = nlohmann::ordered_json;

struct KernelSpec {
  std::string family = "gaussian";  // gaussian | box | linear
  double nu = 2.0;
  double offset = 0.0;

  Kernel build() const {
    Kernel k;
    if (family == "gaussian")
      k = Kernel::gaussian(nu, offset);
    else if (family == "box")
      k = Kernel::uniform_box(nu, offset);
    else if (family == "linear")
      k = Kernel::linear();
    else
      fail(ErrorKind::BadConfig, "unknown kernel family '" + family + "'");
    return k;
  }
};

struct ComponentSpec {
  std::string family = "gaussian";  // gaussian | triangular | uniform
  double mu = 0.0;
  double sigma = 1.0;
  double a = 0.0;
  double b = 1.0;

  Component build() const {
    if (family == "gaussian") return Component::gaussian(mu, sigma);
    if (family == "triangular") return Component::triangular(mu);
    if (family == "uniform") return Component::uniform(a, b);
    fail(ErrorKind::BadConfig, "unknown component family '" + family + "'");
  }
};

/// Either a named preset with its parameters or an explicit component list.
struct MixtureSpec {
  std::string preset = "gaussian_pair";  // empty selects `components`
  double mu = 6.0;
  double nu = 2.0;
  double delta = 0.5;
  std::vector<ComponentSpec> components;
  std::vector<double> weights;

  Preset build(const std::optional<KernelSpec>& kernel) const {
    Preset p;
    if (preset == "gaussian_pair")
      p = gaussian_pair(mu, nu);
    else if (preset == "triangular_pair")
      p = triangular_pair(mu, nu);
    else if (preset == "triangular_bad")
      p = triangular_bad(mu, nu);
    else if (preset == "uniform_linear")
      p = uniform_linear(delta);
    else if (preset.empty()) {
      if (components.empty()) fail(ErrorKind::BadConfig, "mixture needs a preset or a component list");
      std::vector<Component> cs;
      for (const auto& c : components) cs.push_back(c.build());
      std::vector<double> w = weights;
      if (w.empty()) w.assign(cs.size(), 1.0 / static_cast<double>(cs.size()));
      p = {"custom", Mixture::make(std::move(cs), std::move(w)), Kernel::gaussian(nu)};
    } else {
      fail(ErrorKind::BadConfig, "unknown mixture preset '" + preset + "'");
    }
    if (kernel) p.kernel = kernel->build();
    return p;
  }
};

struct RunConfig {
  std::string experiment = "report-all";
  std::uint64_t seed = 42;
  std::size_t grid_nodes = 601;
  std::size_t jobs = 1;
  std::string out = "out";
  MixtureSpec mixture;
  std::optional<KernelSpec> kernel;

  // population sweep over the gaussian_pair offset
  double sweep_nu = 2.0;
  std::vector<double> sweep_mu = {5, 6, 7, 8, 9, 10, 11, 12};

  double triangular_nu = 0.05;
  std::size_t triangular_nodes = 601;

  double coupling_nu = 2.0;
  std::vector<double> coupling_mu = {4, 5, 6, 7, 8, 9, 10, 11, 12};
  std::size_t coupling_samples = 1'000'000;

  std::vector<double> tail_bandwidths = {0.15, 0.45, 0.75, 1.0, 1.5, 2.5};
  double tail_t_min = 0.05;
  double tail_t_max = 0.8;
  std::size_t tail_points = 25;

  std::size_t embed_n = 2000;
  double embed_mu = 6.0;
  double embed_nu = 2.0;
  double embed_offset = 0.05;
  double ocs_theta = 0.39269908169872414;    // pi/8
  double orth_theta = 0.78539816339744831;   // pi/4
  std::size_t orth_tuples = 100'000;
  std::size_t blobs_n = 900;
  double blobs_radius = 4.0;
  double blobs_sd = 1.0;
  double blobs_nu = 1.0;
  double blobs_offset = 0.0;
};

namespace config_detail {

template <class T>
void read(const Json& j, const char* key, T& into) {
  if (j.contains(key)) {
    try {
      into = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::BadConfig, std::string("field '") + key + "': " + e.what());
    }
  }
}

}  // namespace config_detail

inline Json to_json(const KernelSpec& k) { return Json{{"family", k.family}, {"nu", k.nu}, {"offset", k.offset}}; }

inline KernelSpec kernel_from_json(const Json& j) {
  if (!j.is_object()) fail(ErrorKind::BadConfig, "kernel must be an object");
  KernelSpec k;
  config_detail::read(j, "family", k.family);
  config_detail::read(j, "nu", k.nu);
  config_detail::read(j, "offset", k.offset);
  return k;
}

inline Json to_json(const MixtureSpec& m) {
  Json j{{"preset", m.preset}, {"mu", m.mu}, {"nu", m.nu}, {"delta", m.delta}};
  Json comps = Json::array();
  for (const auto& c : m.components)
    comps.push_back(Json{{"family", c.family}, {"mu", c.mu}, {"sigma", c.sigma}, {"a", c.a}, {"b", c.b}});
  j["components"] = comps;
  j["weights"] = m.weights;
  return j;
}

inline MixtureSpec mixture_from_json(const Json& j) {
  if (!j.is_object()) fail(ErrorKind::BadConfig, "mixture must be an object");
  MixtureSpec m;
  config_detail::read(j, "preset", m.preset);
  config_detail::read(j, "mu", m.mu);
  config_detail::read(j, "nu", m.nu);
  config_detail::read(j, "delta", m.delta);
  config_detail::read(j, "weights", m.weights);
  if (j.contains("components")) {
    if (!j.contains("preset")) m.preset.clear();
    for (const auto& c : j.at("components")) {
      ComponentSpec cs;
      config_detail::read(c, "family", cs.family);
      config_detail::read(c, "mu", cs.mu);
      config_detail::read(c, "sigma", cs.sigma);
      config_detail::read(c, "a", cs.a);
      config_detail::read(c, "b", cs.b);
      m.components.push_back(cs);
    }
  }
  return m;
}

inline Json to_json(const RunConfig& c) {
  Json j;
  j["experiment"] = c.experiment;
  j["seed"] = c.seed;
  j["grid_nodes"] = c.grid_nodes;
  j["mixture"] = to_json(c.mixture);
  j["kernel"] = c.kernel ? to_json(*c.kernel) : Json(nullptr);
  j["sweep"] = {{"nu", c.sweep_nu}, {"mu", c.sweep_mu}};
  j["triangular"] = {{"nu", c.triangular_nu}, {"nodes", c.triangular_nodes}};
  j["coupling"] = {{"nu", c.coupling_nu}, {"mu", c.coupling_mu}, {"samples", c.coupling_samples}};
  j["tail"] = {{"bandwidths", c.tail_bandwidths}, {"t_min", c.tail_t_min}, {"t_max", c.tail_t_max}, {"points", c.tail_points}};
  j["embedding"] = {{"n", c.embed_n},          {"mu", c.embed_mu},         {"nu", c.embed_nu},
                    {"offset", c.embed_offset}, {"ocs_theta", c.ocs_theta}, {"orth_theta", c.orth_theta},
                    {"orth_tuples", c.orth_tuples}, {"blobs_n", c.blobs_n}, {"blobs_radius", c.blobs_radius},
                    {"blobs_sd", c.blobs_sd},   {"blobs_nu", c.blobs_nu}, {"blobs_offset", c.blobs_offset}};
  return j;
}

inline RunConfig config_from_json(const Json& j) {
  using config_detail::read;
  if (!j.is_object()) fail(ErrorKind::BadConfig, "config must be a JSON object");
  RunConfig c;
  read(j, "experiment", c.experiment);
  read(j, "seed", c.seed);
  read(j, "grid_nodes", c.grid_nodes);
  read(j, "jobs", c.jobs);
  read(j, "out", c.out);
  if (j.contains("mixture")) c.mixture = mixture_from_json(j.at("mixture"));
  if (j.contains("kernel") && !j.at("kernel").is_null()) c.kernel = kernel_from_json(j.at("kernel"));
  if (j.contains("sweep")) {
    read(j.at("sweep"), "nu", c.sweep_nu);
    read(j.at("sweep"), "mu", c.sweep_mu);
  }
  if (j.contains("triangular")) {
    read(j.at("triangular"), "nu", c.triangular_nu);
    read(j.at("triangular"), "nodes", c.triangular_nodes);
  }
  if (j.contains("coupling")) {
    read(j.at("coupling"), "nu", c.coupling_nu);
    read(j.at("coupling"), "mu", c.coupling_mu);
    read(j.at("coupling"), "samples", c.coupling_samples);
  }
  if (j.contains("tail")) {
    const Json& t = j.at("tail");
    read(t, "bandwidths", c.tail_bandwidths);
    read(t, "t_min", c.tail_t_min);
    read(t, "t_max", c.tail_t_max);
    read(t, "points", c.tail_points);
  }
  if (j.contains("embedding")) {
    const Json& e = j.at("embedding");
    read(e, "n", c.embed_n);
    read(e, "mu", c.embed_mu);
    read(e, "nu", c.embed_nu);
    read(e, "offset", c.embed_offset);
    read(e, "ocs_theta", c.ocs_theta);
    read(e, "orth_theta", c.orth_theta);
    read(e, "orth_tuples", c.orth_tuples);
    read(e, "blobs_n", c.blobs_n);
    read(e, "blobs_radius", c.blobs_radius);
    read(e, "blobs_sd", c.blobs_sd);
    read(e, "blobs_nu", c.blobs_nu);
    read(e, "blobs_offset", c.blobs_offset);
  }
  if (c.grid_nodes < 3) fail(ErrorKind::BadConfig, "grid_nodes must be at least 3");
  if (c.jobs == 0) c.jobs = 1;
  if (c.sweep_mu.empty() || c.coupling_mu.empty()) fail(ErrorKind::BadConfig, "sweeps need at least one point");
  if (c.tail_points < 2 || !(c.tail_t_min > 0.0 && c.tail_t_max > c.tail_t_min))
    fail(ErrorKind::BadConfig, "tail grid needs 0 < t_min < t_max and at least two points");
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::BadConfig, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  Json j;
  try {
    j = Json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::BadConfig, std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

/// Hash of the canonical serialization. `jobs` and `out` are excluded so the
/// hash only reflects what determines the numbers.
inline std::string config_hash(const RunConfig& c) { return hex64(fnv1a64(to_json(c).dump())); }

}  // namespace specgeo::experiments
