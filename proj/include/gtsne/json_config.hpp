#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "gtsne/descent.hpp"
#include "gtsne/errors.hpp"
#include "gtsne/io.hpp"
#include "gtsne/kernels.hpp"
#include "gtsne/study.hpp"
#include "gtsne/validation.hpp"

namespace gtsne {

namespace detail {

inline double json_number(const nlohmann::json& j, const std::string& key) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw Error(errc::config, "expected numeric field '" + key + "'");
  return j.at(key).get<double>();
}

inline double json_number_or(const nlohmann::json& j, const std::string& key,
                             double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number())
    throw Error(errc::config, "expected numeric field '" + key + "'");
  return j.at(key).get<double>();
}

inline std::string json_string(const nlohmann::json& j,
                               const std::string& key) {
  if (!j.contains(key) || !j.at(key).is_string())
    throw Error(errc::config, "expected string field '" + key + "'");
  return j.at(key).get<std::string>();
}

inline std::vector<double> json_vector(const nlohmann::json& j,
                                       const std::string& key) {
  if (!j.contains(key) || !j.at(key).is_array())
    throw Error(errc::config, "expected array field '" + key + "'");
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number())
      throw Error(errc::config, "array '" + key + "' must be numeric");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace detail

inline InputKernel parse_input_kernel(const nlohmann::json& j) {
  std::string family = detail::json_string(j, "family");
  try {
    if (family == "power")
      return power_input(detail::json_number(j, "a"),
                         detail::json_number(j, "theta"));
    if (family == "log-poly")
      return logpoly_input(detail::json_number(j, "alpha"),
                           detail::json_number(j, "theta"));
  } catch (const Error& e) {
    throw Error(errc::config, e.what());
  }
  throw Error(errc::config, "unknown input kernel family '" + family + "'");
}

inline OutputKernel parse_output_kernel(const nlohmann::json& j) {
  std::string family = detail::json_string(j, "family");
  try {
    if (family == "cauchy")
      return cauchy_output(detail::json_number_or(j, "b", 1.0));
    if (family == "gauss") return gauss_output();
    if (family == "exp") return exp_output();
  } catch (const Error& e) {
    throw Error(errc::config, e.what());
  }
  throw Error(errc::config, "unknown output kernel family '" + family + "'");
}

inline KernelConfig parse_kernel_config(const nlohmann::json& j) {
  if (!j.contains("input") || !j.contains("output"))
    throw Error(errc::config, "kernel config needs 'input' and 'output'");
  return {parse_input_kernel(j.at("input")),
          parse_output_kernel(j.at("output"))};
}

inline nlohmann::json load_json(const std::filesystem::path& path) {
  std::string text = read_file(path);
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded())
    throw Error(errc::config, "invalid JSON in " + path.string());
  return j;
}

inline KernelConfig kernel_config_from_file(const std::filesystem::path& p) {
  return parse_kernel_config(load_json(p));
}

inline MeasureSpec parse_measure_spec(const nlohmann::json& j) {
  MeasureSpec spec;
  spec.family = detail::json_string(j, "family");
  if (j.contains("axis-nodes")) {
    double v = detail::json_number(j, "axis-nodes");
    if (v < 2) throw Error(errc::config, "axis-nodes must be at least 2");
    spec.axis_nodes = static_cast<std::size_t>(v);
  }
  if (spec.family == "uniform-box") {
    spec.lo = detail::json_vector(j, "lo");
    spec.hi = detail::json_vector(j, "hi");
    return spec;
  }
  if (spec.family == "trunc-gauss") {
    spec.mean = detail::json_vector(j, "mean");
    spec.stddev = detail::json_vector(j, "stddev");
    spec.lo = detail::json_vector(j, "lo");
    spec.hi = detail::json_vector(j, "hi");
    return spec;
  }
  if (spec.family == "mixture") {
    if (!j.contains("components") || !j.at("components").is_array())
      throw Error(errc::config, "mixture needs a 'components' array");
    for (const auto& c : j.at("components")) {
      spec.component_weights.push_back(detail::json_number(c, "weight"));
      if (!c.contains("measure"))
        throw Error(errc::config, "mixture component needs 'measure'");
      spec.components.push_back(parse_measure_spec(c.at("measure")));
    }
    return spec;
  }
  throw Error(errc::config, "unknown measure family '" + spec.family + "'");
}

inline nlohmann::json validation_report_json(const ValidationReport& rep) {
  nlohmann::json j;
  j["overall"] = rep.overall ? "pass" : "fail";
  j["checks"] = nlohmann::json::array();
  for (const auto& c : rep.checks)
    j["checks"].push_back({{"id", c.id},
                           {"status", c.pass ? "pass" : "fail"},
                           {"witness", c.witness},
                           {"note", c.note}});
  j["informational"] = nlohmann::json::array();
  for (const auto& c : rep.informational)
    j["informational"].push_back({{"id", c.id},
                                  {"status", c.pass ? "converged" : "divergent"},
                                  {"witness", c.witness},
                                  {"note", c.note}});
  return j;
}

inline OptimizerConfig parse_optimizer_config(const nlohmann::json& j) {
  OptimizerConfig oc;
  if (j.contains("iterations"))
    oc.iterations =
        static_cast<std::size_t>(detail::json_number(j, "iterations"));
  oc.learning_rate = detail::json_number_or(j, "learning-rate", 0.0);
  oc.momentum = detail::json_number_or(j, "momentum", oc.momentum);
  if (j.contains("seed"))
    oc.seed = static_cast<std::uint64_t>(detail::json_number(j, "seed"));
  oc.init_scale = detail::json_number_or(j, "init-scale", oc.init_scale);
  oc.stop_tol = detail::json_number_or(j, "stop-tol", oc.stop_tol);
  return oc;
}

inline StudyConfig parse_study_config(const nlohmann::json& j) {
  StudyConfig cfg;
  if (!j.contains("measure"))
    throw Error(errc::config, "study config needs 'measure'");
  cfg.measure = parse_measure_spec(j.at("measure"));
  for (double v : detail::json_vector(j, "n-grid")) {
    if (v < 3) throw Error(errc::config, "n-grid entries must be >= 3");
    cfg.n_grid.push_back(static_cast<std::size_t>(v));
  }
  for (double v : detail::json_vector(j, "seeds"))
    cfg.seeds.push_back(static_cast<std::uint64_t>(v));
  cfg.rho = detail::json_number(j, "rho");
  if (!j.contains("kernels"))
    throw Error(errc::config, "study config needs 'kernels'");
  cfg.kernels = parse_kernel_config(j.at("kernels"));
  if (j.contains("optimizer"))
    cfg.optimizer = parse_optimizer_config(j.at("optimizer"));
  if (j.contains("embed-dim")) {
    double v = detail::json_number(j, "embed-dim");
    if (v < 1) throw Error(errc::config, "embed-dim must be >= 1");
    cfg.embed_dim = static_cast<std::size_t>(v);
  }
  if (j.contains("output-dir"))
    cfg.output_dir = detail::json_string(j, "output-dir");
  cfg.stationarity_target =
      detail::json_number_or(j, "stationarity-target", cfg.stationarity_target);
  if (j.contains("f-grid-points"))
    cfg.f_grid_points =
        static_cast<std::size_t>(detail::json_number(j, "f-grid-points"));
  if (j.contains("reference-multiplier"))
    cfg.reference_multiplier = static_cast<std::size_t>(
        detail::json_number(j, "reference-multiplier"));
  return cfg;
}

}  // namespace gtsne
