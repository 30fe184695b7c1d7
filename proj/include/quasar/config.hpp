#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "quasar/decimal.hpp"
#include "quasar/gateway.hpp"
#include "quasar/jsonl.hpp"
#include "quasar/loader.hpp"
#include "quasar/prompt.hpp"
#include "quasar/strategy.hpp"

namespace quasar {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct DatasetConfig {
  std::string task;
  std::filesystem::path path;
  std::string schema;
  std::optional<size_t> limit;  // head of the file, for cheap smoke runs
};

// Numeric-task perturbation source: instantiations of this template stand in
// for the perturbed dataset when measuring robustness.
struct TemplateSpec {
  std::string task;
  std::filesystem::path path;
  size_t count = 0;
};

struct RunConfig {
  std::map<std::string, ModelEndpoint> endpoints;
  std::string generator;
  std::string teacher;
  std::vector<std::string> correctors;
  bool judge_enabled = false;
  std::string judge;
  std::vector<DatasetConfig> datasets;
  std::vector<std::string> strategies;
  std::vector<TemplateSpec> robustness_templates;
  std::filesystem::path prompts_dir;
  std::filesystem::path cache_dir;
  std::filesystem::path out_dir;
  std::string backend = "replay";
  std::uint64_t seed = 0;
  int max_in_flight = 4;
  Decimal numeric_eps = Decimal(0);
  std::map<std::string, size_t> demo_caps;
  std::vector<Decimal> scaling_fractions = {Decimal(1, 4), Decimal(1, 2), Decimal(1)};
};

// CLI flags override file values.
struct CliOverrides {
  std::optional<std::string> backend;
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_in_flight;
};

namespace detail {

inline std::filesystem::path resolve_path(const std::filesystem::path& base,
                                          const std::string& value) {
  std::filesystem::path p(value);
  if (p.is_absolute()) return p;
  return base / p;
}

inline ModelEndpoint endpoint_from_json(const std::string& name, const Json& j) {
  if (!j.is_object()) throw ConfigError("endpoint " + name + " must be an object");
  ModelEndpoint endpoint;
  endpoint.name = name;
  endpoint.base_url = j.value("base_url", std::string());
  if (!j.contains("model_id") || !j.at("model_id").is_string()) {
    throw ConfigError("endpoint " + name + " needs a string model_id");
  }
  endpoint.model_id = j.at("model_id").get<std::string>();
  if (j.contains("temperature")) {
    const Json& t = j.at("temperature");
    endpoint.temperature = Decimal::parse(t.is_string() ? t.get<std::string>() : t.dump());
  }
  endpoint.max_tokens = j.value("max_tokens", endpoint.max_tokens);
  endpoint.auth_env = j.value("auth_env", std::string());
  return endpoint;
}

}  // namespace detail

// Relative paths inside the file resolve against the file's directory.
inline RunConfig load_run_config(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(path.string() + ": top level must be an object");
  std::filesystem::path base = path.parent_path();

  RunConfig config;
  Json endpoints = j.value("endpoints", Json::object());
  for (const auto& [name, spec] : endpoints.items()) {
    config.endpoints[name] = detail::endpoint_from_json(name, spec);
  }
  config.generator = j.value("generator", std::string());
  config.teacher = j.value("teacher", config.generator);
  if (j.contains("correctors")) {
    for (const auto& c : j.at("correctors")) config.correctors.push_back(c.get<std::string>());
  }
  if (j.contains("judge")) {
    const Json& judge = j.at("judge");
    config.judge_enabled = judge.value("enabled", false);
    config.judge = judge.value("endpoint", std::string());
  }
  for (const auto& d : j.value("datasets", Json::array())) {
    DatasetConfig dataset;
    dataset.task = d.value("task", std::string());
    dataset.path = detail::resolve_path(base, d.value("path", std::string()));
    dataset.schema = d.value("schema", std::string("plain"));
    if (d.contains("limit")) dataset.limit = d.at("limit").get<size_t>();
    config.datasets.push_back(std::move(dataset));
  }
  if (j.contains("strategies")) {
    config.strategies.clear();
    for (const auto& s : j.at("strategies")) config.strategies.push_back(s.get<std::string>());
  }
  for (const auto& t : j.value("robustness_templates", Json::array())) {
    TemplateSpec spec;
    spec.task = t.value("task", std::string());
    spec.path = detail::resolve_path(base, t.value("path", std::string()));
    spec.count = t.value("count", size_t(20));
    config.robustness_templates.push_back(std::move(spec));
  }
  if (j.contains("prompts_dir")) {
    config.prompts_dir = detail::resolve_path(base, j.at("prompts_dir").get<std::string>());
  }
  if (j.contains("cache_dir")) {
    config.cache_dir = detail::resolve_path(base, j.at("cache_dir").get<std::string>());
  }
  if (j.contains("out_dir")) {
    config.out_dir = detail::resolve_path(base, j.at("out_dir").get<std::string>());
  }
  config.backend = j.value("backend", config.backend);
  config.seed = j.value("seed", config.seed);
  config.max_in_flight = j.value("max_in_flight", config.max_in_flight);
  if (j.contains("numeric_eps")) {
    config.numeric_eps = Decimal::parse(j.at("numeric_eps").get<std::string>());
  }
  Json caps = j.value("demo_caps", Json::object());
  for (const auto& [task, cap] : caps.items()) {
    config.demo_caps[task] = cap.get<size_t>();
  }
  if (j.contains("scaling_fractions")) {
    config.scaling_fractions.clear();
    for (const auto& f : j.at("scaling_fractions")) {
      config.scaling_fractions.push_back(
          Decimal::parse(f.is_string() ? f.get<std::string>() : f.dump()));
    }
  }
  return config;
}

inline void apply_overrides(RunConfig& config, const CliOverrides& overrides) {
  if (overrides.backend) config.backend = *overrides.backend;
  if (overrides.out_dir) config.out_dir = *overrides.out_dir;
  if (overrides.seed) config.seed = *overrides.seed;
  if (overrides.max_in_flight) config.max_in_flight = *overrides.max_in_flight;
}

// Structural validation; must reject anything that would otherwise fail after
// network calls have already been spent.
inline void validate_config(const RunConfig& config) {
  if (config.backend != "live" && config.backend != "replay") {
    throw ConfigError("backend must be live or replay, got " + config.backend);
  }
  if (config.max_in_flight < 1) throw ConfigError("max_in_flight must be positive");
  if (config.out_dir.empty()) throw ConfigError("out_dir is required");
  if (config.prompts_dir.empty()) throw ConfigError("prompts_dir is required");
  if (config.datasets.empty()) throw ConfigError("at least one dataset is required");
  if (config.strategies.empty()) throw ConfigError("at least one strategy is required");

  auto require_endpoint = [&](const std::string& name, const std::string& role) {
    if (name.empty()) throw ConfigError(role + " endpoint is not set");
    if (!config.endpoints.count(name)) {
      throw ConfigError(role + " endpoint " + name + " is not defined");
    }
  };
  require_endpoint(config.generator, "generator");
  if (config.judge_enabled) require_endpoint(config.judge, "judge");
  for (const auto& c : config.correctors) require_endpoint(c, "corrector");
  if (!config.teacher.empty()) require_endpoint(config.teacher, "teacher");

  for (const auto& dataset : config.datasets) {
    if (dataset.task.empty()) throw ConfigError("dataset task name is required");
    if (!schema_registry().count(dataset.schema)) {
      throw ConfigError("dataset " + dataset.task + ": unknown schema " + dataset.schema);
    }
    if (!std::filesystem::exists(dataset.path)) {
      throw ConfigError("dataset " + dataset.task + ": missing file " + dataset.path.string());
    }
  }

  PromptLibrary prompts(config.prompts_dir);
  for (const auto& id : config.strategies) {
    StrategyVariant variant = parse_strategy_id(id);
    prompts.render(variant, "probe question");
  }
}

}  // namespace quasar
