// SPDX-License-Identifier: Apache-2.0
#include "ttscale/config.hpp"

#include <filesystem>
#include <fstream>

#include <fmt/core.h>

#include "ttscale/errors.hpp"

namespace ttscale {

namespace {

std::string resolve(const std::string& base_dir, const std::string& path) {
  if (base_dir.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (std::filesystem::path(base_dir) / path).lexically_normal().string();
}

}  // namespace

ModelRates RunConfig::rates_for(const std::string& model) const {
  auto it = rates.find(model);
  return it == rates.end() ? ModelRates{} : it->second;
}

void RunConfig::validate() const {
  if (n_candidates < 1) throw ConfigError("n_candidates must be >= 1");
  if (!(delta >= 0.0 && delta <= 1.0)) throw ConfigError("delta must lie in [0, 1]");
  if (k_verif < 1) throw ConfigError("k_verif must be >= 1");
  if (k_tie < 1 || k_tie % 2 == 0) throw ConfigError("k_tie must be a positive odd number");
  if (n_iter < 1) throw ConfigError("n_iter must be >= 1");
  if (n_sequential_attempts < 1) throw ConfigError("n_sequential_attempts must be >= 1");
  if (temperature < 0) throw ConfigError("temperature must be >= 0");
  if (sandbox.timeout_s <= 0) throw ConfigError("sandbox timeout must be positive");
  if (sandbox.mem_limit_mb <= 0) throw ConfigError("sandbox memory cap must be positive");
  if (sandbox.pool_size < 1) throw ConfigError("sandbox pool size must be >= 1");
  if (retry.max_attempts < 1) throw ConfigError("retry attempts must be >= 1");
  if (max_tool_calls < 0 || max_agent_turns < 1) throw ConfigError("agent caps must be positive");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
  return from_json(j, std::filesystem::path(path).parent_path().string());
}

RunConfig RunConfig::from_json(const json& j, const std::string& base_dir) {
  RunConfig c;
  try {
    c.n_candidates = j.value("n_candidates", c.n_candidates);
    c.k_verif = j.value("k_verif", c.k_verif);
    c.k_tie = j.value("k_tie", c.k_tie);
    c.delta = j.value("delta", c.delta);
    c.n_iter = j.value("n_iter", c.n_iter);
    c.n_sequential_attempts = j.value("n_sequential_attempts", c.n_sequential_attempts);
    c.temperature = j.value("temperature", c.temperature);
    c.seed = j.value("seed", c.seed);
    c.model_name = j.value("model_name", c.model_name);
    c.general_instructions = j.value("general_instructions", c.general_instructions);
    if (j.contains("prompts_dir")) c.prompts_dir = resolve(base_dir, j["prompts_dir"].get<std::string>());
    if (j.contains("problems_file"))
      c.problems_file = resolve(base_dir, j["problems_file"].get<std::string>());
    if (j.contains("replay_fixture"))
      c.replay_fixture = resolve(base_dir, j["replay_fixture"].get<std::string>());

    if (j.contains("sandbox")) {
      const auto& s = j["sandbox"];
      c.sandbox.command = s.value("command", c.sandbox.command);
      if (s.contains("fixture")) c.sandbox.fixture = resolve(base_dir, s["fixture"].get<std::string>());
      c.sandbox.timeout_s = s.value("timeout_s", c.sandbox.timeout_s);
      c.sandbox.mem_limit_mb = s.value("mem_limit_mb", c.sandbox.mem_limit_mb);
      c.sandbox.pool_size = s.value("pool_size", c.sandbox.pool_size);
    }
    if (j.contains("retry")) {
      const auto& r = j["retry"];
      c.retry.max_attempts = r.value("max_attempts", c.retry.max_attempts);
      c.retry.base_delay = std::chrono::milliseconds(r.value("base_delay_ms", c.retry.base_delay.count()));
      c.retry.max_delay = std::chrono::milliseconds(r.value("max_delay_ms", c.retry.max_delay.count()));
    }
    if (j.contains("endpoints")) {
      for (const auto& [name, e] : j["endpoints"].items()) {
        c.endpoints[name] = EndpointConfig{e.value("base_url", std::string{}),
                                           e.value("api_key_env", std::string{})};
      }
    }
    c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
    c.cache = j.value("cache", c.cache);
    c.max_tool_calls = j.value("max_tool_calls", c.max_tool_calls);
    c.max_agent_turns = j.value("max_agent_turns", c.max_agent_turns);
    c.dedup_rtol = j.value("dedup_rtol", c.dedup_rtol);
    c.dedup_atol = j.value("dedup_atol", c.dedup_atol);
    c.summary_char_budget = j.value("summary_char_budget", c.summary_char_budget);
    c.randomize_tie_order = j.value("randomize_tie_order", c.randomize_tie_order);
    c.workers = j.value("workers", c.workers);
    if (j.contains("rates")) {
      for (const auto& [model, r] : j["rates"].items()) {
        c.rates[model] = ModelRates::per_million(r.at("input_per_million").get<double>(),
                                                 r.at("output_per_million").get<double>());
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace ttscale
