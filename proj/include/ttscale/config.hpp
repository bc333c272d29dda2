// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ttscale/types.hpp"

namespace ttscale {

struct SandboxConfig {
  /// Runner command line; receives one request object on stdin.
  std::vector<std::string> command;
  /// Scripted stub responses used instead of a runner process.
  std::optional<std::string> fixture;
  double timeout_s = 30.0;
  std::int64_t mem_limit_mb = 2048;
  int pool_size = 4;
};

struct RetryConfig {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{500};
  std::chrono::milliseconds max_delay{8000};
};

struct EndpointConfig {
  std::string base_url;
  std::string api_key_env;
};

struct RunConfig {
  int n_candidates = 50;
  int k_verif = 10;
  int k_tie = 5;
  double delta = 0.05;
  int n_iter = 4;
  int n_sequential_attempts = 1;
  double temperature = 1.0;
  std::uint64_t seed = 0;
  std::string model_name = "replay";

  std::string general_instructions;
  std::optional<std::string> prompts_dir;
  std::optional<std::string> problems_file;
  std::optional<std::string> replay_fixture;

  SandboxConfig sandbox;
  RetryConfig retry;
  std::map<std::string, EndpointConfig> endpoints;  // keyed by adapter: "openai", "gemini"
  int max_in_flight = 8;
  bool cache = true;

  int max_tool_calls = 32;
  int max_agent_turns = 48;
  double dedup_rtol = 1e-9;
  double dedup_atol = 1e-12;
  std::size_t summary_char_budget = 20000;
  bool randomize_tie_order = true;
  int workers = 1;

  /// Per-model prices, per million tokens.
  std::map<std::string, ModelRates> rates;

  ModelRates rates_for(const std::string& model) const;

  /// Throws ConfigError on a broken invariant.
  void validate() const;

  /// Reads a JSON config file. Relative paths inside it resolve against the
  /// file's directory.
  static RunConfig load(const std::string& path);
  static RunConfig from_json(const json& j, const std::string& base_dir = "");
};

}  // namespace ttscale
