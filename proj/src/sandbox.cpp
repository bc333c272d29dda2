// SPDX-License-Identifier: Apache-2.0
#include "ttscale/sandbox.hpp"

#include <fstream>

#include <fmt/core.h>

#include "ttscale/chat.hpp"
#include "ttscale/errors.hpp"
#include "ttscale/process.hpp"
#include "ttscale/replay.hpp"

namespace ttscale {

ExecutionResult parse_envelope(const std::string& line) {
  try {
    auto j = json::parse(line);
    auto result = j.get<ExecutionResult>();
    if (result.timed_out && result.exit_code == 0)
      throw SandboxUnavailableError("runner envelope reports a timeout with exit code 0");
    return result;
  } catch (const json::exception& e) {
    throw SandboxUnavailableError(std::string("malformed runner envelope: ") + e.what());
  }
}

ProcessSandbox::ProcessSandbox(std::vector<std::string> command, int pool_size)
    : command_(std::move(command)),
      pool_(std::make_unique<std::counting_semaphore<256>>(std::clamp(pool_size, 1, 256))) {
  if (command_.empty()) throw ConfigError("sandbox runner command is empty");
}

ExecutionResult ProcessSandbox::execute(const SandboxRequest& request) {
  pool_->acquire();
  struct Release {
    std::counting_semaphore<256>* s;
    ~Release() { s->release(); }
  } release{pool_.get()};

  const auto raw = run_process(command_, json(request).dump() + "\n", request.timeout_s + kGraceSeconds);
  if (raw.spawn_failed)
    throw SandboxUnavailableError(fmt::format("cannot start runner '{}': {}", command_.front(), raw.stderr_text));
  if (raw.timed_out) {
    // The runner failed to enforce its own limit; report the kill ourselves.
    return ExecutionResult{"", "runner exceeded its time limit and was killed\n", -9, true, raw.wall_time_s};
  }
  auto end = raw.stdout_text.find_last_not_of("\r\n");
  if (end == std::string::npos)
    throw SandboxUnavailableError(
        fmt::format("runner produced no envelope (exit {}): {}", raw.exit_code, raw.stderr_text.substr(0, 500)));
  auto begin = raw.stdout_text.rfind('\n', end);
  return parse_envelope(raw.stdout_text.substr(begin == std::string::npos ? 0 : begin + 1, end + 1));
}

ScriptedSandbox ScriptedSandbox::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open sandbox fixture '" + path + "'");
  ScriptedSandbox sandbox;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      Rule rule;
      rule.match = j.value("match", std::vector<std::string>{});
      if (j.contains("argv")) rule.argv = j["argv"].get<std::vector<std::string>>();
      rule.response = j.at("response").get<ExecutionResult>();
      sandbox.add_rule(std::move(rule));
    } catch (const json::exception& e) {
      throw ConfigError(fmt::format("{}:{}: {}", path, line_number, e.what()));
    }
  }
  return sandbox;
}

ExecutionResult ScriptedSandbox::execute(const SandboxRequest& request) {
  for (const auto& rule : rules_) {
    if (rule.argv && *rule.argv != request.argv) continue;
    if (matches_in_order(request.script, rule.match)) return rule.response;
  }
  throw SandboxUnavailableError("scripted sandbox has no rule for script " +
                                sandbox_request_hash(request).substr(0, 12));
}

std::string sandbox_request_hash(const SandboxRequest& request) {
  return sha256_hex(json(request).dump());
}

SandboxClient::SandboxClient(std::shared_ptr<Sandbox> sandbox, RunLog* log)
    : sandbox_(std::move(sandbox)), log_(log) {}

void SandboxClient::warm_cache(const std::vector<Event>& events) {
  std::lock_guard lock(mutex_);
  for (const auto& event : events)
    if (const auto* exec = std::get_if<ExecutionEvent>(&event.payload))
      cache_.emplace(exec->request_hash, exec->result);
}

ExecutionResult SandboxClient::run(const SandboxRequest& request, const Scope& scope, ExecMode mode) {
  const std::string hash = sandbox_request_hash(request);
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(hash); it != cache_.end()) return it->second;
  }
  if (mode == ExecMode::Live && !sandbox_)
    throw SandboxUnavailableError("no sandbox runner configured (set sandbox.command or sandbox.fixture)");
  if (mode == ExecMode::CacheOnly)
    throw FixtureMissError(fmt::format("no recorded execution {} in stage '{}' (problem {})", hash.substr(0, 12),
                                       scope.stage, scope.problem_id));
  auto result = sandbox_->execute(request);
  if (log_) log_->append(ExecutionEvent{scope, hash, request, result});
  std::lock_guard lock(mutex_);
  cache_.emplace(hash, result);
  return result;
}

std::shared_ptr<Sandbox> make_sandbox(const SandboxConfig& config) {
  if (config.fixture) return std::make_shared<ScriptedSandbox>(ScriptedSandbox::load(*config.fixture));
  if (config.command.empty()) return nullptr;
  return std::make_shared<ProcessSandbox>(config.command, config.pool_size);
}

}  // namespace ttscale
