// SPDX-License-Identifier: Apache-2.0
//
// Script execution through an external runner. The wire envelope is one
// JSON object each way:
//   request  {script, timeout_s, mem_limit_mb, argv}
//   response {stdout, stderr, exit_code, timed_out, wall_time_s}
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <vector>

#include "ttscale/config.hpp"
#include "ttscale/run_log.hpp"
#include "ttscale/types.hpp"

namespace ttscale {

class Sandbox {
 public:
  virtual ~Sandbox() = default;
  /// Throws SandboxUnavailableError when no envelope can be obtained.
  virtual ExecutionResult execute(const SandboxRequest& request) = 0;
};

/// Decodes a runner response line; throws SandboxUnavailableError when it is
/// not a well-formed envelope.
ExecutionResult parse_envelope(const std::string& line);

/// Spawns the runner command once per request.
class ProcessSandbox final : public Sandbox {
 public:
  /// Extra wall-clock allowance for the runner beyond the script timeout.
  static constexpr double kGraceSeconds = 1.0;

  ProcessSandbox(std::vector<std::string> command, int pool_size);

  ExecutionResult execute(const SandboxRequest& request) override;

 private:
  std::vector<std::string> command_;
  std::unique_ptr<std::counting_semaphore<256>> pool_;
};

/// Stub runner answering from rules instead of executing anything. Rules
/// are tried in order; a rule applies when its `match` strings occur in order
/// in the script and, if given, `argv` equals the request argv.
class ScriptedSandbox final : public Sandbox {
 public:
  struct Rule {
    std::vector<std::string> match;
    std::optional<std::vector<std::string>> argv;
    ExecutionResult response;
  };

  ScriptedSandbox() = default;
  explicit ScriptedSandbox(std::vector<Rule> rules) : rules_(std::move(rules)) {}

  /// One rule per line: {"match": [...], "argv": [...]?, "response": {...}}.
  static ScriptedSandbox load(const std::string& path);

  void add_rule(Rule rule) { rules_.push_back(std::move(rule)); }

  ExecutionResult execute(const SandboxRequest& request) override;

 private:
  std::vector<Rule> rules_;
};

/// Adapter for tests: any callable becomes a sandbox.
class FunctionSandbox final : public Sandbox {
 public:
  using Fn = std::function<ExecutionResult(const SandboxRequest&)>;
  explicit FunctionSandbox(Fn fn) : fn_(std::move(fn)) {}
  ExecutionResult execute(const SandboxRequest& request) override { return fn_(request); }

 private:
  Fn fn_;
};

std::string sandbox_request_hash(const SandboxRequest& request);

enum class ExecMode { Live, CacheOnly };

/// Front end used by the pipeline: caches results by request hash and logs
/// each fresh execution as an ExecutionResult event.
class SandboxClient {
 public:
  SandboxClient(std::shared_ptr<Sandbox> sandbox, RunLog* log);

  ExecutionResult run(const SandboxRequest& request, const Scope& scope, ExecMode mode = ExecMode::Live);

  void warm_cache(const std::vector<Event>& events);

 private:
  std::shared_ptr<Sandbox> sandbox_;
  RunLog* log_;
  std::mutex mutex_;
  std::map<std::string, ExecutionResult> cache_;
};

/// Runner from config: the scripted fixture when configured, otherwise the
/// runner command.
std::shared_ptr<Sandbox> make_sandbox(const SandboxConfig& config);

}  // namespace ttscale
