// SPDX-License-Identifier: Apache-2.0
//
// Append-only run record. Every provider call, sandbox execution, verdict
// and selection is one event; on disk the record is one JSON object per line
// with a `type` field naming the variant.
#pragma once

#include <cstdint>
#include <cstdio>
#include <functional>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "ttscale/types.hpp"

namespace ttscale {

/// Where in the pipeline an event was produced. Only the populated fields
/// are serialized.
struct Scope {
  std::string stage;
  std::string problem_id;
  std::optional<int> candidate;
  std::optional<int> repetition;
  std::optional<int> round;
  std::optional<int> attempt;
  std::optional<int> turn;
  std::optional<int> input;
  std::optional<std::string> strategy;
  std::optional<std::pair<int, int>> pair;

  static Scope of(std::string stage, std::string problem_id);

  Scope with_candidate(int value) const;
  Scope with_repetition(int value) const;
  Scope with_round(int value) const;
  Scope with_attempt(int value) const;
  Scope with_turn(int value) const;
  Scope with_input(int value) const;
  Scope with_strategy(std::string value) const;
  Scope with_pair(int first, int second) const;

  friend bool operator==(const Scope&, const Scope&) = default;
};

void to_json(json& j, const Scope& scope);
void from_json(const json& j, Scope& scope);

struct ProviderCallEvent {
  Scope scope;
  std::string request_hash;
  json request;
  json response;
  TokenUsage usage;
};

struct ExecutionEvent {
  Scope scope;
  std::string request_hash;
  SandboxRequest request;
  ExecutionResult result;
};

struct VerdictEvent {
  Scope scope;
  std::string verifier;  // "simple" or "symbolic"
  Verdict verdict;
};

struct SelectionEvent {
  Scope scope;
  SelectionOutcome outcome;
};

using EventPayload = std::variant<ProviderCallEvent, ExecutionEvent, VerdictEvent, SelectionEvent>;

struct Event {
  std::uint64_t seq = 0;
  std::string timestamp;
  EventPayload payload;
};

std::string event_type(const EventPayload& payload);
const Scope& event_scope(const EventPayload& payload);

/// Serialized event; `include_timestamp = false` gives the form compared
/// by replay-determinism checks.
json event_to_json(const Event& event, bool include_timestamp = true);
Event event_from_json(const json& j);

class RunLog {
 public:
  /// Memory-only record.
  RunLog();
  /// Opens (creating if needed) a line-delimited log file and loads any
  /// existing events; new events are appended to it.
  explicit RunLog(const std::string& path);
  ~RunLog();

  RunLog(const RunLog&) = delete;
  RunLog& operator=(const RunLog&) = delete;

  /// Appends and flushes to disk before returning. Throws StorageError.
  Event append(EventPayload payload);

  /// Appends unless an event of the same type and scope already exists.
  /// Returns false when skipped.
  bool append_unique(EventPayload payload);

  bool has_scope(const std::string& type, const Scope& scope) const;

  std::size_t size() const;
  std::vector<Event> events() const;
  void for_each(const std::function<void(const Event&)>& fn) const;

  const std::string& path() const { return path_; }

  /// Reads a log file without opening it for appending.
  static std::vector<Event> read_file(const std::string& path);

 private:
  Event append_locked(EventPayload payload);

  mutable std::mutex mutex_;
  std::string path_;
  std::FILE* file_ = nullptr;
  std::vector<Event> events_;
  std::set<std::string> scope_keys_;
  std::uint64_t next_seq_ = 0;
};

/// Sum of the usage over every ProviderCall event.
TokenUsage total_provider_usage(const std::vector<Event>& events);

}  // namespace ttscale
