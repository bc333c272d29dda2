// SPDX-License-Identifier: Apache-2.0
#include "ttscale/run_log.hpp"

#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>

#include <fmt/chrono.h>
#include <fmt/core.h>

#include "ttscale/errors.hpp"

namespace ttscale {

Scope Scope::of(std::string stage, std::string problem_id) {
  Scope s;
  s.stage = std::move(stage);
  s.problem_id = std::move(problem_id);
  return s;
}

Scope Scope::with_candidate(int value) const {
  Scope s = *this;
  s.candidate = value;
  return s;
}
Scope Scope::with_repetition(int value) const {
  Scope s = *this;
  s.repetition = value;
  return s;
}
Scope Scope::with_round(int value) const {
  Scope s = *this;
  s.round = value;
  return s;
}
Scope Scope::with_attempt(int value) const {
  Scope s = *this;
  s.attempt = value;
  return s;
}
Scope Scope::with_turn(int value) const {
  Scope s = *this;
  s.turn = value;
  return s;
}
Scope Scope::with_input(int value) const {
  Scope s = *this;
  s.input = value;
  return s;
}
Scope Scope::with_strategy(std::string value) const {
  Scope s = *this;
  s.strategy = std::move(value);
  return s;
}
Scope Scope::with_pair(int first, int second) const {
  Scope s = *this;
  s.pair = std::pair{first, second};
  return s;
}

void to_json(json& j, const Scope& scope) {
  j = json{{"stage", scope.stage}, {"problem", scope.problem_id}};
  if (scope.candidate) j["candidate"] = *scope.candidate;
  if (scope.repetition) j["repetition"] = *scope.repetition;
  if (scope.round) j["round"] = *scope.round;
  if (scope.attempt) j["attempt"] = *scope.attempt;
  if (scope.turn) j["turn"] = *scope.turn;
  if (scope.input) j["input"] = *scope.input;
  if (scope.strategy) j["strategy"] = *scope.strategy;
  if (scope.pair) j["pair"] = json::array({scope.pair->first, scope.pair->second});
}

void from_json(const json& j, Scope& scope) {
  scope = Scope{};
  scope.stage = j.value("stage", std::string{});
  scope.problem_id = j.value("problem", std::string{});
  auto opt_int = [&](const char* key, std::optional<int>& field) {
    if (j.contains(key)) field = j[key].get<int>();
  };
  opt_int("candidate", scope.candidate);
  opt_int("repetition", scope.repetition);
  opt_int("round", scope.round);
  opt_int("attempt", scope.attempt);
  opt_int("turn", scope.turn);
  opt_int("input", scope.input);
  if (j.contains("strategy")) scope.strategy = j["strategy"].get<std::string>();
  if (j.contains("pair")) scope.pair = std::pair{j["pair"].at(0).get<int>(), j["pair"].at(1).get<int>()};
}

std::string event_type(const EventPayload& payload) {
  switch (payload.index()) {
    case 0: return "provider_call";
    case 1: return "execution";
    case 2: return "verdict";
    default: return "selection";
  }
}

const Scope& event_scope(const EventPayload& payload) {
  return std::visit([](const auto& e) -> const Scope& { return e.scope; }, payload);
}

json event_to_json(const Event& event, bool include_timestamp) {
  json j = std::visit(
      [](const auto& e) -> json {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, ProviderCallEvent>) {
          return json{{"request_hash", e.request_hash},
                      {"request", e.request},
                      {"response", e.response},
                      {"usage", e.usage}};
        } else if constexpr (std::is_same_v<T, ExecutionEvent>) {
          return json{{"request_hash", e.request_hash}, {"request", e.request}, {"result", e.result}};
        } else if constexpr (std::is_same_v<T, VerdictEvent>) {
          return json{{"verifier", e.verifier}, {"verdict", e.verdict}};
        } else {
          return json{{"outcome", e.outcome}};
        }
      },
      event.payload);
  j["type"] = event_type(event.payload);
  j["seq"] = event.seq;
  j["scope"] = event_scope(event.payload);
  if (include_timestamp) j["ts"] = event.timestamp;
  return j;
}

Event event_from_json(const json& j) {
  Event event;
  event.seq = j.at("seq").get<std::uint64_t>();
  event.timestamp = j.value("ts", std::string{});
  const auto type = j.at("type").get<std::string>();
  const auto scope = j.at("scope").get<Scope>();
  if (type == "provider_call") {
    event.payload = ProviderCallEvent{scope, j.at("request_hash").get<std::string>(), j.at("request"),
                                      j.at("response"), j.at("usage").get<TokenUsage>()};
  } else if (type == "execution") {
    event.payload = ExecutionEvent{scope, j.at("request_hash").get<std::string>(),
                                   j.at("request").get<SandboxRequest>(),
                                   j.at("result").get<ExecutionResult>()};
  } else if (type == "verdict") {
    event.payload =
        VerdictEvent{scope, j.at("verifier").get<std::string>(), j.at("verdict").get<Verdict>()};
  } else if (type == "selection") {
    event.payload = SelectionEvent{scope, j.at("outcome").get<SelectionOutcome>()};
  } else {
    throw StorageError("unknown event type '" + type + "'");
  }
  return event;
}

namespace {

std::string now_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  return fmt::format("{:%Y-%m-%dT%H:%M:%S}.{:03d}Z",
                     fmt::gmtime(std::chrono::system_clock::to_time_t(now)), ms);
}

std::string scope_key(const std::string& type, const Scope& scope) {
  return type + "|" + json(scope).dump();
}

}  // namespace

RunLog::RunLog() = default;

RunLog::RunLog(const std::string& path) : path_(path) {
  for (auto& event : read_file(path)) {
    scope_keys_.insert(scope_key(event_type(event.payload), event_scope(event.payload)));
    next_seq_ = std::max(next_seq_, event.seq + 1);
    events_.push_back(std::move(event));
  }
  file_ = std::fopen(path.c_str(), "ab");
  if (!file_) throw StorageError(fmt::format("cannot open run log '{}': {}", path, std::strerror(errno)));
}

RunLog::~RunLog() {
  if (file_) std::fclose(file_);
}

std::vector<Event> RunLog::read_file(const std::string& path) {
  std::vector<Event> events;
  std::ifstream in(path);
  if (!in) return events;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    try {
      events.push_back(event_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw StorageError(fmt::format("{}:{}: corrupt event: {}", path, line_number, e.what()));
    }
  }
  return events;
}

Event RunLog::append_locked(EventPayload payload) {
  Event event{next_seq_, now_timestamp(), std::move(payload)};
  if (file_) {
    const std::string line = event_to_json(event).dump() + "\n";
    if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() || std::fflush(file_) != 0 ||
        ::fsync(::fileno(file_)) != 0) {
      throw StorageError(fmt::format("write to run log '{}' failed: {}", path_, std::strerror(errno)));
    }
  }
  ++next_seq_;
  scope_keys_.insert(scope_key(event_type(event.payload), event_scope(event.payload)));
  events_.push_back(event);
  return event;
}

Event RunLog::append(EventPayload payload) {
  std::lock_guard lock(mutex_);
  return append_locked(std::move(payload));
}

bool RunLog::append_unique(EventPayload payload) {
  std::lock_guard lock(mutex_);
  if (scope_keys_.count(scope_key(event_type(payload), event_scope(payload)))) return false;
  append_locked(std::move(payload));
  return true;
}

bool RunLog::has_scope(const std::string& type, const Scope& scope) const {
  std::lock_guard lock(mutex_);
  return scope_keys_.count(scope_key(type, scope)) > 0;
}

std::size_t RunLog::size() const {
  std::lock_guard lock(mutex_);
  return events_.size();
}

std::vector<Event> RunLog::events() const {
  std::lock_guard lock(mutex_);
  return events_;
}

void RunLog::for_each(const std::function<void(const Event&)>& fn) const {
  std::lock_guard lock(mutex_);
  for (const auto& event : events_) fn(event);
}

TokenUsage total_provider_usage(const std::vector<Event>& events) {
  TokenUsage total;
  for (const auto& event : events)
    if (const auto* call = std::get_if<ProviderCallEvent>(&event.payload)) total += call->usage;
  return total;
}

}  // namespace ttscale
