// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ttscale/types.hpp"

namespace ttscale {

enum class Role { System, User, Assistant, Tool };

std::string to_string(Role role);
Role role_from_string(const std::string& text);

struct ToolCall {
  std::string tool_name;
  json arguments = json::object();
  std::string call_id;

  friend bool operator==(const ToolCall&, const ToolCall&) = default;
};

struct Message {
  Role role = Role::User;
  std::string content;
  /// Tool messages: the call this result answers.
  std::optional<std::string> tool_result_id;
  /// Assistant messages that requested tools.
  std::vector<ToolCall> tool_calls;

  friend bool operator==(const Message&, const Message&) = default;
};

struct ToolSchema {
  std::string name;
  std::string description;
  json parameters = json::object();  // JSON Schema of the arguments object
};

struct ChatRequest {
  std::string model_name;
  std::vector<Message> messages;
  std::vector<ToolSchema> tool_schemas;
  double temperature = 1.0;
  std::optional<std::int64_t> seed;

  /// Throws Error when messages are empty or do not open with system/user.
  void validate() const;
};

enum class FinishReason { Stop, ToolCall, Length, Error };

std::string to_string(FinishReason reason);
FinishReason finish_reason_from_string(const std::string& text);

struct ChatResponse {
  std::optional<std::string> content;
  std::vector<ToolCall> tool_calls;
  TokenUsage usage;
  FinishReason finish_reason = FinishReason::Stop;

  /// Throws MalformedResponseError unless finish_reason == ToolCall exactly
  /// when tool_calls is non-empty.
  void validate() const;
};

void to_json(json& j, const ToolCall& call);
void from_json(const json& j, ToolCall& call);
void to_json(json& j, const Message& message);
void from_json(const json& j, Message& message);
void to_json(json& j, const ToolSchema& schema);
void from_json(const json& j, ToolSchema& schema);
void to_json(json& j, const ChatRequest& request);
void from_json(const json& j, ChatRequest& request);
void to_json(json& j, const ChatResponse& response);
/// Accepts fixture shorthand: finish_reason may be omitted and is then
/// derived from tool_calls.
void from_json(const json& j, ChatResponse& response);

/// Hex SHA-256 of the canonical (sorted-key) JSON of the request. Covers
/// model, messages, tool schemas, temperature and seed.
std::string request_hash(const ChatRequest& request);

/// Hex SHA-256 of arbitrary text.
std::string sha256_hex(const std::string& text);

/// Flattened transcript ("role: content" lines plus tool call arguments),
/// used for substring matching in replay fixtures.
std::string request_text(const ChatRequest& request);

}  // namespace ttscale
