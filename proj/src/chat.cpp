// SPDX-License-Identifier: Apache-2.0
#include "ttscale/chat.hpp"

#include <openssl/evp.h>

#include <array>

#include <fmt/core.h>

#include "ttscale/errors.hpp"

namespace ttscale {

std::string to_string(Role role) {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
    case Role::Tool: return "tool";
  }
  return "user";
}

Role role_from_string(const std::string& text) {
  if (text == "system") return Role::System;
  if (text == "user") return Role::User;
  if (text == "assistant") return Role::Assistant;
  if (text == "tool") return Role::Tool;
  throw Error("unknown message role '" + text + "'");
}

std::string to_string(FinishReason reason) {
  switch (reason) {
    case FinishReason::Stop: return "stop";
    case FinishReason::ToolCall: return "tool_call";
    case FinishReason::Length: return "length";
    case FinishReason::Error: return "error";
  }
  return "stop";
}

FinishReason finish_reason_from_string(const std::string& text) {
  if (text == "stop") return FinishReason::Stop;
  if (text == "tool_call" || text == "tool_calls") return FinishReason::ToolCall;
  if (text == "length") return FinishReason::Length;
  if (text == "error") return FinishReason::Error;
  throw MalformedResponseError("unknown finish reason '" + text + "'");
}

void ChatRequest::validate() const {
  if (messages.empty()) throw Error("chat request without messages");
  const Role first = messages.front().role;
  if (first != Role::System && first != Role::User)
    throw Error("chat request must open with a system or user message");
  if (temperature < 0) throw Error("negative temperature");
}

void ChatResponse::validate() const {
  if ((finish_reason == FinishReason::ToolCall) != !tool_calls.empty())
    throw MalformedResponseError("finish_reason tool_call must coincide with non-empty tool_calls");
}

void to_json(json& j, const ToolCall& call) {
  j = json{{"tool_name", call.tool_name}, {"arguments", call.arguments}, {"call_id", call.call_id}};
}

void from_json(const json& j, ToolCall& call) {
  call.tool_name = j.contains("tool_name") ? j.at("tool_name").get<std::string>()
                                           : j.at("name").get<std::string>();
  call.arguments = j.value("arguments", json::object());
  if (call.arguments.is_string()) call.arguments = json::parse(call.arguments.get<std::string>());
  call.call_id = j.value("call_id", std::string{});
}

void to_json(json& j, const Message& message) {
  j = json{{"role", to_string(message.role)}, {"content", message.content}};
  if (message.tool_result_id) j["tool_result_id"] = *message.tool_result_id;
  if (!message.tool_calls.empty()) j["tool_calls"] = message.tool_calls;
}

void from_json(const json& j, Message& message) {
  message.role = role_from_string(j.at("role").get<std::string>());
  message.content = j.value("content", std::string{});
  message.tool_result_id.reset();
  if (j.contains("tool_result_id")) message.tool_result_id = j["tool_result_id"].get<std::string>();
  message.tool_calls = j.value("tool_calls", std::vector<ToolCall>{});
}

void to_json(json& j, const ToolSchema& schema) {
  j = json{{"name", schema.name}, {"description", schema.description}, {"parameters", schema.parameters}};
}

void from_json(const json& j, ToolSchema& schema) {
  schema.name = j.at("name").get<std::string>();
  schema.description = j.value("description", std::string{});
  schema.parameters = j.value("parameters", json::object());
}

void to_json(json& j, const ChatRequest& request) {
  j = json{{"model", request.model_name},
           {"messages", request.messages},
           {"tools", request.tool_schemas},
           {"temperature", request.temperature}};
  j["seed"] = request.seed ? json(*request.seed) : json();
}

void from_json(const json& j, ChatRequest& request) {
  request.model_name = j.at("model").get<std::string>();
  request.messages = j.at("messages").get<std::vector<Message>>();
  request.tool_schemas = j.value("tools", std::vector<ToolSchema>{});
  request.temperature = j.value("temperature", 1.0);
  request.seed.reset();
  if (j.contains("seed") && !j["seed"].is_null()) request.seed = j["seed"].get<std::int64_t>();
}

void to_json(json& j, const ChatResponse& response) {
  j = json{{"tool_calls", response.tool_calls},
           {"usage", response.usage},
           {"finish_reason", to_string(response.finish_reason)}};
  j["content"] = response.content ? json(*response.content) : json();
}

void from_json(const json& j, ChatResponse& response) {
  response.content.reset();
  if (j.contains("content") && !j["content"].is_null())
    response.content = j["content"].get<std::string>();
  response.tool_calls = j.value("tool_calls", std::vector<ToolCall>{});
  response.usage = j.value("usage", TokenUsage{});
  if (j.contains("finish_reason")) {
    response.finish_reason = finish_reason_from_string(j["finish_reason"].get<std::string>());
  } else {
    response.finish_reason = response.tool_calls.empty() ? FinishReason::Stop : FinishReason::ToolCall;
  }
}

std::string sha256_hex(const std::string& text) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(text.data(), text.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  std::string hex;
  hex.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string request_hash(const ChatRequest& request) {
  // nlohmann::json objects keep keys sorted, so dump() is canonical.
  return sha256_hex(json(request).dump());
}

std::string request_text(const ChatRequest& request) {
  std::string text;
  for (const auto& message : request.messages) {
    text += to_string(message.role);
    text += ": ";
    text += message.content;
    text += '\n';
    for (const auto& call : message.tool_calls) {
      text += "tool_call " + call.tool_name + ": " + call.arguments.dump() + '\n';
    }
  }
  return text;
}

}  // namespace ttscale
