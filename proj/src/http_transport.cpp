// SPDX-License-Identifier: Apache-2.0
#include "ttscale/http_transport.hpp"

#include <httplib.h>

#include <fmt/core.h>

#include "ttscale/errors.hpp"

namespace ttscale {

namespace {

json parse_arguments(const json& raw) {
  if (!raw.is_string()) return raw.is_null() ? json::object() : raw;
  try {
    return json::parse(raw.get<std::string>());
  } catch (const json::exception&) {
    throw MalformedResponseError("tool call arguments are not valid JSON");
  }
}

}  // namespace

json openai_request_body(const ChatRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) {
    json msg{{"role", to_string(m.role)}, {"content", m.content}};
    if (m.role == Role::Tool && m.tool_result_id) msg["tool_call_id"] = *m.tool_result_id;
    if (!m.tool_calls.empty()) {
      json calls = json::array();
      for (const auto& call : m.tool_calls) {
        calls.push_back({{"id", call.call_id},
                         {"type", "function"},
                         {"function", {{"name", call.tool_name}, {"arguments", call.arguments.dump()}}}});
      }
      msg["tool_calls"] = calls;
    }
    messages.push_back(std::move(msg));
  }
  json body{{"model", request.model_name}, {"messages", messages}, {"temperature", request.temperature}};
  if (request.seed) body["seed"] = *request.seed;
  if (!request.tool_schemas.empty()) {
    json tools = json::array();
    for (const auto& tool : request.tool_schemas) {
      tools.push_back({{"type", "function"},
                       {"function",
                        {{"name", tool.name},
                         {"description", tool.description},
                         {"parameters", tool.parameters}}}});
    }
    body["tools"] = tools;
  }
  return body;
}

ChatResponse openai_parse_response(const json& body) {
  try {
    const auto& choice = body.at("choices").at(0);
    const auto& message = choice.at("message");
    ChatResponse response;
    if (message.contains("content") && message["content"].is_string())
      response.content = message["content"].get<std::string>();
    if (message.contains("tool_calls") && message["tool_calls"].is_array()) {
      for (const auto& call : message["tool_calls"]) {
        const auto& fn = call.at("function");
        response.tool_calls.push_back(ToolCall{fn.at("name").get<std::string>(),
                                               parse_arguments(fn.value("arguments", json())),
                                               call.value("id", std::string{})});
      }
    }
    const auto reason = choice.value("finish_reason", std::string("stop"));
    if (!response.tool_calls.empty())
      response.finish_reason = FinishReason::ToolCall;
    else if (reason == "length")
      response.finish_reason = FinishReason::Length;
    else if (reason == "stop" || reason == "tool_calls")
      response.finish_reason = FinishReason::Stop;
    else
      response.finish_reason = FinishReason::Error;
    if (body.contains("usage")) {
      response.usage.prompt_tokens = body["usage"].value("prompt_tokens", std::int64_t{0});
      response.usage.completion_tokens = body["usage"].value("completion_tokens", std::int64_t{0});
    }
    return response;
  } catch (const json::exception& e) {
    throw MalformedResponseError(std::string("chat-completions response: ") + e.what());
  }
}

json gemini_request_body(const ChatRequest& request) {
  json system_parts = json::array();
  json contents = json::array();
  std::map<std::string, std::string> call_names;
  for (const auto& m : request.messages) {
    switch (m.role) {
      case Role::System:
        system_parts.push_back({{"text", m.content}});
        break;
      case Role::User:
        contents.push_back({{"role", "user"}, {"parts", json::array({{{"text", m.content}}})}});
        break;
      case Role::Assistant: {
        json parts = json::array();
        if (!m.content.empty()) parts.push_back({{"text", m.content}});
        for (const auto& call : m.tool_calls) {
          call_names[call.call_id] = call.tool_name;
          parts.push_back({{"functionCall", {{"name", call.tool_name}, {"args", call.arguments}}}});
        }
        contents.push_back({{"role", "model"}, {"parts", parts}});
        break;
      }
      case Role::Tool: {
        const std::string id = m.tool_result_id.value_or("");
        json part{{"functionResponse",
                   {{"name", call_names.count(id) ? call_names[id] : id},
                    {"response", {{"content", m.content}}}}}};
        // Consecutive tool results belong to one user turn.
        if (!contents.empty() && contents.back()["role"] == "user" &&
            contents.back()["parts"].at(0).contains("functionResponse")) {
          contents.back()["parts"].push_back(part);
        } else {
          contents.push_back({{"role", "user"}, {"parts", json::array({part})}});
        }
        break;
      }
    }
  }
  json config{{"temperature", request.temperature}};
  if (request.seed) config["seed"] = *request.seed;
  json body{{"contents", contents}, {"generationConfig", config}};
  if (!system_parts.empty()) body["systemInstruction"] = {{"parts", system_parts}};
  if (!request.tool_schemas.empty()) {
    json declarations = json::array();
    for (const auto& tool : request.tool_schemas)
      declarations.push_back(
          {{"name", tool.name}, {"description", tool.description}, {"parameters", tool.parameters}});
    body["tools"] = json::array({{{"functionDeclarations", declarations}}});
  }
  return body;
}

ChatResponse gemini_parse_response(const json& body) {
  try {
    const auto& candidate = body.at("candidates").at(0);
    ChatResponse response;
    std::string text;
    bool has_text = false;
    if (candidate.contains("content") && candidate["content"].contains("parts")) {
      int call_number = 0;
      for (const auto& part : candidate["content"]["parts"]) {
        if (part.contains("text") && !part.value("thought", false)) {
          text += part["text"].get<std::string>();
          has_text = true;
        } else if (part.contains("functionCall")) {
          const auto& fc = part["functionCall"];
          response.tool_calls.push_back(
              ToolCall{fc.at("name").get<std::string>(), parse_arguments(fc.value("args", json())),
                       fc.value("id", fmt::format("call_{}", call_number))});
          ++call_number;
        }
      }
    }
    if (has_text) response.content = text;
    const auto reason = candidate.value("finishReason", std::string("STOP"));
    if (!response.tool_calls.empty())
      response.finish_reason = FinishReason::ToolCall;
    else if (reason == "STOP")
      response.finish_reason = FinishReason::Stop;
    else if (reason == "MAX_TOKENS")
      response.finish_reason = FinishReason::Length;
    else
      response.finish_reason = FinishReason::Error;
    if (body.contains("usageMetadata")) {
      const auto& usage = body["usageMetadata"];
      response.usage.prompt_tokens = usage.value("promptTokenCount", std::int64_t{0});
      // Thinking tokens are billed as output.
      response.usage.completion_tokens =
          usage.value("candidatesTokenCount", std::int64_t{0}) + usage.value("thoughtsTokenCount", std::int64_t{0});
    }
    return response;
  } catch (const json::exception& e) {
    throw MalformedResponseError(std::string("generateContent response: ") + e.what());
  }
}

HttpTransport::HttpTransport(WireFormat format, Options options)
    : format_(format),
      options_(std::move(options)),
      in_flight_(std::make_unique<std::counting_semaphore<1024>>(std::clamp(options_.max_in_flight, 1, 1024))) {
  const auto scheme_end = options_.base_url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint base_url needs a scheme: " + options_.base_url);
  const auto path_start = options_.base_url.find('/', scheme_end + 3);
  origin_ = options_.base_url.substr(0, path_start);
  if (path_start != std::string::npos) path_prefix_ = options_.base_url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

HttpTransport::~HttpTransport() = default;

ChatResponse HttpTransport::send(const ChatRequest& request) {
  std::string path;
  json body;
  httplib::Headers headers;
  if (format_ == WireFormat::OpenAI) {
    path = path_prefix_ + "/v1/chat/completions";
    body = openai_request_body(request);
    if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);
  } else {
    path = path_prefix_ + "/v1beta/models/" + request.model_name + ":generateContent";
    body = gemini_request_body(request);
    if (!options_.api_key.empty()) headers.emplace("x-goog-api-key", options_.api_key);
  }

  in_flight_->acquire();
  struct Release {
    std::counting_semaphore<1024>* s;
    ~Release() { s->release(); }
  } release{in_flight_.get()};

  httplib::Client client(origin_);
  client.set_connection_timeout(30);
  client.set_read_timeout(options_.timeout_s);
  client.set_write_timeout(60);
  auto result = client.Post(path, headers, body.dump(), "application/json");
  if (!result)
    throw TransportError(fmt::format("POST {}{}: {}", origin_, path, httplib::to_string(result.error())), true);
  const int status = result->status;
  if (status == 429 || status >= 500)
    throw TransportError(fmt::format("POST {}{}: HTTP {}", origin_, path, status), true);
  if (status < 200 || status >= 300)
    throw TransportError(fmt::format("POST {}{}: HTTP {}: {}", origin_, path, status, result->body.substr(0, 500)),
                         false);
  json decoded;
  try {
    decoded = json::parse(result->body);
  } catch (const json::exception& e) {
    throw MalformedResponseError(std::string("response body is not JSON: ") + e.what());
  }
  return format_ == WireFormat::OpenAI ? openai_parse_response(decoded) : gemini_parse_response(decoded);
}

}  // namespace ttscale
