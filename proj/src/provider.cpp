// SPDX-License-Identifier: Apache-2.0
#include "ttscale/provider.hpp"

#include <algorithm>
#include <thread>

#include <fmt/core.h>

#include "ttscale/errors.hpp"
#include "ttscale/http_transport.hpp"
#include "ttscale/random.hpp"
#include "ttscale/replay.hpp"

namespace ttscale {

ChatResponse OfflineTransport::send(const ChatRequest& request) {
  throw FixtureMissError("offline: no recorded response for request " + request_hash(request));
}

RetryPolicy RetryPolicy::from(const RetryConfig& config) {
  return RetryPolicy{config.max_attempts, config.base_delay, config.max_delay, 0};
}

std::chrono::milliseconds RetryPolicy::delay(int attempt) const {
  const auto exponent = std::min(attempt - 1, 30);
  const auto raw = std::min<std::int64_t>(base_delay.count() << exponent, max_delay.count());
  const double jitter =
      0.5 + 0.5 * static_cast<double>(splitmix64(jitter_seed ^ static_cast<std::uint64_t>(attempt)) >> 11) /
                static_cast<double>(1ULL << 53);
  return std::chrono::milliseconds(static_cast<std::int64_t>(static_cast<double>(raw) * jitter));
}

ChatClient::ChatClient(std::shared_ptr<Transport> transport, RetryPolicy retry,
                       std::map<std::string, ModelRates> rates, bool cache_enabled, RunLog* log)
    : transport_(std::move(transport)),
      retry_(retry),
      rates_(std::move(rates)),
      cache_enabled_(cache_enabled),
      log_(log),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {}

bool ChatClient::cacheable(const ChatRequest& request) const {
  return cache_enabled_ && !(request.temperature > 0 && !request.seed);
}

std::size_t ChatClient::cache_size() const {
  std::lock_guard lock(cache_mutex_);
  return cache_.size();
}

void ChatClient::warm_cache(const std::vector<Event>& events) {
  std::lock_guard lock(cache_mutex_);
  for (const auto& event : events) {
    const auto* call = std::get_if<ProviderCallEvent>(&event.payload);
    if (!call) continue;
    auto response = call->response.get<ChatResponse>();
    response.usage = call->usage;
    cache_.emplace(call->request_hash, std::move(response));
  }
}

ChatResponse ChatClient::send_with_retry(const ChatRequest& request) {
  for (int attempt = 1;; ++attempt) {
    try {
      return transport_->send(request);
    } catch (const TransportError& e) {
      if (!e.transient()) throw;
      if (attempt >= retry_.max_attempts)
        throw TransportExhaustedError(
            fmt::format("provider failed after {} attempts: {}", attempt, e.what()));
      sleeper_(retry_.delay(attempt));
    }
  }
}

ChatResponse ChatClient::complete(const ChatRequest& request, const Scope& scope, CallMode mode) {
  request.validate();
  const std::string hash = request_hash(request);
  const bool use_cache = cacheable(request);
  if (use_cache) {
    std::lock_guard lock(cache_mutex_);
    if (auto it = cache_.find(hash); it != cache_.end()) {
      ChatResponse hit = it->second;
      hit.usage = TokenUsage{};  // served from cache: nothing new was spent
      return hit;
    }
  }
  if (mode == CallMode::CacheOnly)
    throw FixtureMissError(fmt::format("no recorded response for {} request in stage '{}' (problem {})",
                                       hash.substr(0, 12), scope.stage, scope.problem_id));

  ChatResponse response = send_with_retry(request);
  response.validate();
  auto rates = rates_.find(request.model_name);
  response.usage = (rates == rates_.end() ? ModelRates{} : rates->second)
                       .usage(response.usage.prompt_tokens, response.usage.completion_tokens);

  if (log_) log_->append(ProviderCallEvent{scope, hash, json(request), json(response), response.usage});
  if (use_cache) {
    std::lock_guard lock(cache_mutex_);
    cache_.emplace(hash, response);
  }
  return response;
}

std::shared_ptr<Transport> make_transport(const RunConfig& config) {
  if (config.model_name == "replay") {
    if (!config.replay_fixture) throw ConfigError("model 'replay' requires replay_fixture in the config");
    return std::make_shared<ReplayTransport>(ReplayFixture::load(*config.replay_fixture));
  }
  const bool gemini = config.model_name.rfind("gemini", 0) == 0;
  const std::string adapter = gemini ? "gemini" : "openai";
  EndpointConfig endpoint;
  if (auto it = config.endpoints.find(adapter); it != config.endpoints.end()) endpoint = it->second;
  if (endpoint.base_url.empty())
    endpoint.base_url = gemini ? "https://generativelanguage.googleapis.com" : "https://api.openai.com";
  if (endpoint.api_key_env.empty()) endpoint.api_key_env = gemini ? "GEMINI_API_KEY" : "OPENAI_API_KEY";
  const char* key = std::getenv(endpoint.api_key_env.c_str());
  HttpTransport::Options options{endpoint.base_url, key ? key : "", config.max_in_flight};
  return std::make_shared<HttpTransport>(gemini ? WireFormat::Gemini : WireFormat::OpenAI, options);
}

}  // namespace ttscale
