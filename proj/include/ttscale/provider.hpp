// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "ttscale/chat.hpp"
#include "ttscale/config.hpp"
#include "ttscale/run_log.hpp"

namespace ttscale {

/// One way of turning a request into a response: HTTP, replay fixture, ...
/// Implementations throw TransportError (transient or not), FixtureMissError
/// or MalformedResponseError. Token counts in the returned usage are used;
/// cost is recomputed by the client.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual ChatResponse send(const ChatRequest& request) = 0;
};

/// Transport that never answers; used for cache-only (offline) clients.
class OfflineTransport final : public Transport {
 public:
  ChatResponse send(const ChatRequest& request) override;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{500};
  std::chrono::milliseconds max_delay{8000};
  std::uint64_t jitter_seed = 0;

  static RetryPolicy from(const RetryConfig& config);
  /// Delay before retry number `attempt` (1-based): base·2^(attempt-1),
  /// capped, scaled by a jitter factor in [0.5, 1].
  std::chrono::milliseconds delay(int attempt) const;
};

enum class CallMode {
  Live,       // cache first, then the transport
  CacheOnly,  // cache or FixtureMissError
};

/// Provider front end: caching, retries, cost accounting and logging of
/// every transport response as a ProviderCall event. Safe to call from
/// several threads.
class ChatClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  ChatClient(std::shared_ptr<Transport> transport, RetryPolicy retry,
             std::map<std::string, ModelRates> rates, bool cache_enabled, RunLog* log);

  ChatResponse complete(const ChatRequest& request, const Scope& scope,
                        CallMode mode = CallMode::Live);

  /// Seeds the cache with the responses of earlier ProviderCall events.
  void warm_cache(const std::vector<Event>& events);

  /// Whether a request is eligible for caching: caching on, and not an
  /// intentionally stochastic request (temperature > 0 without seed).
  bool cacheable(const ChatRequest& request) const;

  /// Replaces the sleep used between retries (tests).
  void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }

  std::size_t cache_size() const;

 private:
  ChatResponse send_with_retry(const ChatRequest& request);

  std::shared_ptr<Transport> transport_;
  RetryPolicy retry_;
  std::map<std::string, ModelRates> rates_;
  bool cache_enabled_;
  RunLog* log_;
  Sleeper sleeper_;

  mutable std::mutex cache_mutex_;
  std::map<std::string, ChatResponse> cache_;
};

/// Builds the transport for `config.model_name`: "replay" uses the replay
/// fixture, names starting with "gemini" the Gemini adapter, anything else
/// the OpenAI-style chat-completions adapter.
std::shared_ptr<Transport> make_transport(const RunConfig& config);

}  // namespace ttscale
