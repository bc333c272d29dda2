// SPDX-License-Identifier: Apache-2.0
//
// Deterministic canned responses. A fixture file holds one entry per line:
//
//   {"request_hash": "<sha256>", "response": {...}}   exact-request queue
//   {"request_hash": "*", "response": {...}}          fallback queue
//   {"match": ["a", "b"], "response": {...}}          ordered-substring queue
//
// Entries sharing a key form a FIFO queue in file order. Lookup tries the
// exact queue, then match queues in file order (a match entry applies when
// its strings occur in that order in request_text()), then the fallback.
#pragma once

#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "ttscale/provider.hpp"

namespace ttscale {

class ReplayFixture {
 public:
  static ReplayFixture load(const std::string& path);
  static ReplayFixture parse(const std::string& text);

  void add_exact(const std::string& hash, ChatResponse response);
  void add_match(std::vector<std::string> pattern, ChatResponse response);
  void add_fallback(ChatResponse response);

  /// Pops the response for this request, or nullopt on a miss.
  std::optional<ChatResponse> take(const ChatRequest& request);

  std::size_t remaining() const;

 private:
  struct MatchQueue {
    std::vector<std::string> pattern;
    std::deque<ChatResponse> responses;
  };

  std::unique_ptr<std::mutex> mutex_ = std::make_unique<std::mutex>();
  std::map<std::string, std::deque<ChatResponse>> exact_;
  std::vector<MatchQueue> matches_;
  std::deque<ChatResponse> fallback_;
};

/// True when each pattern string occurs in `text`, in order, without overlap.
bool matches_in_order(const std::string& text, const std::vector<std::string>& pattern);

class ReplayTransport final : public Transport {
 public:
  explicit ReplayTransport(ReplayFixture fixture) : fixture_(std::move(fixture)) {}

  ChatResponse send(const ChatRequest& request) override;

  std::size_t remaining() const { return fixture_.remaining(); }

 private:
  ReplayFixture fixture_;
};

}  // namespace ttscale
