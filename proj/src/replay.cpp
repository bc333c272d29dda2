// SPDX-License-Identifier: Apache-2.0
#include "ttscale/replay.hpp"

#include <fstream>
#include <sstream>

#include <fmt/core.h>

#include "ttscale/errors.hpp"

namespace ttscale {

bool matches_in_order(const std::string& text, const std::vector<std::string>& pattern) {
  std::size_t pos = 0;
  for (const auto& piece : pattern) {
    const auto found = text.find(piece, pos);
    if (found == std::string::npos) return false;
    pos = found + piece.size();
  }
  return true;
}

ReplayFixture ReplayFixture::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open replay fixture '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse(buffer.str());
  } catch (const Error& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
}

ReplayFixture ReplayFixture::parse(const std::string& text) {
  ReplayFixture fixture;
  std::istringstream in(text);
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto entry = json::parse(line);
      auto response = entry.at("response").get<ChatResponse>();
      response.validate();
      if (entry.contains("match")) {
        fixture.add_match(entry["match"].get<std::vector<std::string>>(), std::move(response));
      } else {
        const auto key = entry.at("request_hash").get<std::string>();
        if (key == "*")
          fixture.add_fallback(std::move(response));
        else
          fixture.add_exact(key, std::move(response));
      }
    } catch (const json::exception& e) {
      throw ConfigError(fmt::format("fixture line {}: {}", line_number, e.what()));
    }
  }
  return fixture;
}

void ReplayFixture::add_exact(const std::string& hash, ChatResponse response) {
  std::lock_guard lock(*mutex_);
  exact_[hash].push_back(std::move(response));
}

void ReplayFixture::add_match(std::vector<std::string> pattern, ChatResponse response) {
  std::lock_guard lock(*mutex_);
  for (auto& queue : matches_) {
    if (queue.pattern == pattern) {
      queue.responses.push_back(std::move(response));
      return;
    }
  }
  matches_.push_back(MatchQueue{std::move(pattern), {std::move(response)}});
}

void ReplayFixture::add_fallback(ChatResponse response) {
  std::lock_guard lock(*mutex_);
  fallback_.push_back(std::move(response));
}

std::optional<ChatResponse> ReplayFixture::take(const ChatRequest& request) {
  std::lock_guard lock(*mutex_);
  auto pop = [](std::deque<ChatResponse>& queue) {
    ChatResponse front = std::move(queue.front());
    queue.pop_front();
    return front;
  };
  if (auto it = exact_.find(request_hash(request)); it != exact_.end() && !it->second.empty())
    return pop(it->second);
  if (!matches_.empty()) {
    const std::string text = request_text(request);
    for (auto& queue : matches_)
      if (!queue.responses.empty() && matches_in_order(text, queue.pattern)) return pop(queue.responses);
  }
  if (!fallback_.empty()) return pop(fallback_);
  return std::nullopt;
}

std::size_t ReplayFixture::remaining() const {
  std::lock_guard lock(*mutex_);
  std::size_t total = fallback_.size();
  for (const auto& [_, queue] : exact_) total += queue.size();
  for (const auto& queue : matches_) total += queue.responses.size();
  return total;
}

ChatResponse ReplayTransport::send(const ChatRequest& request) {
  if (auto response = fixture_.take(request)) return *std::move(response);
  throw FixtureMissError("replay fixture has no response for request " + request_hash(request));
}

}  // namespace ttscale
