// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include "ttscale/chat.hpp"
#include "ttscale/evaluation.hpp"
#include "ttscale/provider.hpp"
#include "ttscale/types.hpp"

namespace ttscale::testing {

inline std::string fixture_path(const std::string& relative) {
  return std::string(TTSCALE_FIXTURE_DIR) + "/" + relative;
}

inline std::string source_path(const std::string& relative) {
  return std::string(TTSCALE_SOURCE_DIR) + "/" + relative;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  static std::atomic<int> counter{0};
  auto dir = std::filesystem::temp_directory_path() /
             ("ttscale_" + name + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Transport answering through a callable; counts and records requests.
class LambdaTransport final : public Transport {
 public:
  using Fn = std::function<ChatResponse(const ChatRequest&)>;
  explicit LambdaTransport(Fn fn) : fn_(std::move(fn)) {}
  ChatResponse send(const ChatRequest& request) override {
    {
      std::lock_guard lock(mutex_);
      requests_.push_back(request);
    }
    return fn_(request);
  }
  std::vector<ChatRequest> requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
  }
  std::size_t calls() const {
    std::lock_guard lock(mutex_);
    return requests_.size();
  }

 private:
  Fn fn_;
  mutable std::mutex mutex_;
  std::vector<ChatRequest> requests_;
};

inline ChatResponse text_response(std::string content, std::int64_t prompt = 10, std::int64_t completion = 5) {
  ChatResponse r;
  r.content = std::move(content);
  r.usage.prompt_tokens = prompt;
  r.usage.completion_tokens = completion;
  return r;
}

inline ChatResponse tool_response(std::string content, std::string script, std::string call_id) {
  ChatResponse r;
  r.content = std::move(content);
  r.tool_calls.push_back(ToolCall{"run_sympy_script", json{{"script", std::move(script)}}, std::move(call_id)});
  r.finish_reason = FinishReason::ToolCall;
  r.usage.prompt_tokens = 20;
  r.usage.completion_tokens = 8;
  return r;
}

/// Last user message of a request.
inline std::string last_user(const ChatRequest& request) {
  for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it)
    if (it->role == Role::User) return it->content;
  return {};
}

inline Problem square_problem() {
  Problem p;
  p.id = "sq";
  p.statement = "Square the input.";
  p.answer_requirements = "def f(x) -> float";
  p.difficulty = 2;
  for (int x = 1; x <= 5; ++x) {
    p.test_inputs.push_back(json::array({x}));
    p.expected_outputs.push_back({static_cast<double>(x * x)});
  }
  p.entry_point = "f";
  return p;
}

inline OutputVector numbers(const std::vector<double>& values) {
  OutputVector v;
  for (double x : values) v.emplace_back(NumericTuple{x});
  return v;
}

inline Candidate with_outputs(int index, OutputVector outputs, std::optional<bool> correct = std::nullopt) {
  Candidate c;
  c.index = index;
  c.reasoning = "candidate " + std::to_string(index);
  c.program_source = "def f(x):\n    return x\n";
  c.output_vector = std::move(outputs);
  c.is_correct = correct;
  return c;
}

}  // namespace ttscale::testing
