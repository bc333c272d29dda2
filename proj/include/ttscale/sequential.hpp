// SPDX-License-Identifier: Apache-2.0
//
// Multi-round reasoning: each round reasons from the carried summary of the
// previous rounds, then a summarization call concludes it into a program.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ttscale/evaluation.hpp"
#include "ttscale/prompts.hpp"
#include "ttscale/provider.hpp"

namespace ttscale {

struct RoundState {
  int round_index = 0;
  std::string accumulated_thinking;
  std::string round_reasoning;
  std::string summary;
  std::optional<std::string> synthesized_program;
  bool extraction_failed = false;
  Candidate round_candidate;
  TokenUsage usage;
};

struct SequentialSettings {
  std::string model_name = "replay";
  double temperature = 1.0;
  std::uint64_t seed = 0;
  int n_iter = 4;
  std::string general_instructions;
  std::size_t summary_char_budget = 20000;
  EvalSettings limits;
};

struct RoundSummary {
  std::string summary;
  std::optional<std::string> program;
  TokenUsage usage;
};

/// One summarization call after `round_messages` (the round's prompt) and
/// the assistant's `reasoning`.
RoundSummary summarize_round(const std::vector<Message>& round_messages, const std::string& reasoning,
                             const std::string& code_requirements, const SequentialSettings& settings,
                             std::int64_t seed, ChatClient& client, const PromptLibrary& prompts,
                             const Scope& scope, CallMode mode = CallMode::Live);

/// Keeps the last `budget` bytes, never splitting a UTF-8 sequence.
std::string keep_tail(const std::string& text, std::size_t budget);

/// Runs n_iter rounds for one attempt; exactly 2·n_iter provider calls.
std::vector<RoundState> run_sequential(const Problem& problem, const SequentialSettings& settings, int attempt,
                                       ChatClient& client, SandboxClient& sandbox, const PromptLibrary& prompts,
                                       const Scope& scope, CallMode mode = CallMode::Live,
                                       ExecMode exec_mode = ExecMode::Live);

}  // namespace ttscale
