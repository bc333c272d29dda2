// SPDX-License-Identifier: Apache-2.0
#include "ttscale/sequential.hpp"

#include "ttscale/errors.hpp"
#include "ttscale/random.hpp"

namespace ttscale {

namespace {

std::int64_t round_seed(const SequentialSettings& s, int attempt, int round, std::uint64_t kind) {
  return static_cast<std::int64_t>(
      derive_seed(s.seed, "sequential",
                  {static_cast<std::uint64_t>(attempt), static_cast<std::uint64_t>(round), kind}) >>
      33);
}

}  // namespace

std::string keep_tail(const std::string& text, std::size_t budget) {
  if (text.size() <= budget) return text;
  std::size_t start = text.size() - budget;
  while (start < text.size() && (static_cast<unsigned char>(text[start]) & 0xC0) == 0x80) ++start;
  return text.substr(start);
}

RoundSummary summarize_round(const std::vector<Message>& round_messages, const std::string& reasoning,
                             const std::string& code_requirements, const SequentialSettings& settings,
                             std::int64_t seed, ChatClient& client, const PromptLibrary& prompts,
                             const Scope& scope, CallMode mode) {
  if (reasoning.empty()) throw Error("summarize_round: empty reasoning");
  ChatRequest request;
  request.model_name = settings.model_name;
  request.temperature = settings.temperature;
  request.seed = seed;
  request.messages = round_messages;
  request.messages.push_back(Message{Role::Assistant, reasoning, std::nullopt, {}});
  request.messages.push_back(Message{
      Role::User, prompts.render(prompt_names::kSummarization, {{"code_requirements", code_requirements}}),
      std::nullopt, {}});
  const auto response = client.complete(request, scope, mode);
  const std::string content = response.content.value_or("");
  return RoundSummary{strip_code_fences(content), extract_program(content), response.usage};
}

std::vector<RoundState> run_sequential(const Problem& problem, const SequentialSettings& settings, int attempt,
                                       ChatClient& client, SandboxClient& sandbox, const PromptLibrary& prompts,
                                       const Scope& scope, CallMode mode, ExecMode exec_mode) {
  if (settings.n_iter < 1) throw ConfigError("n_iter must be >= 1");
  std::vector<RoundState> rounds;
  std::string accumulated;
  for (int r = 0; r < settings.n_iter; ++r) {
    const Scope round_scope = scope.with_attempt(attempt).with_round(r);
    std::vector<Message> messages;
    if (r == 0) {
      if (!settings.general_instructions.empty())
        messages.push_back(Message{Role::System, settings.general_instructions, std::nullopt, {}});
      messages.push_back(Message{Role::User,
                                 prompts.render(prompt_names::kMultiRoundInitial,
                                                {{"problem_statement", problem.statement}}),
                                 std::nullopt,
                                 {}});
    } else {
      messages.push_back(Message{Role::User,
                                 prompts.render(prompt_names::kMultiRoundSubsequent,
                                                {{"general_instructions", settings.general_instructions},
                                                 {"problem_statement", problem.statement},
                                                 {"previous_conclusion", accumulated}}),
                                 std::nullopt,
                                 {}});
    }
    ChatRequest request;
    request.model_name = settings.model_name;
    request.temperature = settings.temperature;
    request.seed = round_seed(settings, attempt, r, 0);
    request.messages = messages;
    const auto response = client.complete(request, round_scope.with_turn(0), mode);

    RoundState state;
    state.round_index = r;
    state.round_reasoning = response.content.value_or("");
    state.usage = response.usage;

    // An empty reasoning still gets summarized; the prompt carries the problem.
    const std::string reasoning = state.round_reasoning.empty() ? std::string("(no reasoning)") : state.round_reasoning;
    auto summary = summarize_round(messages, reasoning, problem.answer_requirements, settings,
                                   round_seed(settings, attempt, r, 1), client, prompts, round_scope.with_turn(1),
                                   mode);
    state.usage += summary.usage;
    state.summary = summary.summary;
    state.synthesized_program = summary.program;
    state.extraction_failed = !summary.program;

    if (!state.summary.empty()) {
      if (!accumulated.empty()) accumulated += "\n\n";
      accumulated += state.summary;
    }
    accumulated = keep_tail(accumulated, settings.summary_char_budget);
    state.accumulated_thinking = accumulated;

    Candidate candidate;
    candidate.index = r;
    candidate.reasoning = state.round_reasoning;
    candidate.program_source = summary.program;
    candidate.generation_cost = state.usage;
    if (candidate.program_source) {
      try {
        candidate = evaluate_candidate(candidate, problem, sandbox, settings.limits, round_scope, exec_mode);
      } catch (const SandboxUnavailableError&) {
        candidate.is_correct = false;  // round scored wrong, loop goes on
      }
    }
    state.round_candidate = std::move(candidate);
    rounds.push_back(std::move(state));
  }
  return rounds;
}

}  // namespace ttscale
