// SPDX-License-Identifier: Apache-2.0
//
// Stage-2 scoring of candidates: the simple self-grading verifier and the
// symbolic grading agent that checks derivation steps with executed scripts.
#pragma once

#include <string>
#include <vector>

#include "ttscale/evaluation.hpp"
#include "ttscale/prompts.hpp"
#include "ttscale/provider.hpp"
#include "ttscale/sandbox.hpp"

namespace ttscale {

inline constexpr const char* kSympyTool = "run_sympy_script";

struct VerifySettings {
  std::string model_name = "replay";
  double temperature = 1.0;
  std::uint64_t seed = 0;
  int k_verif = 10;
  int max_tool_calls = 32;
  int max_agent_turns = 48;
  EvalSettings limits;
};

ToolSchema sympy_tool_schema();

/// (1/k)·Σ overall_score; 0 for an empty list.
double mean_score(const std::vector<Verdict>& verdicts);

/// Which of the three simple-verifier prompts repetition `rep` uses.
int simple_prompt_choice(std::uint64_t seed, int candidate, int rep);

/// One simple-verifier repetition. Unreadable replies and provider errors
/// score 0 with `failure` set.
Verdict simple_verify_once(const Problem& problem, const Candidate& candidate, int rep, const VerifySettings& settings,
                           ChatClient& client, const PromptLibrary& prompts, const Scope& scope,
                           CallMode mode = CallMode::Live);

ScoredCandidate simple_verify(const Problem& problem, const Candidate& candidate, const VerifySettings& settings,
                              ChatClient& client, const PromptLibrary& prompts, const Scope& scope,
                              CallMode mode = CallMode::Live);

/// One grading-agent session. Tool calls run through `sandbox`; recorded
/// step outputs are replaced by the sandbox output of the same script.
Verdict symbolic_verify_once(const Problem& problem, const Candidate& candidate, int rep,
                             const VerifySettings& settings, ChatClient& client, SandboxClient& sandbox,
                             const PromptLibrary& prompts, const Scope& scope, CallMode mode = CallMode::Live,
                             ExecMode exec_mode = ExecMode::Live);

ScoredCandidate symbolic_verify(const Problem& problem, const Candidate& candidate, const VerifySettings& settings,
                                ChatClient& client, SandboxClient& sandbox, const PromptLibrary& prompts,
                                const Scope& scope, CallMode mode = CallMode::Live,
                                ExecMode exec_mode = ExecMode::Live);

struct UsageStats {
  double avg_steps = 0;
  double frac_steps_with_script = 0;
  double frac_steps_correct = 0;
  double frac_problems_tiebroken = 0;
  std::size_t verdicts = 0;
  std::size_t steps = 0;
  std::size_t problems = 0;
};

void to_json(json& j, const UsageStats& stats);

/// Symbolic-verifier statistics over a run: step counts from symbolic
/// Verdict events, tie-break share from symbolic Selection events. Throws
/// EmptyRunError when the run holds no symbolic verdicts.
UsageStats usage_stats(const std::vector<Event>& events);

}  // namespace ttscale
