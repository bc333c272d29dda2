// SPDX-License-Identifier: Apache-2.0
#include "ttscale/verifier.hpp"

#include <map>
#include <set>

#include <fmt/core.h>

#include "ttscale/errors.hpp"
#include "ttscale/random.hpp"
#include "ttscale/verdict.hpp"

namespace ttscale {

namespace {

// Request seeds stay within 31 bits; some vendors reject larger values.
std::int64_t request_seed(std::uint64_t seed, std::string_view tag, std::initializer_list<std::uint64_t> parts) {
  return static_cast<std::int64_t>(derive_seed(seed, tag, parts) >> 33);
}

Verdict zero_verdict(std::string failure, TokenUsage usage = {}, int tool_calls = 0) {
  Verdict v;
  v.overall_score = 0;
  v.failure = std::move(failure);
  v.usage = usage;
  v.tool_call_count = tool_calls;
  return v;
}

}  // namespace

ToolSchema sympy_tool_schema() {
  return ToolSchema{
      kSympyTool,
      "Execute a Python (SymPy) script and return its standard output and standard error.",
      json{{"type", "object"},
           {"properties", {{"script", {{"type", "string"}, {"description", "Complete Python script to run."}}}}},
           {"required", {"script"}}}};
}

double mean_score(const std::vector<Verdict>& verdicts) {
  if (verdicts.empty()) return 0.0;
  int sum = 0;
  for (const auto& v : verdicts) sum += v.overall_score;
  return static_cast<double>(sum) / static_cast<double>(verdicts.size());
}

int simple_prompt_choice(std::uint64_t seed, int candidate, int rep) {
  std::mt19937_64 rng(derive_seed(seed, "simple_prompt", {static_cast<std::uint64_t>(candidate),
                                                          static_cast<std::uint64_t>(rep)}));
  return static_cast<int>(bounded(rng, 3));
}

Verdict simple_verify_once(const Problem& problem, const Candidate& candidate, int rep, const VerifySettings& settings,
                           ChatClient& client, const PromptLibrary& prompts, const Scope& scope, CallMode mode) {
  const int choice = simple_prompt_choice(settings.seed, candidate.index, rep);
  ChatRequest request;
  request.model_name = settings.model_name;
  request.temperature = settings.temperature;
  request.seed = request_seed(settings.seed, "simple",
                              {static_cast<std::uint64_t>(candidate.index), static_cast<std::uint64_t>(rep)});
  request.messages.push_back(Message{Role::User,
                                     prompts.render(prompt_names::kSimpleVerifier[choice],
                                                    {{"question", problem.statement},
                                                     {"answer_requirements", problem.answer_requirements},
                                                     {"detailed_solution", candidate.reasoning}}),
                                     std::nullopt,
                                     {}});
  ChatResponse response;
  try {
    response = client.complete(request, scope, mode);
  } catch (const TransportError& e) {
    return zero_verdict(std::string("provider_error: ") + e.what());
  } catch (const TransportExhaustedError& e) {
    return zero_verdict(std::string("provider_error: ") + e.what());
  } catch (const MalformedResponseError& e) {
    return zero_verdict(std::string("provider_error: ") + e.what());
  }
  const auto answer = parse_simple_verdict(response.content.value_or(""));
  if (!answer) return zero_verdict("parse_failure: no is_solution_correct yes/no in reply", response.usage);
  Verdict v;
  v.overall_score = *answer ? 1 : 0;
  v.usage = response.usage;
  return v;
}

ScoredCandidate simple_verify(const Problem& problem, const Candidate& candidate, const VerifySettings& settings,
                              ChatClient& client, const PromptLibrary& prompts, const Scope& scope, CallMode mode) {
  ScoredCandidate scored{candidate.index, {}, 0.0};
  for (int rep = 0; rep < settings.k_verif; ++rep)
    scored.verdicts.push_back(
        simple_verify_once(problem, candidate, rep, settings, client, prompts, scope.with_repetition(rep), mode));
  scored.mean_score = mean_score(scored.verdicts);
  return scored;
}

Verdict symbolic_verify_once(const Problem& problem, const Candidate& candidate, int rep,
                             const VerifySettings& settings, ChatClient& client, SandboxClient& sandbox,
                             const PromptLibrary& prompts, const Scope& scope, CallMode mode, ExecMode exec_mode) {
  ChatRequest request;
  request.model_name = settings.model_name;
  request.temperature = settings.temperature;
  request.seed = request_seed(settings.seed, "symbolic",
                              {static_cast<std::uint64_t>(candidate.index), static_cast<std::uint64_t>(rep)});
  request.tool_schemas.push_back(sympy_tool_schema());
  request.messages.push_back(Message{Role::System, prompts.text(prompt_names::kGraderAgent), std::nullopt, {}});
  request.messages.push_back(Message{Role::User,
                                     prompts.render(prompt_names::kGraderRequest,
                                                    {{"problem_statement", problem.statement},
                                                     {"answer_requirements", problem.answer_requirements},
                                                     {"solution", candidate.reasoning}}),
                                     std::nullopt,
                                     {}});

  TokenUsage usage;
  int tool_calls = 0;
  std::map<std::string, ExecutionResult> executed;  // script text -> sandbox output

  for (int turn = 0; turn < settings.max_agent_turns; ++turn) {
    const Scope turn_scope = scope.with_turn(turn);
    ChatResponse response;
    try {
      response = client.complete(request, turn_scope, mode);
    } catch (const TransportError& e) {
      return zero_verdict(std::string("provider_error: ") + e.what(), usage, tool_calls);
    } catch (const TransportExhaustedError& e) {
      return zero_verdict(std::string("provider_error: ") + e.what(), usage, tool_calls);
    } catch (const MalformedResponseError& e) {
      return zero_verdict(std::string("provider_error: ") + e.what(), usage, tool_calls);
    }
    usage += response.usage;

    if (response.tool_calls.empty()) {
      Verdict verdict;
      try {
        verdict = parse_verdict(response.content.value_or(""));
      } catch (const VerdictParseError& e) {
        return zero_verdict(std::string("parse_failure: ") + e.what(), usage, tool_calls);
      }
      for (auto& step : verdict.step_checks) {
        if (auto it = executed.find(step.script_content); it != executed.end()) {
          step.script_stdout = it->second.stdout_text;
          step.script_stderr = it->second.stderr_text;
        }
      }
      verdict.usage = usage;
      verdict.tool_call_count = tool_calls;
      return verdict;
    }

    request.messages.push_back(
        Message{Role::Assistant, response.content.value_or(""), std::nullopt, response.tool_calls});
    for (std::size_t c = 0; c < response.tool_calls.size(); ++c) {
      const auto& call = response.tool_calls[c];
      json result;
      if (call.tool_name != kSympyTool) {
        result = json{{"stdout", ""}, {"stderr", fmt::format("unknown tool '{}'", call.tool_name)}};
      } else if (!call.arguments.contains("script") || !call.arguments["script"].is_string()) {
        result = json{{"stdout", ""}, {"stderr", "missing string argument 'script'"}};
      } else {
        if (tool_calls >= settings.max_tool_calls)
          return zero_verdict(fmt::format("tool_call_cap: more than {} scripts requested", settings.max_tool_calls),
                              usage, tool_calls);
        const auto script = call.arguments["script"].get<std::string>();
        SandboxRequest exec{script, settings.limits.timeout_s, settings.limits.mem_limit_mb, {}};
        const auto output = sandbox.run(exec, turn_scope.with_input(static_cast<int>(c)), exec_mode);
        ++tool_calls;
        executed[script] = output;
        result = json{{"stdout", output.stdout_text}, {"stderr", output.stderr_text}};
      }
      request.messages.push_back(Message{Role::Tool, result.dump(), call.call_id, {}});
    }
  }
  return zero_verdict(fmt::format("agent_turn_cap: no verdict after {} turns", settings.max_agent_turns), usage,
                      tool_calls);
}

ScoredCandidate symbolic_verify(const Problem& problem, const Candidate& candidate, const VerifySettings& settings,
                                ChatClient& client, SandboxClient& sandbox, const PromptLibrary& prompts,
                                const Scope& scope, CallMode mode, ExecMode exec_mode) {
  ScoredCandidate scored{candidate.index, {}, 0.0};
  for (int rep = 0; rep < settings.k_verif; ++rep)
    scored.verdicts.push_back(symbolic_verify_once(problem, candidate, rep, settings, client, sandbox, prompts,
                                                   scope.with_repetition(rep), mode, exec_mode));
  scored.mean_score = mean_score(scored.verdicts);
  return scored;
}

void to_json(json& j, const UsageStats& stats) {
  j = json{{"avg_steps", stats.avg_steps},
           {"frac_steps_with_script", stats.frac_steps_with_script},
           {"frac_steps_correct", stats.frac_steps_correct},
           {"frac_problems_tiebroken", stats.frac_problems_tiebroken},
           {"verdicts", stats.verdicts},
           {"steps", stats.steps},
           {"problems", stats.problems}};
}

UsageStats usage_stats(const std::vector<Event>& events) {
  UsageStats stats;
  std::size_t scripted = 0, correct = 0;
  std::map<std::string, bool> tiebroken;
  for (const auto& event : events) {
    if (const auto* v = std::get_if<VerdictEvent>(&event.payload)) {
      if (v->verifier != "symbolic") continue;
      ++stats.verdicts;
      for (const auto& step : v->verdict.step_checks) {
        ++stats.steps;
        if (step.script_content.find_first_not_of(" \t\r\n") != std::string::npos) ++scripted;
        if (step.is_correct) ++correct;
      }
    } else if (const auto* s = std::get_if<SelectionEvent>(&event.payload)) {
      if (s->outcome.strategy == Strategy::SymbolicVerifier)
        tiebroken[s->scope.problem_id] = s->outcome.tournament_ran;
    }
  }
  if (stats.verdicts == 0) throw EmptyRunError("no symbolic verdicts recorded in this run");
  stats.avg_steps = static_cast<double>(stats.steps) / static_cast<double>(stats.verdicts);
  if (stats.steps > 0) {
    stats.frac_steps_with_script = static_cast<double>(scripted) / static_cast<double>(stats.steps);
    stats.frac_steps_correct = static_cast<double>(correct) / static_cast<double>(stats.steps);
  }
  stats.problems = tiebroken.size();
  if (!tiebroken.empty()) {
    std::size_t broken = 0;
    for (const auto& [_, ran] : tiebroken) broken += ran ? 1 : 0;
    stats.frac_problems_tiebroken = static_cast<double>(broken) / static_cast<double>(tiebroken.size());
  }
  return stats;
}

}  // namespace ttscale
