// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <random>

#include "test_support.hpp"
#include "ttscale/errors.hpp"
#include "ttscale/verifier.hpp"

namespace ttscale {
namespace {

using testing::LambdaTransport;
using testing::text_response;
using testing::tool_response;

Candidate candidate_with_reasoning(int index) {
  Candidate c = testing::with_outputs(index, testing::numbers({1, 4, 9, 16, 25}), true);
  c.reasoning = "We square x.\n```python\ndef f(x):\n    return x**2\n```\n";
  return c;
}

VerifySettings settings(int k) {
  VerifySettings s;
  s.k_verif = k;
  s.seed = 42;
  return s;
}

TEST(MeanScore, Basics) {
  EXPECT_EQ(mean_score({}), 0.0);
  std::vector<Verdict> v(4);
  v[0].overall_score = 1;
  v[3].overall_score = 1;
  EXPECT_DOUBLE_EQ(mean_score(v), 0.5);
}

TEST(MeanScore, PermutationInvariantAndMonotone) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Verdict> v(1 + rng() % 12);
    int ones = 0;
    for (auto& x : v) ones += (x.overall_score = static_cast<int>(rng() % 2));
    const double m = mean_score(v);
    EXPECT_DOUBLE_EQ(m, static_cast<double>(ones) / static_cast<double>(v.size()));
    std::shuffle(v.begin(), v.end(), rng);
    EXPECT_EQ(mean_score(v), m);
    auto zero = std::find_if(v.begin(), v.end(), [](const Verdict& x) { return x.overall_score == 0; });
    if (zero != v.end()) {
      zero->overall_score = 1;
      EXPECT_GT(mean_score(v), m);
    }
  }
}

TEST(SimplePromptChoice, SeededAndCoversAllThree) {
  std::set<int> seen;
  for (int c = 0; c < 10; ++c)
    for (int r = 0; r < 10; ++r) {
      const int choice = simple_prompt_choice(7, c, r);
      ASSERT_GE(choice, 0);
      ASSERT_LT(choice, 3);
      EXPECT_EQ(choice, simple_prompt_choice(7, c, r));
      seen.insert(choice);
    }
  EXPECT_EQ(seen.size(), 3u);
  int differs = 0;
  for (int r = 0; r < 30; ++r) differs += simple_prompt_choice(7, 0, r) != simple_prompt_choice(8, 0, r);
  EXPECT_GT(differs, 0);
}

TEST(SimpleVerify, SevenOfTen) {
  std::atomic<int> n{0};
  auto transport = std::make_shared<LambdaTransport>([&](const ChatRequest&) {
    return text_response(n++ < 7 ? R"({"is_solution_correct": "yes"})" : R"({"is_solution_correct": "no"})");
  });
  ChatClient client(transport, RetryPolicy{}, {}, false, nullptr);
  const auto prompts = PromptLibrary::bundled();
  const auto scored = simple_verify(testing::square_problem(), candidate_with_reasoning(2), settings(10), client,
                                    prompts, Scope::of("verify", "sq").with_candidate(2));
  EXPECT_EQ(scored.candidate_index, 2);
  EXPECT_EQ(scored.verdicts.size(), 10u);
  EXPECT_DOUBLE_EQ(scored.mean_score, 0.7);
  // each request is one of the three rendered simple-verifier prompts
  const auto requests = transport->requests();
  for (int rep = 0; rep < 10; ++rep) {
    const auto choice = simple_prompt_choice(42, 2, rep);
    const auto expected = prompts.render(prompt_names::kSimpleVerifier[choice],
                                         {{"question", "Square the input."},
                                          {"answer_requirements", "def f(x) -> float"},
                                          {"detailed_solution", candidate_with_reasoning(2).reasoning}});
    EXPECT_EQ(testing::last_user(requests[rep]), expected);
  }
}

TEST(SimpleVerify, FailuresScoreZero) {
  auto garbage = std::make_shared<LambdaTransport>([](const ChatRequest&) { return text_response("hmm"); });
  ChatClient client(garbage, RetryPolicy{}, {}, false, nullptr);
  const auto prompts = PromptLibrary::bundled();
  const auto scored =
      simple_verify(testing::square_problem(), candidate_with_reasoning(0), settings(4), client, prompts, Scope::of("v", "sq"));
  EXPECT_EQ(scored.mean_score, 0.0);
  for (const auto& v : scored.verdicts) {
    ASSERT_TRUE(v.failure);
    EXPECT_EQ(v.failure->rfind("parse_failure", 0), 0u);
    EXPECT_EQ(v.usage.prompt_tokens, 10);
  }

  auto down = std::make_shared<LambdaTransport>([](const ChatRequest&) -> ChatResponse {
    throw TransportError("400 bad request", false);
  });
  ChatClient failing(down, RetryPolicy{}, {}, false, nullptr);
  const auto v = simple_verify_once(testing::square_problem(), candidate_with_reasoning(0), 0, settings(1), failing,
                                    prompts, Scope::of("v", "sq"));
  EXPECT_EQ(v.overall_score, 0);
  ASSERT_TRUE(v.failure);
  EXPECT_EQ(v.failure->rfind("provider_error", 0), 0u);
}

std::string verdict_json(const std::string& script, const std::string& stdout_text, int score) {
  return json{{"sympy_verification",
               {{{"step_number", 1},
                 {"calculation_description", "check"},
                 {"sympy_script_content", script},
                 {"script_stdout", stdout_text},
                 {"script_stderr", ""},
                 {"is_correct", score == 1},
                 {"error_explanation", ""}}}},
              {"overall_score", score},
              {"general_feedback", "ok"}}
      .dump();
}

bool last_is_tool(const ChatRequest& r) { return r.messages.back().role == Role::Tool; }

TEST(SymbolicVerify, ToolLoopAndStdoutReconciliation) {
  auto transport = std::make_shared<LambdaTransport>([](const ChatRequest& r) {
    if (!last_is_tool(r)) return tool_response("checking", "print(2+2)", "call-1");
    // the model misreports the output; the harness keeps the real one
    return text_response(verdict_json("print(2+2)", "5", 1), 30, 12);
  });
  int executions = 0;
  auto sandbox_impl = std::make_shared<FunctionSandbox>([&](const SandboxRequest& q) {
    ++executions;
    EXPECT_EQ(q.script, "print(2+2)");
    EXPECT_TRUE(q.argv.empty());
    return ExecutionResult{"4\n", "", 0, false, 0.1};
  });
  RunLog log;
  ChatClient client(transport, RetryPolicy{}, {}, false, &log);
  SandboxClient sandbox(sandbox_impl, &log);
  const auto prompts = PromptLibrary::bundled();
  const auto v = symbolic_verify_once(testing::square_problem(), candidate_with_reasoning(1), 0, settings(1), client,
                                      sandbox, prompts, Scope::of("verify", "sq").with_candidate(1));
  EXPECT_FALSE(v.failure);
  EXPECT_EQ(v.overall_score, 1);
  EXPECT_EQ(v.tool_call_count, 1);
  EXPECT_EQ(executions, 1);
  ASSERT_EQ(v.step_checks.size(), 1u);
  EXPECT_EQ(v.step_checks[0].script_stdout, "4\n");
  // usage sums both turns: 20+30 prompt, 8+12 completion
  EXPECT_EQ(v.usage.prompt_tokens, 50);
  EXPECT_EQ(v.usage.completion_tokens, 20);

  const auto requests = transport->requests();
  ASSERT_EQ(requests.size(), 2u);
  EXPECT_EQ(requests[0].messages[0].role, Role::System);
  EXPECT_EQ(requests[0].messages[0].content, prompts.text(prompt_names::kGraderAgent));
  ASSERT_EQ(requests[0].tool_schemas.size(), 1u);
  EXPECT_EQ(requests[0].tool_schemas[0].name, kSympyTool);
  const auto& tool_msg = requests[1].messages.back();
  EXPECT_EQ(tool_msg.tool_result_id, "call-1");
  EXPECT_EQ(json::parse(tool_msg.content), (json{{"stdout", "4\n"}, {"stderr", ""}}));
  // turn scopes are distinct in the log
  std::set<int> turns;
  for (const auto& e : log.events())
    if (const auto* p = std::get_if<ProviderCallEvent>(&e.payload)) turns.insert(p->scope.turn.value());
  EXPECT_EQ(turns, (std::set<int>{0, 1}));
}

TEST(SymbolicVerify, UnknownToolIsReportedNotCounted) {
  auto transport = std::make_shared<LambdaTransport>([](const ChatRequest& r) {
    if (!last_is_tool(r)) {
      auto resp = tool_response("", "x", "c");
      resp.tool_calls[0].tool_name = "shell";
      return resp;
    }
    EXPECT_NE(r.messages.back().content.find("unknown tool"), std::string::npos);
    return text_response(verdict_json("x", "", 0));
  });
  ChatClient client(transport, RetryPolicy{}, {}, false, nullptr);
  SandboxClient sandbox(std::make_shared<FunctionSandbox>([](const SandboxRequest&) -> ExecutionResult {
                          ADD_FAILURE() << "sandbox must not run";
                          return {};
                        }),
                        nullptr);
  const auto v = symbolic_verify_once(testing::square_problem(), candidate_with_reasoning(0), 0, settings(1), client,
                                      sandbox, PromptLibrary::bundled(), Scope::of("v", "sq"));
  EXPECT_EQ(v.tool_call_count, 0);
  EXPECT_FALSE(v.failure);
}

TEST(SymbolicVerify, Caps) {
  auto always_tool = std::make_shared<LambdaTransport>(
      [](const ChatRequest& r) { return tool_response("", "print(" + std::to_string(r.messages.size()) + ")", "c"); });
  SandboxClient sandbox(
      std::make_shared<FunctionSandbox>([](const SandboxRequest&) { return ExecutionResult{"1\n", "", 0, false, 0}; }),
      nullptr);
  const auto prompts = PromptLibrary::bundled();
  {
    ChatClient client(always_tool, RetryPolicy{}, {}, false, nullptr);
    auto s = settings(1);
    s.max_tool_calls = 3;
    const auto v = symbolic_verify_once(testing::square_problem(), candidate_with_reasoning(0), 0, s, client, sandbox,
                                        prompts, Scope::of("v", "sq"));
    EXPECT_EQ(v.overall_score, 0);
    ASSERT_TRUE(v.failure);
    EXPECT_EQ(v.failure->rfind("tool_call_cap", 0), 0u);
    EXPECT_EQ(v.tool_call_count, 3);
  }
  {
    ChatClient client(always_tool, RetryPolicy{}, {}, false, nullptr);
    auto s = settings(1);
    s.max_agent_turns = 2;
    const auto v = symbolic_verify_once(testing::square_problem(), candidate_with_reasoning(0), 0, s, client, sandbox,
                                        prompts, Scope::of("v", "sq"));
    ASSERT_TRUE(v.failure);
    EXPECT_EQ(v.failure->rfind("agent_turn_cap", 0), 0u);
    EXPECT_EQ(v.tool_call_count, 2);
  }
}

TEST(SymbolicVerify, UnparsableVerdictScoresZero) {
  auto transport = std::make_shared<LambdaTransport>([](const ChatRequest&) { return text_response("{}"); });
  ChatClient client(transport, RetryPolicy{}, {}, false, nullptr);
  SandboxClient sandbox(nullptr, nullptr);
  const auto scored = symbolic_verify(testing::square_problem(), candidate_with_reasoning(0), settings(3), client,
                                      sandbox, PromptLibrary::bundled(), Scope::of("v", "sq"));
  EXPECT_EQ(scored.mean_score, 0.0);
  for (const auto& v : scored.verdicts) {
    ASSERT_TRUE(v.failure);
    EXPECT_NE(v.failure->find("overall_score"), std::string::npos);
  }
}

Event verdict_event(const std::string& verifier, std::vector<std::pair<std::string, bool>> steps) {
  Verdict v;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    StepCheck s;
    s.step_number = static_cast<int>(i) + 1;
    s.script_content = steps[i].first;
    s.is_correct = steps[i].second;
    v.step_checks.push_back(s);
  }
  return Event{0, "", VerdictEvent{Scope::of("verify", "p"), verifier, v}};
}

Event selection_event(const std::string& problem, Strategy strategy, bool tournament) {
  SelectionOutcome o;
  o.strategy = strategy;
  o.tournament_ran = tournament;
  return Event{0, "", SelectionEvent{Scope::of("select", problem), o}};
}

TEST(UsageStats, Fractions) {
  std::vector<Event> events = {
      verdict_event("symbolic", {{"print(1)", true}, {"  \n", false}, {"# comment", true}}),
      verdict_event("symbolic", {}),
      verdict_event("simple", {{"ignored", true}}),
      selection_event("a", Strategy::SymbolicVerifier, true),
      selection_event("b", Strategy::SymbolicVerifier, false),
      selection_event("c", Strategy::SymbolicVerifier, false),
      selection_event("d", Strategy::SimpleVerifier, true),
  };
  const auto s = usage_stats(events);
  EXPECT_EQ(s.verdicts, 2u);
  EXPECT_EQ(s.steps, 3u);
  EXPECT_DOUBLE_EQ(s.avg_steps, 1.5);
  EXPECT_DOUBLE_EQ(s.frac_steps_with_script, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.frac_steps_correct, 2.0 / 3.0);
  EXPECT_EQ(s.problems, 3u);
  EXPECT_DOUBLE_EQ(s.frac_problems_tiebroken, 1.0 / 3.0);
}

TEST(UsageStats, EmptyRun) {
  EXPECT_THROW(usage_stats({}), EmptyRunError);
  EXPECT_THROW(usage_stats({verdict_event("simple", {{"x", true}})}), EmptyRunError);
}

}  // namespace
}  // namespace ttscale
