// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <filesystem>
#include <random>

#include "test_support.hpp"
#include "ttscale/errors.hpp"
#include "ttscale/run_log.hpp"

namespace ttscale {
namespace {

struct EventGen {
  std::mt19937_64 rng;

  int small(int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); }
  bool coin() { return rng() & 1; }
  std::string text() {
    static const std::vector<std::string> pool = {"", "plain", "line\nbreak", "quote \" and \\ slash",
                                                  "unicode σ ν √", "tab\there", "{\"json\": true}"};
    return pool[small(static_cast<int>(pool.size()))];
  }
  double real() { return static_cast<double>(small(2000) - 1000) / 7.0; }

  Scope scope() {
    Scope s = Scope::of(coin() ? "verify" : "select", "P" + std::to_string(small(9)));
    if (coin()) s.candidate = small(50);
    if (coin()) s.repetition = small(10);
    if (coin()) s.round = small(4);
    if (coin()) s.attempt = small(3);
    if (coin()) s.turn = small(48);
    if (coin()) s.input = small(5);
    if (coin()) s.strategy = coin() ? "simple" : "symbolic";
    if (coin()) s.pair = std::make_pair(small(5), 5 + small(5));
    return s;
  }
  TokenUsage usage() { return TokenUsage{small(100000), small(100000), static_cast<Picos>(rng() >> 20)}; }
  StepCheck step() {
    return StepCheck{1 + small(12), text(), text(), text(), text(), coin(), text()};
  }
  Verdict verdict() {
    Verdict v;
    for (int i = small(4); i > 0; --i) v.step_checks.push_back(step());
    v.overall_score = small(2);
    v.general_feedback = text();
    v.usage = usage();
    v.tool_call_count = small(6);
    if (coin()) v.failure = text();
    return v;
  }
  SelectionOutcome outcome() {
    SelectionOutcome o;
    o.strategy = static_cast<Strategy>(small(4));
    if (coin()) o.chosen_index = small(50);
    o.solved = coin();
    for (int i = small(4); i > 0; --i) o.best_set.push_back(small(50));
    for (int i = small(3); i > 0; --i) o.matchup_wins[small(50)] = small(4);
    for (int i = small(3); i > 0; --i) {
      PairOutcome p{small(10), 10 + small(10), small(5), small(5), small(3), std::nullopt};
      if (coin()) p.winner = p.first;
      o.matchups.push_back(p);
    }
    o.tournament_ran = coin();
    return o;
  }
  EventPayload payload() {
    switch (small(4)) {
      case 0:
        return ProviderCallEvent{scope(), std::to_string(rng()), json{{"model", text()}, {"n", small(9)}},
                                 json{{"content", text()}}, usage()};
      case 1: {
        SandboxRequest req{text(), real(), small(4096), {text(), text()}};
        ExecutionResult res{text(), text(), small(3) - 1, coin(), real()};
        return ExecutionEvent{scope(), std::to_string(rng()), req, res};
      }
      case 2: return VerdictEvent{scope(), coin() ? "simple" : "symbolic", verdict()};
      default: return SelectionEvent{scope(), outcome()};
    }
  }
};

bool same_payload(const EventPayload& a, const EventPayload& b) {
  if (a.index() != b.index()) return false;
  if (event_scope(a) != event_scope(b)) return false;
  if (auto* x = std::get_if<ProviderCallEvent>(&a)) {
    auto& y = std::get<ProviderCallEvent>(b);
    return x->request_hash == y.request_hash && x->request == y.request && x->response == y.response &&
           x->usage == y.usage;
  }
  if (auto* x = std::get_if<ExecutionEvent>(&a)) {
    auto& y = std::get<ExecutionEvent>(b);
    return x->request_hash == y.request_hash && x->request.script == y.request.script &&
           x->request.timeout_s == y.request.timeout_s && x->request.mem_limit_mb == y.request.mem_limit_mb &&
           x->request.argv == y.request.argv && x->result == y.result;
  }
  if (auto* x = std::get_if<VerdictEvent>(&a)) {
    auto& y = std::get<VerdictEvent>(b);
    return x->verifier == y.verifier && x->verdict == y.verdict;
  }
  return std::get<SelectionEvent>(a).outcome == std::get<SelectionEvent>(b).outcome;
}

TEST(RunLog, RoundTripPropertyEveryVariant) {
  EventGen gen{std::mt19937_64(11)};
  std::array<int, 4> seen{};
  for (int i = 0; i < 2000; ++i) {
    Event e{static_cast<std::uint64_t>(i), "2026-01-01T00:00:00.000Z", gen.payload()};
    ++seen[e.payload.index()];
    const auto text = event_to_json(e).dump();
    const Event back = event_from_json(json::parse(text));
    ASSERT_EQ(back.seq, e.seq);
    ASSERT_EQ(back.timestamp, e.timestamp);
    ASSERT_TRUE(same_payload(back.payload, e.payload)) << text;
    ASSERT_EQ(event_to_json(back).dump(), text);
  }
  for (int count : seen) EXPECT_GT(count, 300);
}

TEST(RunLog, TypeFieldDiscriminates) {
  EventGen gen{std::mt19937_64(3)};
  const std::map<std::size_t, std::string> names = {
      {0, "provider_call"}, {1, "execution"}, {2, "verdict"}, {3, "selection"}};
  for (int i = 0; i < 40; ++i) {
    Event e{0, "", gen.payload()};
    EXPECT_EQ(event_to_json(e).at("type"), names.at(e.payload.index()));
  }
}

TEST(RunLog, AppendKeepsOrderAndPersists) {
  const auto dir = testing::scratch_dir("runlog");
  const auto path = (dir / "events.jsonl").string();
  EventGen gen{std::mt19937_64(5)};
  std::vector<EventPayload> payloads = {gen.payload(), gen.payload(), gen.payload()};
  {
    RunLog log(path);
    EXPECT_EQ(log.size(), 0u);
    for (std::size_t i = 0; i < payloads.size(); ++i) {
      log.append(payloads[i]);
      EXPECT_EQ(log.size(), i + 1);
      // durable before return
      EXPECT_EQ(RunLog::read_file(path).size(), i + 1);
    }
  }
  const auto back = RunLog::read_file(path);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].seq, i);
    EXPECT_TRUE(same_payload(back[i].payload, payloads[i]));
  }
  RunLog reopened(path);
  reopened.append(gen.payload());
  const auto all = reopened.events();
  ASSERT_EQ(all.size(), 4u);
  EXPECT_EQ(all[3].seq, 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_TRUE(same_payload(all[i].payload, payloads[i]));
}

TEST(RunLog, AppendUniqueSkipsSameTypeAndScope) {
  RunLog log;
  const Scope scope = Scope::of("select", "P1").with_strategy("majority");
  EXPECT_TRUE(log.append_unique(SelectionEvent{scope, {}}));
  EXPECT_FALSE(log.append_unique(SelectionEvent{scope, {}}));
  EXPECT_TRUE(log.append_unique(SelectionEvent{scope.with_attempt(1), {}}));
  EXPECT_TRUE(log.append_unique(VerdictEvent{scope, "simple", {}}));
  EXPECT_EQ(log.size(), 3u);
  EXPECT_TRUE(log.has_scope("selection", scope));
  EXPECT_FALSE(log.has_scope("execution", scope));
}

TEST(RunLog, StorageFailureIsFatal) {
  EXPECT_THROW(RunLog("/nonexistent-dir/for/sure/events.jsonl"), StorageError);
  const auto dir = testing::scratch_dir("corrupt");
  const auto path = (dir / "events.jsonl").string();
  std::ofstream(path) << "{\"type\": \"selection\"\n";
  EXPECT_THROW(RunLog::read_file(path), StorageError);
}

TEST(Usage, AdditionAssociativeAndCommutative) {
  std::mt19937_64 rng(17);
  EventGen gen{std::mt19937_64(19)};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<TokenUsage> items(1 + rng() % 30);
    for (auto& u : items) u = gen.usage();
    TokenUsage forward;
    for (const auto& u : items) forward += u;
    auto shuffled = items;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    TokenUsage backward;
    for (auto it = shuffled.rbegin(); it != shuffled.rend(); ++it) backward = *it + backward;
    EXPECT_EQ(forward, backward);
    if (items.size() >= 3) {
      EXPECT_EQ((items[0] + items[1]) + items[2], items[0] + (items[1] + items[2]));
    }
  }
}

TEST(Usage, CostIsExactFromRates) {
  const auto rates = ModelRates::per_million(1.25, 10.0);
  EXPECT_EQ(rates.input_per_token, 1'250'000);  // pico-units per token
  EXPECT_EQ(rates.output_per_token, 10'000'000);
  const auto u = rates.usage(123'456, 7'890);
  EXPECT_EQ(u.cost_picos, 123'456LL * 1'250'000 + 7'890LL * 10'000'000);
  EXPECT_NEAR(u.monetary_cost(), 123456 * 1.25e-6 + 7890 * 10e-6, 1e-12);
  EXPECT_THROW(ModelRates::per_million(-1, 0), ConfigError);
  EXPECT_THROW(rates.usage(-1, 0), MalformedResponseError);
}

TEST(Usage, TotalProviderUsageSumsOnlyProviderCalls) {
  EventGen gen{std::mt19937_64(23)};
  std::vector<Event> events;
  TokenUsage oracle;
  for (int i = 0; i < 300; ++i) {
    Event e{static_cast<std::uint64_t>(i), "", gen.payload()};
    if (auto* call = std::get_if<ProviderCallEvent>(&e.payload)) oracle += call->usage;
    events.push_back(std::move(e));
  }
  EXPECT_EQ(total_provider_usage(events), oracle);
}

}  // namespace
}  // namespace ttscale
