// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"
#include "ttscale/errors.hpp"
#include "ttscale/report.hpp"
#include "ttscale/selection.hpp"

namespace ttscale {
namespace {

SelectionOutcome solved_as(Strategy s, bool solved) {
  SelectionOutcome o;
  o.strategy = s;
  o.solved = solved;
  return o;
}

ProblemSummary problem(const std::string& id, int level, std::map<Strategy, bool> solved,
                       std::optional<double> single = std::nullopt, std::vector<double> rounds = {}) {
  ProblemSummary p;
  p.id = id;
  p.difficulty = level;
  p.single_attempt = single;
  p.round_accuracy = std::move(rounds);
  for (auto [s, v] : solved) p.selections[s] = solved_as(s, v);
  return p;
}

const ReportRow* find_row(const Report& r, const std::string& name) {
  for (const auto& row : r.rows)
    if (row.name == name) return &row;
  return nullptr;
}

Event call_event(const std::string& stage, std::optional<int> round, TokenUsage usage) {
  ProviderCallEvent e;
  e.scope = Scope::of(stage, "p");
  e.scope.round = round;
  e.usage = usage;
  return Event{0, "", e};
}

TEST(Report, ExactFractionsAndOmittedLevels) {
  const auto m = Strategy::Majority;
  const std::vector<ProblemSummary> ps = {problem("a", 2, {{m, true}}, 0.5), problem("b", 2, {{m, false}}, 0.25),
                                          problem("c", 5, {{m, true}}, 1.0)};
  const auto r = build_report(ps, {});
  EXPECT_EQ(r.levels, (std::vector<int>{2, 5}));  // no level 1, 3 or 4 problems
  const auto* maj = find_row(r, "Majority Vote");
  ASSERT_TRUE(maj);
  EXPECT_EQ(maj->per_level.at(2), 0.5);
  EXPECT_EQ(maj->per_level.at(5), 1.0);
  EXPECT_DOUBLE_EQ(maj->overall, 2.0 / 3.0);
  const auto* single = find_row(r, "Single Attempt");
  ASSERT_TRUE(single);
  EXPECT_DOUBLE_EQ(single->overall, 1.75 / 3.0);
  EXPECT_EQ(single->per_level.at(2), 0.375);
  EXPECT_FALSE(find_row(r, "Best of N"));
  EXPECT_EQ(r.solved.at("majority"), (std::vector<std::string>{"a", "c"}));
}

TEST(Report, RowOrderAndRoundLabels) {
  const std::vector<ProblemSummary> ps = {
      problem("a", 1,
              {{Strategy::BestOfN, true}, {Strategy::Majority, true}, {Strategy::SimpleVerifier, false},
               {Strategy::SymbolicVerifier, true}},
              0.5, {0.0, 0.5, 1.0})};
  const auto r = build_report(ps, {});
  std::vector<std::string> names;
  for (const auto& row : r.rows) names.push_back(row.name);
  EXPECT_EQ(names, (std::vector<std::string>{"Single Attempt", "0+Round", "1+Round", "2+Round",
                                             "Simple Weak Verifier", "Majority Vote", "SymPy Verifier",
                                             "Best of N"}));
  EXPECT_EQ(find_row(r, "1+Round")->overall, 0.5);
}

TEST(Report, BestOfNIsMeanOfOr) {
  std::mt19937_64 rng(4);
  std::vector<ProblemSummary> ps;
  std::vector<Candidate> pool;
  int solved = 0;
  for (int i = 0; i < 40; ++i) {
    std::vector<Candidate> cs;
    for (int k = 0; k < 5; ++k) cs.push_back(testing::with_outputs(k, testing::numbers({1}), rng() % 7 == 0));
    const auto o = best_of_n(cs);
    solved += o.solved;
    auto p = problem("p" + std::to_string(i), 1 + i % 3, {});
    p.selections[Strategy::BestOfN] = o;
    ps.push_back(p);
  }
  const auto r = build_report(ps, {});
  EXPECT_DOUBLE_EQ(find_row(r, "Best of N")->overall, solved / 40.0);
}

TEST(Report, UsageEqualsProviderCallSum) {
  std::mt19937_64 rng(8);
  std::vector<Event> events;
  TokenUsage expected;
  std::vector<TokenUsage> per_round(3);
  for (int i = 0; i < 200; ++i) {
    TokenUsage u{static_cast<std::int64_t>(rng() % 1000), static_cast<std::int64_t>(rng() % 1000),
                 static_cast<Picos>(rng() % 1000000)};
    const int kind = static_cast<int>(rng() % 3);
    if (kind == 0) {
      events.push_back(call_event("generate", std::nullopt, u));
    } else {
      const int round = static_cast<int>(rng() % 3);
      events.push_back(call_event("sequential", round, u));
      per_round[round] += u;
    }
    expected += u;
    if (rng() % 4 == 0) events.push_back(Event{0, "", VerdictEvent{Scope::of("verify", "p"), "simple", Verdict{}}});
  }
  const auto r = build_report({problem("a", 1, {})}, events);
  EXPECT_EQ(r.total_usage, expected);
  EXPECT_EQ(r.total_usage, total_provider_usage(events));
  EXPECT_EQ(r.usage_by_round, per_round);
  EXPECT_EQ(r.cumulative_usage_by_round.back(), per_round[0] + per_round[1] + per_round[2]);
  TokenUsage stages;
  for (const auto& [_, u] : r.usage_by_stage) stages += u;
  EXPECT_EQ(stages, expected);
  EXPECT_FALSE(r.stats);
}

TEST(Report, EmptyRun) { EXPECT_THROW(build_report({}, {}), EmptyRunError); }

TEST(Report, Renderings) {
  const auto r = build_report({problem("a", 3, {{Strategy::Majority, true}}, 1.0)}, {});
  const auto tsv = report_tsv(r);
  EXPECT_EQ(tsv.substr(0, tsv.find('\n')), "row\tlevel\tproblems\taccuracy");
  EXPECT_NE(report_text(r).find("Majority Vote"), std::string::npos);
  const json j = r;
  EXPECT_EQ(j["rows"][1]["name"], "Majority Vote");
  EXPECT_EQ(j["solved"]["majority"], json::array({"a"}));
}

}  // namespace
}  // namespace ttscale
