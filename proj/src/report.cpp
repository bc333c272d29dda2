// SPDX-License-Identifier: Apache-2.0
#include "ttscale/report.hpp"

#include <algorithm>
#include <set>

#include <fmt/core.h>

#include "ttscale/errors.hpp"

namespace ttscale {

std::string row_name(Strategy strategy) {
  switch (strategy) {
    case Strategy::SimpleVerifier: return "Simple Weak Verifier";
    case Strategy::Majority: return "Majority Vote";
    case Strategy::SymbolicVerifier: return "SymPy Verifier";
    case Strategy::BestOfN: return "Best of N";
  }
  return "";
}

namespace {

// Mean of `value` over problems that have one, per level and pooled.
template <typename Fn>
std::optional<ReportRow> make_row(const std::string& name, const std::vector<ProblemSummary>& problems, Fn value) {
  std::map<int, std::pair<double, int>> acc;
  double total = 0;
  int count = 0;
  for (const auto& p : problems) {
    const std::optional<double> v = value(p);
    if (!v) continue;
    auto& slot = acc[p.difficulty];
    slot.first += *v;
    slot.second += 1;
    total += *v;
    ++count;
  }
  if (count == 0) return std::nullopt;
  ReportRow row{name, {}, total / count};
  for (const auto& [level, s] : acc) row.per_level[level] = s.first / s.second;
  return row;
}

}  // namespace

Report build_report(const std::vector<ProblemSummary>& problems, const std::vector<Event>& events) {
  if (problems.empty()) throw EmptyRunError("report: run has no problems");
  Report report;
  for (const auto& p : problems) ++report.problems_per_level[p.difficulty];
  for (const auto& [level, _] : report.problems_per_level) report.levels.push_back(level);

  auto add = [&](std::optional<ReportRow> row) {
    if (row) report.rows.push_back(std::move(*row));
  };
  add(make_row("Single Attempt", problems, [](const ProblemSummary& p) { return p.single_attempt; }));
  std::size_t rounds = 0;
  for (const auto& p : problems) rounds = std::max(rounds, p.round_accuracy.size());
  for (std::size_t r = 0; r < rounds; ++r)
    add(make_row(fmt::format("{}+Round", r), problems, [r](const ProblemSummary& p) -> std::optional<double> {
      if (r >= p.round_accuracy.size()) return std::nullopt;
      return p.round_accuracy[r];
    }));
  for (Strategy s : {Strategy::SimpleVerifier, Strategy::Majority, Strategy::SymbolicVerifier, Strategy::BestOfN}) {
    add(make_row(row_name(s), problems, [s](const ProblemSummary& p) -> std::optional<double> {
      auto it = p.selections.find(s);
      if (it == p.selections.end()) return std::nullopt;
      return it->second.solved ? 1.0 : 0.0;
    }));
    for (const auto& p : problems) {
      auto it = p.selections.find(s);
      if (it != p.selections.end() && it->second.solved) report.solved[to_string(s)].push_back(p.id);
      else report.solved[to_string(s)];
    }
  }

  for (const auto& event : events) {
    const auto* call = std::get_if<ProviderCallEvent>(&event.payload);
    if (!call) continue;
    report.total_usage += call->usage;
    report.usage_by_stage[call->scope.stage] += call->usage;
    if (call->scope.stage == "sequential" && call->scope.round) {
      const auto r = static_cast<std::size_t>(*call->scope.round);
      if (report.usage_by_round.size() <= r) report.usage_by_round.resize(r + 1);
      report.usage_by_round[r] += call->usage;
    }
  }
  TokenUsage running;
  for (const auto& u : report.usage_by_round) report.cumulative_usage_by_round.push_back(running += u);

  try {
    report.stats = usage_stats(events);
  } catch (const EmptyRunError&) {
  }
  return report;
}

void to_json(json& j, const Report& report) {
  json rows = json::array();
  for (const auto& row : report.rows) {
    json per_level = json::object();
    for (const auto& [level, v] : row.per_level) per_level[std::to_string(level)] = v;
    rows.push_back(json{{"name", row.name}, {"per_level", per_level}, {"overall", row.overall}});
  }
  json levels = json::object();
  for (const auto& [level, n] : report.problems_per_level) levels[std::to_string(level)] = n;
  j = json{{"problems_per_level", levels},
           {"rows", rows},
           {"usage",
            {{"total", report.total_usage},
             {"total_cost", report.total_usage.monetary_cost()},
             {"by_stage", report.usage_by_stage},
             {"by_round", report.usage_by_round},
             {"cumulative_by_round", report.cumulative_usage_by_round}}},
           {"solved", report.solved}};
  j["stats"] = report.stats ? json(*report.stats) : json();
}

std::string report_text(const Report& report) {
  std::vector<std::string> header{"Method"};
  for (int level : report.levels)
    header.push_back(fmt::format("L{} (n={})", level, report.problems_per_level.at(level)));
  header.push_back("All");
  std::vector<std::vector<std::string>> table{header};
  for (const auto& row : report.rows) {
    std::vector<std::string> cells{row.name};
    for (int level : report.levels) {
      auto it = row.per_level.find(level);
      cells.push_back(it == row.per_level.end() ? "-" : fmt::format("{:.1f}%", 100 * it->second));
    }
    cells.push_back(fmt::format("{:.1f}%", 100 * row.overall));
    table.push_back(std::move(cells));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& r : table)
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());

  std::string out;
  for (std::size_t i = 0; i < table.size(); ++i) {
    for (std::size_t c = 0; c < table[i].size(); ++c) {
      if (c == 0) out += fmt::format("{:<{}}", table[i][c], width[c]);
      else out += fmt::format("  {:>{}}", table[i][c], width[c]);
    }
    out += '\n';
    if (i == 0) out += std::string(out.size() - 1, '-') + '\n';
  }
  const auto& u = report.total_usage;
  out += fmt::format("\nTokens: {} prompt + {} completion; cost {:.6f}\n", u.prompt_tokens, u.completion_tokens,
                     u.monetary_cost());
  for (const auto& [stage, usage] : report.usage_by_stage)
    out += fmt::format("  {:<12} {:>10} prompt {:>10} completion  cost {:.6f}\n", stage, usage.prompt_tokens,
                       usage.completion_tokens, usage.monetary_cost());
  for (std::size_t r = 0; r < report.usage_by_round.size(); ++r)
    out += fmt::format("  round {:<6} {:>10} prompt {:>10} completion  cumulative cost {:.6f}\n", r,
                       report.usage_by_round[r].prompt_tokens, report.usage_by_round[r].completion_tokens,
                       report.cumulative_usage_by_round[r].monetary_cost());
  if (report.stats) {
    const auto& s = *report.stats;
    out += fmt::format(
        "\nSymbolic verifier: {:.2f} steps per verdict, {:.1f}% with script, {:.1f}% steps correct, "
        "{:.1f}% problems tie-broken\n",
        s.avg_steps, 100 * s.frac_steps_with_script, 100 * s.frac_steps_correct, 100 * s.frac_problems_tiebroken);
  }
  return out;
}

std::string report_tsv(const Report& report) {
  std::string out = "row\tlevel\tproblems\taccuracy\n";
  int total = 0;
  for (const auto& [_, n] : report.problems_per_level) total += n;
  for (const auto& row : report.rows) {
    for (const auto& [level, v] : row.per_level)
      out += fmt::format("{}\t{}\t{}\t{:.6f}\n", row.name, level, report.problems_per_level.at(level), v);
    out += fmt::format("{}\tall\t{}\t{:.6f}\n", row.name, total, row.overall);
  }
  return out;
}

}  // namespace ttscale
