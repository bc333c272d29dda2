// SPDX-License-Identifier: Apache-2.0
//
// Accuracy tables and token/cost accounting for a run.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ttscale/run_log.hpp"
#include "ttscale/verifier.hpp"

namespace ttscale {

/// Per-problem results gathered from a run.
struct ProblemSummary {
  std::string id;
  int difficulty = 1;
  /// Fraction of the parallel candidates that are correct.
  std::optional<double> single_attempt;
  /// Per round: fraction of sequential attempts correct at that round.
  std::vector<double> round_accuracy;
  std::map<Strategy, SelectionOutcome> selections;
};

struct ReportRow {
  std::string name;
  std::map<int, double> per_level;
  double overall = 0.0;
};

struct Report {
  std::vector<int> levels;
  std::map<int, int> problems_per_level;
  std::vector<ReportRow> rows;
  TokenUsage total_usage;
  std::map<std::string, TokenUsage> usage_by_stage;
  std::vector<TokenUsage> usage_by_round;
  std::vector<TokenUsage> cumulative_usage_by_round;
  std::optional<UsageStats> stats;
  std::map<std::string, std::vector<std::string>> solved;  // strategy -> problem ids
};

/// "Single Attempt", "<i>+Round", then the selection strategies. Levels
/// without problems are omitted. Throws EmptyRunError without problems.
Report build_report(const std::vector<ProblemSummary>& problems, const std::vector<Event>& events);

/// Row label of a strategy.
std::string row_name(Strategy strategy);

void to_json(json& j, const Report& report);
std::string report_text(const Report& report);
/// Header: `row level problems accuracy`; level "all" is the pooled value.
std::string report_tsv(const Report& report);

}  // namespace ttscale
