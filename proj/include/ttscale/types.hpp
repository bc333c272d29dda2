// SPDX-License-Identifier: Apache-2.0
//
// Value types shared by every stage of the harness. All of them are plain
// values with JSON conversions so they can travel through the run log.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace ttscale {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Token accounting

/// Monetary amounts are integer pico-units (1e-12 of the configured currency)
/// so that sums are exact in any order.
using Picos = std::int64_t;

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  Picos cost_picos = 0;

  double monetary_cost() const { return static_cast<double>(cost_picos) * 1e-12; }

  TokenUsage& operator+=(const TokenUsage& other);
  friend TokenUsage operator+(TokenUsage a, const TokenUsage& b) { return a += b; }
  friend bool operator==(const TokenUsage&, const TokenUsage&) = default;
};

/// Per-token prices of one model.
struct ModelRates {
  Picos input_per_token = 0;
  Picos output_per_token = 0;

  /// Rates quoted per million tokens, the way vendors publish them.
  static ModelRates per_million(double input, double output);

  TokenUsage usage(std::int64_t prompt_tokens, std::int64_t completion_tokens) const;
};

// ---------------------------------------------------------------------------
// Problems and candidates

using NumericTuple = std::vector<double>;

enum class ErrorKind {
  Execution,        // nonzero exit or exception in the candidate program
  Timeout,          // killed by the sandbox time limit
  NonFinite,        // NaN or infinity in the result
  MalformedOutput,  // ran, but printed nothing we can read as numbers
};

struct ErrorMarker {
  ErrorKind kind = ErrorKind::Execution;
  friend bool operator==(const ErrorMarker&, const ErrorMarker&) = default;
};

using OutputEntry = std::variant<NumericTuple, ErrorMarker>;
using OutputVector = std::vector<OutputEntry>;

bool is_error(const OutputEntry& entry);
bool all_errors(const OutputVector& vector);
bool any_errors(const OutputVector& vector);

std::string to_string(ErrorKind kind);
ErrorKind error_kind_from_string(const std::string& text);

struct Problem {
  std::string id;
  std::string statement;
  std::string answer_requirements;
  int difficulty = 1;
  /// One JSON array of positional arguments per test case.
  std::vector<json> test_inputs;
  std::vector<NumericTuple> expected_outputs;
  double comparison_tolerance = 1e-6;
  /// Function called by the evaluation driver; inferred from the program when absent.
  std::optional<std::string> entry_point;

  std::size_t test_count() const { return test_inputs.size(); }

  /// Throws ConfigError when an invariant is broken.
  void validate() const;
};

struct Candidate {
  int index = 0;
  std::string reasoning;
  std::optional<std::string> program_source;
  std::optional<OutputVector> output_vector;
  /// Determined only when output_vector carries no error markers.
  std::optional<bool> is_correct;
  TokenUsage generation_cost;

  bool correct() const { return is_correct.value_or(false); }
};

// ---------------------------------------------------------------------------
// Sandbox envelope

struct SandboxRequest {
  std::string script;
  double timeout_s = 30.0;
  std::int64_t mem_limit_mb = 2048;
  std::vector<std::string> argv;
};

struct ExecutionResult {
  std::string stdout_text;
  std::string stderr_text;
  int exit_code = 0;
  bool timed_out = false;
  double wall_time_s = 0.0;

  friend bool operator==(const ExecutionResult&, const ExecutionResult&) = default;
};

// ---------------------------------------------------------------------------
// Verification

struct StepCheck {
  int step_number = 1;
  std::string calculation_description;
  std::string script_content;
  std::string script_stdout;
  std::string script_stderr;
  bool is_correct = false;
  std::string error_explanation;

  friend bool operator==(const StepCheck&, const StepCheck&) = default;
};

struct Verdict {
  std::vector<StepCheck> step_checks;
  int overall_score = 0;
  std::string general_feedback;
  TokenUsage usage;
  int tool_call_count = 0;
  /// Set when the score was forced to 0: parse failure, cap hit, provider error.
  std::optional<std::string> failure;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct ScoredCandidate {
  int candidate_index = 0;
  std::vector<Verdict> verdicts;
  double mean_score = 0.0;
};

// ---------------------------------------------------------------------------
// Selection

enum class Strategy { Majority, BestOfN, SimpleVerifier, SymbolicVerifier };

std::string to_string(Strategy strategy);
Strategy strategy_from_string(const std::string& text);

struct PairOutcome {
  int first = 0;
  int second = 0;
  int votes_first = 0;
  int votes_second = 0;
  int abstentions = 0;
  std::optional<int> winner;

  friend bool operator==(const PairOutcome&, const PairOutcome&) = default;
};

struct SelectionOutcome {
  Strategy strategy = Strategy::Majority;
  std::optional<int> chosen_index;
  bool solved = false;
  std::vector<int> best_set;
  std::map<int, int> matchup_wins;
  std::vector<PairOutcome> matchups;
  bool tournament_ran = false;

  friend bool operator==(const SelectionOutcome&, const SelectionOutcome&) = default;
};

// ---------------------------------------------------------------------------
// JSON conversions

void to_json(json& j, const TokenUsage& usage);
void from_json(const json& j, TokenUsage& usage);
void to_json(json& j, const OutputEntry& entry);
void from_json(const json& j, OutputEntry& entry);
void to_json(json& j, const Problem& problem);
void from_json(const json& j, Problem& problem);
void to_json(json& j, const Candidate& candidate);
void from_json(const json& j, Candidate& candidate);
void to_json(json& j, const SandboxRequest& request);
void from_json(const json& j, SandboxRequest& request);
void to_json(json& j, const ExecutionResult& result);
void from_json(const json& j, ExecutionResult& result);
void to_json(json& j, const StepCheck& step);
void from_json(const json& j, StepCheck& step);
void to_json(json& j, const Verdict& verdict);
void from_json(const json& j, Verdict& verdict);
void to_json(json& j, const PairOutcome& pair);
void from_json(const json& j, PairOutcome& pair);
void to_json(json& j, const SelectionOutcome& outcome);
void from_json(const json& j, SelectionOutcome& outcome);

/// Problems are stored one JSON object per line.
std::vector<Problem> load_problems(const std::string& path);

}  // namespace ttscale
