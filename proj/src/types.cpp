// SPDX-License-Identifier: Apache-2.0
#include "ttscale/types.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/core.h>

#include "ttscale/errors.hpp"

namespace ttscale {

TokenUsage& TokenUsage::operator+=(const TokenUsage& other) {
  prompt_tokens += other.prompt_tokens;
  completion_tokens += other.completion_tokens;
  cost_picos += other.cost_picos;
  return *this;
}

ModelRates ModelRates::per_million(double input, double output) {
  if (input < 0 || output < 0) throw ConfigError("token rates must be non-negative");
  // 1 currency unit per million tokens == 1e6 picos per token.
  return ModelRates{static_cast<Picos>(std::llround(input * 1e6)),
                    static_cast<Picos>(std::llround(output * 1e6))};
}

TokenUsage ModelRates::usage(std::int64_t prompt_tokens, std::int64_t completion_tokens) const {
  if (prompt_tokens < 0 || completion_tokens < 0)
    throw MalformedResponseError("negative token count");
  return TokenUsage{prompt_tokens, completion_tokens,
                    prompt_tokens * input_per_token + completion_tokens * output_per_token};
}

bool is_error(const OutputEntry& entry) { return std::holds_alternative<ErrorMarker>(entry); }

bool all_errors(const OutputVector& vector) {
  return std::all_of(vector.begin(), vector.end(), is_error);
}

bool any_errors(const OutputVector& vector) {
  return std::any_of(vector.begin(), vector.end(), is_error);
}

std::string to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Execution: return "execution";
    case ErrorKind::Timeout: return "timeout";
    case ErrorKind::NonFinite: return "nonfinite";
    case ErrorKind::MalformedOutput: return "malformed_output";
  }
  return "execution";
}

ErrorKind error_kind_from_string(const std::string& text) {
  if (text == "execution") return ErrorKind::Execution;
  if (text == "timeout") return ErrorKind::Timeout;
  if (text == "nonfinite") return ErrorKind::NonFinite;
  if (text == "malformed_output") return ErrorKind::MalformedOutput;
  throw Error("unknown error marker kind '" + text + "'");
}

void Problem::validate() const {
  if (id.empty()) throw ConfigError("problem without id");
  if (test_inputs.empty())
    throw ConfigError(fmt::format("problem {}: at least one test input required", id));
  if (test_inputs.size() != expected_outputs.size())
    throw ConfigError(fmt::format("problem {}: {} test inputs but {} expected outputs", id,
                                  test_inputs.size(), expected_outputs.size()));
  if (difficulty < 1 || difficulty > 5)
    throw ConfigError(fmt::format("problem {}: difficulty {} outside 1..5", id, difficulty));
  for (const auto& input : test_inputs)
    if (!input.is_array())
      throw ConfigError(fmt::format("problem {}: test input must be an argument array", id));
  for (const auto& tuple : expected_outputs)
    for (double v : tuple)
      if (!std::isfinite(v))
        throw ConfigError(fmt::format("problem {}: non-finite expected output", id));
  if (!(comparison_tolerance >= 0))
    throw ConfigError(fmt::format("problem {}: negative comparison tolerance", id));
}

std::string to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::Majority: return "majority";
    case Strategy::BestOfN: return "best_of_n";
    case Strategy::SimpleVerifier: return "simple_verifier";
    case Strategy::SymbolicVerifier: return "symbolic_verifier";
  }
  return "majority";
}

Strategy strategy_from_string(const std::string& text) {
  if (text == "majority") return Strategy::Majority;
  if (text == "best_of_n") return Strategy::BestOfN;
  if (text == "simple_verifier" || text == "simple") return Strategy::SimpleVerifier;
  if (text == "symbolic_verifier" || text == "symbolic") return Strategy::SymbolicVerifier;
  throw ConfigError("unknown strategy '" + text + "'");
}

// ---------------------------------------------------------------------------

void to_json(json& j, const TokenUsage& usage) {
  j = json{{"prompt_tokens", usage.prompt_tokens},
           {"completion_tokens", usage.completion_tokens},
           {"cost_picos", usage.cost_picos}};
}

void from_json(const json& j, TokenUsage& usage) {
  usage.prompt_tokens = j.value("prompt_tokens", std::int64_t{0});
  usage.completion_tokens = j.value("completion_tokens", std::int64_t{0});
  usage.cost_picos = j.value("cost_picos", Picos{0});
}

void to_json(json& j, const OutputEntry& entry) {
  if (const auto* marker = std::get_if<ErrorMarker>(&entry)) {
    j = json{{"error", to_string(marker->kind)}};
  } else {
    j = std::get<NumericTuple>(entry);
  }
}

void from_json(const json& j, OutputEntry& entry) {
  if (j.is_object()) {
    entry = ErrorMarker{error_kind_from_string(j.at("error").get<std::string>())};
  } else {
    entry = j.get<NumericTuple>();
  }
}

void to_json(json& j, const Problem& problem) {
  j = json{{"id", problem.id},
           {"statement", problem.statement},
           {"answer_requirements", problem.answer_requirements},
           {"difficulty", problem.difficulty},
           {"test_inputs", problem.test_inputs},
           {"expected_outputs", problem.expected_outputs},
           {"comparison_tolerance", problem.comparison_tolerance}};
  if (problem.entry_point) j["entry_point"] = *problem.entry_point;
}

void from_json(const json& j, Problem& problem) {
  problem.id = j.at("id").get<std::string>();
  problem.statement = j.at("statement").get<std::string>();
  problem.answer_requirements = j.value("answer_requirements", std::string{});
  problem.difficulty = j.value("difficulty", 1);
  problem.test_inputs = j.at("test_inputs").get<std::vector<json>>();
  problem.expected_outputs.clear();
  for (const auto& out : j.at("expected_outputs")) {
    // A bare number is shorthand for a one-element tuple.
    problem.expected_outputs.push_back(out.is_array() ? out.get<NumericTuple>()
                                                      : NumericTuple{out.get<double>()});
  }
  problem.comparison_tolerance = j.value("comparison_tolerance", 1e-6);
  if (j.contains("entry_point") && !j["entry_point"].is_null())
    problem.entry_point = j["entry_point"].get<std::string>();
  else
    problem.entry_point.reset();
}

void to_json(json& j, const Candidate& candidate) {
  j = json{{"index", candidate.index},
           {"reasoning", candidate.reasoning},
           {"generation_cost", candidate.generation_cost}};
  j["program_source"] = candidate.program_source ? json(*candidate.program_source) : json();
  j["output_vector"] = candidate.output_vector ? json(*candidate.output_vector) : json();
  j["is_correct"] = candidate.is_correct ? json(*candidate.is_correct) : json();
}

void from_json(const json& j, Candidate& candidate) {
  candidate.index = j.at("index").get<int>();
  candidate.reasoning = j.value("reasoning", std::string{});
  candidate.generation_cost = j.value("generation_cost", TokenUsage{});
  candidate.program_source.reset();
  candidate.output_vector.reset();
  candidate.is_correct.reset();
  if (j.contains("program_source") && !j["program_source"].is_null())
    candidate.program_source = j["program_source"].get<std::string>();
  if (j.contains("output_vector") && !j["output_vector"].is_null())
    candidate.output_vector = j["output_vector"].get<OutputVector>();
  if (j.contains("is_correct") && !j["is_correct"].is_null())
    candidate.is_correct = j["is_correct"].get<bool>();
}

void to_json(json& j, const SandboxRequest& request) {
  j = json{{"script", request.script},
           {"timeout_s", request.timeout_s},
           {"mem_limit_mb", request.mem_limit_mb},
           {"argv", request.argv}};
}

void from_json(const json& j, SandboxRequest& request) {
  request.script = j.at("script").get<std::string>();
  request.timeout_s = j.at("timeout_s").get<double>();
  request.mem_limit_mb = j.at("mem_limit_mb").get<std::int64_t>();
  request.argv = j.value("argv", std::vector<std::string>{});
}

void to_json(json& j, const ExecutionResult& result) {
  j = json{{"stdout", result.stdout_text},
           {"stderr", result.stderr_text},
           {"exit_code", result.exit_code},
           {"timed_out", result.timed_out},
           {"wall_time_s", result.wall_time_s}};
}

void from_json(const json& j, ExecutionResult& result) {
  result.stdout_text = j.at("stdout").get<std::string>();
  result.stderr_text = j.at("stderr").get<std::string>();
  result.exit_code = j.at("exit_code").get<int>();
  result.timed_out = j.at("timed_out").get<bool>();
  result.wall_time_s = j.at("wall_time_s").get<double>();
}

// Step checks use the grader schema key names.
void to_json(json& j, const StepCheck& step) {
  j = json{{"step_number", step.step_number},
           {"calculation_description", step.calculation_description},
           {"sympy_script_content", step.script_content},
           {"script_stdout", step.script_stdout},
           {"script_stderr", step.script_stderr},
           {"is_correct", step.is_correct},
           {"error_explanation", step.error_explanation}};
}

void from_json(const json& j, StepCheck& step) {
  step.step_number = j.at("step_number").get<int>();
  step.calculation_description = j.at("calculation_description").get<std::string>();
  step.script_content = j.at("sympy_script_content").get<std::string>();
  step.script_stdout = j.at("script_stdout").get<std::string>();
  step.script_stderr = j.at("script_stderr").get<std::string>();
  step.is_correct = j.at("is_correct").get<bool>();
  step.error_explanation = j.at("error_explanation").get<std::string>();
}

void to_json(json& j, const Verdict& verdict) {
  j = json{{"sympy_verification", verdict.step_checks},
           {"overall_score", verdict.overall_score},
           {"general_feedback", verdict.general_feedback},
           {"usage", verdict.usage},
           {"tool_call_count", verdict.tool_call_count}};
  if (verdict.failure) j["failure"] = *verdict.failure;
}

void from_json(const json& j, Verdict& verdict) {
  verdict.step_checks = j.value("sympy_verification", std::vector<StepCheck>{});
  verdict.overall_score = j.at("overall_score").get<int>();
  verdict.general_feedback = j.value("general_feedback", std::string{});
  verdict.usage = j.value("usage", TokenUsage{});
  verdict.tool_call_count = j.value("tool_call_count", 0);
  if (j.contains("failure") && !j["failure"].is_null())
    verdict.failure = j["failure"].get<std::string>();
  else
    verdict.failure.reset();
}

void to_json(json& j, const PairOutcome& pair) {
  j = json{{"first", pair.first},
           {"second", pair.second},
           {"votes_first", pair.votes_first},
           {"votes_second", pair.votes_second},
           {"abstentions", pair.abstentions}};
  j["winner"] = pair.winner ? json(*pair.winner) : json();
}

void from_json(const json& j, PairOutcome& pair) {
  pair.first = j.at("first").get<int>();
  pair.second = j.at("second").get<int>();
  pair.votes_first = j.value("votes_first", 0);
  pair.votes_second = j.value("votes_second", 0);
  pair.abstentions = j.value("abstentions", 0);
  if (j.contains("winner") && !j["winner"].is_null())
    pair.winner = j["winner"].get<int>();
  else
    pair.winner.reset();
}

void to_json(json& j, const SelectionOutcome& outcome) {
  json wins = json::object();
  for (const auto& [index, count] : outcome.matchup_wins) wins[std::to_string(index)] = count;
  j = json{{"strategy", to_string(outcome.strategy)},
           {"solved", outcome.solved},
           {"best_set", outcome.best_set},
           {"matchup_wins", wins},
           {"matchups", outcome.matchups},
           {"tournament_ran", outcome.tournament_ran}};
  j["chosen_index"] = outcome.chosen_index ? json(*outcome.chosen_index) : json();
}

void from_json(const json& j, SelectionOutcome& outcome) {
  outcome.strategy = strategy_from_string(j.at("strategy").get<std::string>());
  outcome.solved = j.at("solved").get<bool>();
  outcome.best_set = j.value("best_set", std::vector<int>{});
  outcome.matchup_wins.clear();
  if (j.contains("matchup_wins"))
    for (const auto& [key, value] : j["matchup_wins"].items())
      outcome.matchup_wins[std::stoi(key)] = value.get<int>();
  outcome.matchups = j.value("matchups", std::vector<PairOutcome>{});
  outcome.tournament_ran = j.value("tournament_ran", false);
  if (j.contains("chosen_index") && !j["chosen_index"].is_null())
    outcome.chosen_index = j["chosen_index"].get<int>();
  else
    outcome.chosen_index.reset();
}

std::vector<Problem> load_problems(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open problems file '" + path + "'");
  std::vector<Problem> problems;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto problem = json::parse(line).get<Problem>();
      problem.validate();
      problems.push_back(std::move(problem));
    } catch (const json::exception& e) {
      throw ConfigError(fmt::format("{}:{}: {}", path, line_number, e.what()));
    }
  }
  return problems;
}

}  // namespace ttscale
