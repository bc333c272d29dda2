// SPDX-License-Identifier: Apache-2.0
//
// Parsing of model-written JSON answers: grader verdicts, simple-verifier
// yes/no replies and tie-break votes.
#pragma once

#include <optional>
#include <string>

#include "ttscale/types.hpp"

namespace ttscale {

/// Removes ``` delimiter lines, keeping the fenced bodies.
std::string strip_fence_lines(const std::string& text);

/// First balanced {...} in `text` (after fence stripping) that parses as a
/// JSON object. Throws VerdictParseError(NoObjectFound).
json extract_first_object(const std::string& text);

/// One `sympy_verification` entry. Throws VerdictParseError(SchemaViolation)
/// naming `path` + the offending key.
StepCheck parse_step_check(const json& j, const std::string& path = "");

/// Full grader verdict from a JSON object; usage and tool_call_count are
/// left at zero.
Verdict verdict_from_object(const json& j);

/// Full grader verdict from model output.
Verdict parse_verdict(const std::string& content);

/// {"is_solution_correct": "yes"|"no"}; nullopt when unreadable.
std::optional<bool> parse_simple_verdict(const std::string& content);

/// {"correct_attempt": 1|2} (number or string); nullopt when unreadable.
std::optional<int> parse_tie_break(const std::string& content);

}  // namespace ttscale
