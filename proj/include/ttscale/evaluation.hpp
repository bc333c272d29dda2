// SPDX-License-Identifier: Apache-2.0
//
// Candidate programs: extraction from model output, execution against the
// problem's test inputs, correctness, and functional deduplication.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ttscale/run_log.hpp"
#include "ttscale/sandbox.hpp"
#include "ttscale/types.hpp"

namespace ttscale {

/// Body of the last complete ```python (or ```py) fenced block, if any.
std::optional<std::string> extract_program(const std::string& reasoning);

/// `text` with every fenced block (complete or trailing) removed.
std::string strip_code_fences(const std::string& text);

/// Function the driver calls: the problem's entry point, else the last
/// top-level `def` in the program.
std::optional<std::string> infer_entry_point(const std::string& program);

/// Line the driver prints before the JSON list of results.
inline constexpr const char* kOutputMarker = "__TTS_OUTPUT__";

/// Program plus a __main__ block that calls `entry_point(*json.loads(argv[1]))`
/// and prints the marker line.
std::string build_driver_script(const std::string& program, const std::string& entry_point);

/// Turns one execution into an output entry.
OutputEntry parse_execution(const ExecutionResult& result);

/// |a−b| ≤ max(rtol·max(|a|,|b|), atol)
bool values_close(double a, double b, double rtol, double atol = 1e-12);

bool entries_equivalent(const OutputEntry& a, const OutputEntry& b, double rtol, double atol = 1e-12);

/// Throws LengthMismatchError when |a| != |b|.
bool vectors_equivalent(const OutputVector& a, const OutputVector& b, double rtol, double atol = 1e-12);

/// true iff no entry is an error marker and every tuple matches the expected
/// one within `rtol`; nullopt when any entry is an error marker.
std::optional<bool> judge_outputs(const OutputVector& outputs, const Problem& problem);

struct EvalSettings {
  double timeout_s = 30.0;
  std::int64_t mem_limit_mb = 2048;
};

/// Runs the candidate's program once per test input. A candidate without a
/// program is returned unchanged (no output vector, undetermined).
Candidate evaluate_candidate(Candidate candidate, const Problem& problem, SandboxClient& sandbox,
                             const EvalSettings& settings, const Scope& scope,
                             ExecMode mode = ExecMode::Live);

struct DistinctSet {
  /// Non-error groups, ordered by representative; members ascending.
  std::vector<std::vector<int>> groups;
  std::vector<int> representatives;
  /// Candidates whose vectors are all error markers or absent.
  std::vector<int> error_group;

  std::size_t unique_attempts() const { return groups.size(); }
  /// Position of the group containing `index`, if it is in one.
  std::optional<std::size_t> group_of(int index) const;
};

/// First-occurrence grouping by candidate index: each candidate joins the
/// earliest group whose representative it matches.
DistinctSet dedup(const std::vector<Candidate>& candidates, double rtol, double atol = 1e-12);

}  // namespace ttscale
