// SPDX-License-Identifier: Apache-2.0
//
// Run orchestration. Every stage recomputes the pipeline deterministically:
// earlier stages are served from the warmed caches only, the current stage
// may call the provider and the sandbox. Work already in the run log is
// therefore never repeated.
#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ttscale/config.hpp"
#include "ttscale/evaluation.hpp"
#include "ttscale/prompts.hpp"
#include "ttscale/provider.hpp"
#include "ttscale/report.hpp"
#include "ttscale/sandbox.hpp"
#include "ttscale/scaling.hpp"
#include "ttscale/selection.hpp"
#include "ttscale/sequential.hpp"
#include "ttscale/verifier.hpp"

namespace ttscale {

enum class Stage { Generate, Evaluate, Verify, Select, Sequential };

std::string to_string(Stage stage);
Stage stage_from_string(const std::string& text);

/// Everything computed for one problem.
struct ProblemRun {
  const Problem* problem = nullptr;
  std::vector<Candidate> candidates;
  DistinctSet distinct;
  std::vector<ScoredCandidate> simple;    // one per representative
  std::vector<ScoredCandidate> symbolic;  // one per representative
  std::map<Strategy, SelectionOutcome> selections;
  std::vector<std::vector<RoundState>> sequential;  // per attempt
};

inline constexpr Strategy kAllStrategies[] = {Strategy::Majority, Strategy::BestOfN, Strategy::SimpleVerifier,
                                              Strategy::SymbolicVerifier};

class Pipeline {
 public:
  /// `log` receives new events; its existing events warm the caches.
  /// `sandbox` may be null (offline).
  Pipeline(RunConfig config, std::vector<Problem> problems, PromptLibrary prompts, RunLog& log,
           std::shared_ptr<Transport> transport, std::shared_ptr<Sandbox> sandbox);

  const RunConfig& config() const { return config_; }
  const std::vector<Problem>& problems() const { return problems_; }
  ChatClient& client() { return client_; }
  SandboxClient& sandbox() { return sandbox_; }

  /// Seeds the caches from recorded events (in addition to the log's own).
  void warm(const std::vector<Event>& events);

  /// Runs `stage` for every problem. Stages before it must already be in
  /// the log.
  void run_stage(Stage stage);
  /// One live pass through every stage.
  void run_all();

  /// Re-derives everything the log holds, without provider or sandbox
  /// access. Stages with no recorded data stay empty.
  std::vector<ProblemRun> collect();

  // Building blocks.
  std::vector<Candidate> generate(const Problem& problem, CallMode mode);
  std::vector<Candidate> evaluate(const Problem& problem, std::vector<Candidate> candidates, ExecMode mode);
  std::vector<ScoredCandidate> verify(const Problem& problem, const std::vector<Candidate>& candidates,
                                      const DistinctSet& distinct, Strategy strategy, CallMode mode,
                                      ExecMode exec_mode, bool persist);
  SelectionOutcome select(const Problem& problem, const std::vector<Candidate>& candidates,
                          const DistinctSet& distinct, Strategy strategy, const std::vector<ScoredCandidate>& scored,
                          CallMode mode, bool missing_as_abstention = false);
  std::vector<std::vector<RoundState>> sequential(const Problem& problem, CallMode mode, ExecMode exec_mode);

  VerifySettings verify_settings() const;
  TieBreakSettings tie_break_settings() const;
  SequentialSettings sequential_settings() const;
  EvalSettings eval_settings() const;

 private:
  struct Modes;
  void run_pass(Stage last, const Modes& modes);

  RunConfig config_;
  std::vector<Problem> problems_;
  PromptLibrary prompts_;
  RunLog& log_;
  ChatClient client_;
  SandboxClient sandbox_;
};

/// Verdicts recorded in a log: (problem, verifier, candidate) -> verdicts by repetition.
using RecordedVerdicts = std::map<std::tuple<std::string, std::string, int>, std::vector<Verdict>>;
RecordedVerdicts recorded_verdicts(const std::vector<Event>& events);

/// Selections recorded in a log, keyed by (problem, strategy). Later events win.
std::map<std::pair<std::string, Strategy>, SelectionOutcome> recorded_selections(const std::vector<Event>& events);

/// Scores per representative from recorded verdicts.
std::vector<ScoredCandidate> scores_from_verdicts(const RecordedVerdicts& verdicts, const std::string& problem_id,
                                                  const std::string& verifier, const DistinctSet& distinct);

std::vector<ProblemSummary> summarize(const std::vector<ProblemRun>& runs, const std::vector<Event>& events);

/// Offline pools for scaling curves: recorded verdict scores and matchups.
std::vector<PoolProblem> build_pool(const std::vector<ProblemRun>& runs, const std::vector<Event>& events);

struct ReplayCheck {
  std::vector<std::string> divergences;
  std::size_t verdicts_checked = 0;
  std::size_t selections_checked = 0;
  bool ok() const { return divergences.empty(); }
};

/// Re-derives verdicts from recorded provider responses and selections from
/// recorded verdicts, comparing both with what the log says.
ReplayCheck replay_check(const RunConfig& config, const std::vector<Problem>& problems, const PromptLibrary& prompts,
                         const std::vector<Event>& events);

}  // namespace ttscale
