// SPDX-License-Identifier: Apache-2.0
//
// Selection strategies over an evaluated candidate pool.
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "ttscale/evaluation.hpp"
#include "ttscale/prompts.hpp"
#include "ttscale/provider.hpp"

namespace ttscale {

/// Candidate with the given index, or nullptr.
const Candidate* find_candidate(const std::vector<Candidate>& candidates, int index);

/// Largest group by member count; ties go to the lowest representative.
SelectionOutcome majority_vote(const DistinctSet& distinct, const std::vector<Candidate>& candidates);

/// Solved iff any candidate is correct; chooses the lowest correct index.
SelectionOutcome best_of_n(const std::vector<Candidate>& candidates);

/// {i : V̄_i ≥ max V̄ − delta}, by descending V̄ then ascending index.
std::vector<int> best_set(const std::vector<ScoredCandidate>& scored, double delta);

/// Pair result from per-call votes (each the index voted for, or nullopt
/// for an abstention). Majority wins; equal votes give no winner.
PairOutcome decide_pair(int first, int second, const std::vector<std::optional<int>>& votes);

struct TournamentResult {
  int winner = 0;
  std::map<int, int> wins;
};

/// Most matchup wins among `entrants`; ties go to the higher score, then the
/// lower index. Pairs absent from `pairs` count for neither side.
TournamentResult tournament_winner(const std::vector<int>& entrants, const std::vector<PairOutcome>& pairs,
                                   const std::map<int, double>& scores);

struct TieBreakSettings {
  std::string model_name = "replay";
  double temperature = 1.0;
  std::uint64_t seed = 0;
  int k_tie = 5;
  bool randomize_order = true;
  /// Offline re-derivation: calls with no recorded response abstain.
  bool missing_as_abstention = false;
};

/// Whether call `call` of the (first, second) matchup shows `second` as Attempt 1.
bool tie_order_swapped(const TieBreakSettings& settings, const std::string& strategy, int first, int second,
                       int call);

/// Runs k_tie tie-break calls for one pair (first < second).
PairOutcome compare_pair(const Problem& problem, const Candidate& first, const Candidate& second,
                         const TieBreakSettings& settings, ChatClient& client, const PromptLibrary& prompts,
                         const Scope& scope, CallMode mode = CallMode::Live);

using PairJudge = std::function<PairOutcome(int first, int second)>;

/// Verifier strategy on already-scored representatives: best set, then a
/// tournament over it when it holds more than one entrant. Outcome is the
/// chosen representative's correctness.
SelectionOutcome select_with_scores(Strategy strategy, const std::vector<Candidate>& candidates,
                                    const std::vector<ScoredCandidate>& scored, double delta,
                                    const PairJudge& judge);

}  // namespace ttscale
