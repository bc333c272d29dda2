// SPDX-License-Identifier: Apache-2.0
#include "ttscale/selection.hpp"

#include <algorithm>
#include <cmath>

#include "ttscale/errors.hpp"
#include "ttscale/random.hpp"
#include "ttscale/verdict.hpp"

namespace ttscale {

const Candidate* find_candidate(const std::vector<Candidate>& candidates, int index) {
  for (const auto& c : candidates)
    if (c.index == index) return &c;
  return nullptr;
}

SelectionOutcome majority_vote(const DistinctSet& distinct, const std::vector<Candidate>& candidates) {
  SelectionOutcome out;
  out.strategy = Strategy::Majority;
  std::optional<std::size_t> best;
  for (std::size_t g = 0; g < distinct.groups.size(); ++g) {
    if (!best || distinct.groups[g].size() > distinct.groups[*best].size() ||
        (distinct.groups[g].size() == distinct.groups[*best].size() &&
         distinct.representatives[g] < distinct.representatives[*best]))
      best = g;
  }
  if (!best) return out;
  out.chosen_index = distinct.representatives[*best];
  out.best_set = distinct.groups[*best];
  const auto* c = find_candidate(candidates, *out.chosen_index);
  out.solved = c && c->correct();
  return out;
}

SelectionOutcome best_of_n(const std::vector<Candidate>& candidates) {
  SelectionOutcome out;
  out.strategy = Strategy::BestOfN;
  for (const auto& c : candidates) {
    if (!c.correct()) continue;
    out.solved = true;
    if (!out.chosen_index || c.index < *out.chosen_index) out.chosen_index = c.index;
  }
  return out;
}

std::vector<int> best_set(const std::vector<ScoredCandidate>& scored, double delta) {
  if (scored.empty()) return {};
  double top = scored.front().mean_score;
  for (const auto& s : scored) top = std::max(top, s.mean_score);
  std::vector<const ScoredCandidate*> kept;
  for (const auto& s : scored)
    if (s.mean_score >= top - delta - 1e-12) kept.push_back(&s);
  std::sort(kept.begin(), kept.end(), [](auto* a, auto* b) {
    if (a->mean_score != b->mean_score) return a->mean_score > b->mean_score;
    return a->candidate_index < b->candidate_index;
  });
  std::vector<int> indices;
  for (auto* s : kept) indices.push_back(s->candidate_index);
  return indices;
}

PairOutcome decide_pair(int first, int second, const std::vector<std::optional<int>>& votes) {
  PairOutcome pair{first, second, 0, 0, 0, std::nullopt};
  for (const auto& v : votes) {
    if (!v) ++pair.abstentions;
    else if (*v == first) ++pair.votes_first;
    else if (*v == second) ++pair.votes_second;
    else ++pair.abstentions;
  }
  if (pair.votes_first > pair.votes_second) pair.winner = first;
  else if (pair.votes_second > pair.votes_first) pair.winner = second;
  return pair;
}

TournamentResult tournament_winner(const std::vector<int>& entrants, const std::vector<PairOutcome>& pairs,
                                   const std::map<int, double>& scores) {
  if (entrants.empty()) throw Error("tournament without entrants");
  TournamentResult result;
  for (int e : entrants) result.wins[e] = 0;
  for (const auto& p : pairs)
    if (p.winner && result.wins.count(p.first) && result.wins.count(p.second)) ++result.wins[*p.winner];
  auto score = [&](int i) {
    auto it = scores.find(i);
    return it == scores.end() ? 0.0 : it->second;
  };
  result.winner = entrants.front();
  for (int e : entrants) {
    const int we = result.wins[e], ww = result.wins[result.winner];
    if (we > ww || (we == ww && (score(e) > score(result.winner) ||
                                 (score(e) == score(result.winner) && e < result.winner))))
      result.winner = e;
  }
  return result;
}

bool tie_order_swapped(const TieBreakSettings& settings, const std::string& strategy, int first, int second,
                       int call) {
  if (!settings.randomize_order) return false;
  std::mt19937_64 rng(derive_seed(settings.seed, "tie_order/" + strategy,
                                  {static_cast<std::uint64_t>(first), static_cast<std::uint64_t>(second),
                                   static_cast<std::uint64_t>(call)}));
  return bounded(rng, 2) == 1;
}

PairOutcome compare_pair(const Problem& problem, const Candidate& first, const Candidate& second,
                         const TieBreakSettings& settings, ChatClient& client, const PromptLibrary& prompts,
                         const Scope& scope, CallMode mode) {
  const std::string strategy = scope.strategy.value_or("");
  std::vector<std::optional<int>> votes;
  for (int call = 0; call < settings.k_tie; ++call) {
    const bool swapped = tie_order_swapped(settings, strategy, first.index, second.index, call);
    const Candidate& one = swapped ? second : first;
    const Candidate& two = swapped ? first : second;
    ChatRequest request;
    request.model_name = settings.model_name;
    request.temperature = settings.temperature;
    request.seed = static_cast<std::int64_t>(
        derive_seed(settings.seed, "tie_break/" + strategy,
                    {static_cast<std::uint64_t>(first.index), static_cast<std::uint64_t>(second.index),
                     static_cast<std::uint64_t>(call)}) >>
        33);
    request.messages.push_back(Message{Role::User,
                                       prompts.render(prompt_names::kTieBreak,
                                                      {{"problem_statement", problem.statement},
                                                       {"answer_requirement", problem.answer_requirements},
                                                       {"attempt_1", one.reasoning},
                                                       {"attempt_2", two.reasoning}}),
                                       std::nullopt,
                                       {}});
    std::optional<int> vote;
    try {
      const auto response = client.complete(request, scope.with_attempt(call), mode);
      if (auto pick = parse_tie_break(response.content.value_or(""))) vote = *pick == 1 ? one.index : two.index;
    } catch (const FixtureMissError&) {
      if (!settings.missing_as_abstention) throw;
    } catch (const TransportError&) {
    } catch (const TransportExhaustedError&) {
    } catch (const MalformedResponseError&) {
    }
    votes.push_back(vote);
  }
  return decide_pair(first.index, second.index, votes);
}

SelectionOutcome select_with_scores(Strategy strategy, const std::vector<Candidate>& candidates,
                                    const std::vector<ScoredCandidate>& scored, double delta,
                                    const PairJudge& judge) {
  SelectionOutcome out;
  out.strategy = strategy;
  if (scored.empty()) return out;
  out.best_set = best_set(scored, delta);
  if (out.best_set.size() == 1) {
    out.chosen_index = out.best_set.front();
  } else {
    std::vector<int> entrants = out.best_set;
    std::sort(entrants.begin(), entrants.end());
    for (std::size_t a = 0; a < entrants.size(); ++a)
      for (std::size_t b = a + 1; b < entrants.size(); ++b) out.matchups.push_back(judge(entrants[a], entrants[b]));
    std::map<int, double> scores;
    for (const auto& s : scored) scores[s.candidate_index] = s.mean_score;
    auto result = tournament_winner(out.best_set, out.matchups, scores);
    out.chosen_index = result.winner;
    out.matchup_wins = std::move(result.wins);
    out.tournament_ran = true;
  }
  const auto* c = find_candidate(candidates, *out.chosen_index);
  out.solved = c && c->correct();
  return out;
}

}  // namespace ttscale
