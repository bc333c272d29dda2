// SPDX-License-Identifier: Apache-2.0
#include "ttscale/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <boost/multiprecision/cpp_int.hpp>
#include <fmt/core.h>

#include "ttscale/errors.hpp"
#include "ttscale/random.hpp"
#include "ttscale/selection.hpp"

namespace ttscale {

double expected_best_of_n(int c, int N, int n) {
  if (N < 1 || c < 0 || c > N || n < 1 || n > N)
    throw DomainError(fmt::format("expected_best_of_n: need 0 <= c <= N and 1 <= n <= N (c={}, N={}, n={})", c, N, n));
  using boost::multiprecision::cpp_int;
  using boost::multiprecision::cpp_rational;
  if (N - c < n) return 1.0;
  // C(N−c, n)/C(N, n) = Π_{i<n} (N−c−i)/(N−i)
  cpp_int num = 1, den = 1;
  for (int i = 0; i < n; ++i) {
    num *= N - c - i;
    den *= N - i;
  }
  const cpp_rational p = cpp_rational(1) - cpp_rational(num, den);
  return p.convert_to<double>();
}

namespace {

int group_id(const PoolProblem& pool, const Candidate& c) {
  auto g = pool.distinct.group_of(c.index);
  return g ? static_cast<int>(*g) : -1;
}

}  // namespace

bool solve_subset(const PoolProblem& pool, Strategy strategy, const std::vector<std::size_t>& positions, double delta) {
  if (strategy == Strategy::BestOfN) {
    for (auto p : positions)
      if (pool.candidates[p].correct()) return true;
    return false;
  }

  std::map<int, int> members;  // group -> count in subset
  for (auto p : positions) {
    const int g = group_id(pool, pool.candidates[p]);
    if (g >= 0) ++members[g];
  }
  if (members.empty()) return false;
  auto rep_correct = [&](int rep) {
    const auto* c = find_candidate(pool.candidates, rep);
    return c && c->correct();
  };

  if (strategy == Strategy::Majority) {
    int best = -1;
    for (const auto& [g, count] : members)  // ascending g == ascending representative
      if (best < 0 || count > members[best]) best = g;
    return rep_correct(pool.distinct.representatives[best]);
  }

  const bool simple = strategy == Strategy::SimpleVerifier;
  const auto& scores = simple ? pool.simple_scores : pool.symbolic_scores;
  const auto& pairs = simple ? pool.simple_pairs : pool.symbolic_pairs;
  std::vector<ScoredCandidate> scored;
  for (const auto& [g, _] : members) {
    const int rep = pool.distinct.representatives[g];
    auto it = scores.find(rep);
    scored.push_back(ScoredCandidate{rep, {}, it == scores.end() ? 0.0 : it->second});
  }
  const auto best = best_set(scored, delta);
  if (best.size() == 1) return rep_correct(best.front());
  return rep_correct(tournament_winner(best, pairs, scores).winner);
}

ScalingCurve empirical_curve(const std::vector<PoolProblem>& pool, Strategy strategy, const std::vector<int>& n_values,
                             int resamples, std::uint64_t seed, double delta) {
  if (resamples < 1) throw DomainError("resamples must be >= 1");
  if (pool.empty()) throw EmptyRunError("no problems in the pool");
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    if (n_values[i] < 1) throw DomainError("subset sizes must be >= 1");
    if (i > 0 && n_values[i] <= n_values[i - 1]) throw DomainError("subset sizes must be strictly increasing");
  }
  ScalingCurve curve;
  curve.strategy = strategy;
  curve.n_values = n_values;
  curve.resamples = resamples;
  for (int n : n_values) {
    std::int64_t solved = 0, trials = 0;
    for (std::size_t p = 0; p < pool.size(); ++p) {
      const auto size = pool[p].candidates.size();
      if (static_cast<std::size_t>(n) > size)
        throw DomainError(fmt::format("n = {} exceeds the {} candidates of problem {}", n, size, pool[p].id));
      std::mt19937_64 rng(derive_seed(seed, "curve/" + to_string(strategy),
                                      {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(p)}));
      std::vector<std::size_t> order(size);
      for (int r = 0; r < resamples; ++r) {
        for (std::size_t i = 0; i < size; ++i) order[i] = i;
        // partial Fisher-Yates: the first n slots are the subset
        for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i)
          std::swap(order[i], order[i + bounded(rng, size - i)]);
        std::vector<std::size_t> subset(order.begin(), order.begin() + n);
        std::sort(subset.begin(), subset.end());
        solved += solve_subset(pool[p], strategy, subset, delta) ? 1 : 0;
        ++trials;
      }
    }
    const double acc = static_cast<double>(solved) / static_cast<double>(trials);
    curve.accuracy.push_back(acc);
    curve.half_width.push_back(1.96 * std::sqrt(acc * (1 - acc) / static_cast<double>(trials)));
  }
  return curve;
}

std::string curves_to_tsv(const std::vector<ScalingCurve>& curves) {
  std::string out = "strategy\tlabel\tn\taccuracy\thalf_width\tresamples\n";
  for (const auto& c : curves)
    for (std::size_t i = 0; i < c.n_values.size(); ++i)
      out += fmt::format("{}\t{}\t{}\t{:.6f}\t{:.6f}\t{}\n", to_string(c.strategy), c.label, c.n_values[i],
                         c.accuracy[i], c.half_width[i], c.resamples);
  return out;
}

}  // namespace ttscale
