// SPDX-License-Identifier: Apache-2.0
//
// Accuracy as a function of the number of parallel attempts.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "ttscale/evaluation.hpp"

namespace ttscale {

/// 1 − C(N−c, n)/C(N, n), evaluated exactly. Throws DomainError unless
/// 0 ≤ c ≤ N and 1 ≤ n ≤ N.
double expected_best_of_n(int c, int N, int n);

/// One problem's recorded pool, enough to rerun any strategy offline on a
/// subset of its candidates.
struct PoolProblem {
  std::string id;
  int difficulty = 1;
  std::vector<Candidate> candidates;
  DistinctSet distinct;
  /// Mean verifier score per full-pool representative.
  std::map<int, double> simple_scores;
  std::map<int, double> symbolic_scores;
  /// Recorded tie-break results between representatives.
  std::vector<PairOutcome> simple_pairs;
  std::vector<PairOutcome> symbolic_pairs;
};

/// Outcome of `strategy` restricted to the candidates at `positions`
/// (offsets into pool.candidates). Subset members keep their full-pool
/// group, score and recorded matchups.
bool solve_subset(const PoolProblem& pool, Strategy strategy, const std::vector<std::size_t>& positions,
                  double delta);

struct ScalingCurve {
  Strategy strategy = Strategy::BestOfN;
  std::string label = "pooled";  // "pooled" or "level<k>"
  std::vector<int> n_values;
  std::vector<double> accuracy;
  std::vector<double> half_width;  // 95% normal-approximation interval
  int resamples = 0;
};

/// For each n, `resamples` subsets of size n drawn without replacement
/// (seeded) from every problem's pool; accuracy is the mean solved flag.
/// Throws DomainError when n exceeds a pool or n_values is not increasing.
ScalingCurve empirical_curve(const std::vector<PoolProblem>& pool, Strategy strategy, const std::vector<int>& n_values,
                             int resamples, std::uint64_t seed, double delta = 0.05);

/// Columnar text: header `strategy label n accuracy half_width resamples`.
std::string curves_to_tsv(const std::vector<ScalingCurve>& curves);

}  // namespace ttscale
