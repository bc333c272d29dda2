// SPDX-License-Identifier: Apache-2.0
//
// Independent reference implementations the tests compare the library
// against. They favour obviousness over speed and share no code with it.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "ttscale/types.hpp"

namespace ttscale::oracle {

// ---------------------------------------------------------------------------
// Random candidate pools

struct Pool {
  std::vector<Candidate> candidates;
  /// Palette entry each candidate's outputs were drawn from.
  std::vector<int> palette_of;
};

/// Up to `max_n` candidates whose output vectors come from a small palette
/// (some with error markers), jittered far below the dedup tolerance.
/// Candidates are shuffled so indices arrive out of order.
inline Pool random_pool(std::mt19937_64& rng, int max_n) {
  const int n = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_n));
  const int palette_size = 1 + static_cast<int>(rng() % 5);
  const int correct_palette = static_cast<int>(rng() % (palette_size + 1));  // may be none
  std::vector<OutputVector> palette;
  for (int p = 0; p < palette_size; ++p) {
    OutputVector v;
    const bool all_error = rng() % 6 == 0;
    for (int k = 0; k < 3; ++k) {
      if (all_error || rng() % 10 == 0) v.emplace_back(ErrorMarker{static_cast<ErrorKind>(rng() % 4)});
      else v.emplace_back(NumericTuple{0.5 * static_cast<double>(p + 1) + static_cast<double>(k)});
    }
    palette.push_back(std::move(v));
  }
  Pool pool;
  for (int i = 0; i < n; ++i) {
    const int p = static_cast<int>(rng() % palette.size());
    Candidate c;
    c.index = i;
    c.output_vector = palette[p];
    if (rng() % 2)
      for (auto& e : *c.output_vector)
        if (auto* t = std::get_if<NumericTuple>(&e)) (*t)[0] *= 1 + 1e-13;
    bool has_error = false;
    for (const auto& e : palette[p]) has_error |= std::holds_alternative<ErrorMarker>(e);
    if (!has_error) c.is_correct = p == correct_palette;
    pool.candidates.push_back(std::move(c));
    pool.palette_of.push_back(p);
  }
  std::vector<std::size_t> order(pool.candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  Pool shuffled;
  for (auto o : order) {
    shuffled.candidates.push_back(pool.candidates[o]);
    shuffled.palette_of.push_back(pool.palette_of[o]);
  }
  return shuffled;
}

// ---------------------------------------------------------------------------
// Partition, mode and OR

inline bool same_outputs(const OutputVector& a, const OutputVector& b, double rtol) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const auto* ma = std::get_if<ErrorMarker>(&a[k]);
    const auto* mb = std::get_if<ErrorMarker>(&b[k]);
    if (ma || mb) {
      if (!(ma && mb && ma->kind == mb->kind)) return false;
      continue;
    }
    const auto& x = std::get<NumericTuple>(a[k]);
    const auto& y = std::get<NumericTuple>(b[k]);
    if (x.size() != y.size()) return false;
    for (std::size_t t = 0; t < x.size(); ++t) {
      const double scale = std::max(std::fabs(x[t]), std::fabs(y[t]));
      if (std::fabs(x[t] - y[t]) > std::max(rtol * scale, 1e-12)) return false;
    }
  }
  return true;
}

inline bool all_error_outputs(const Candidate& c) {
  if (!c.output_vector || c.output_vector->empty()) return true;
  for (const auto& e : *c.output_vector)
    if (!std::holds_alternative<ErrorMarker>(e)) return false;
  return true;
}

/// Pairwise comparison of every pair, merged with union-find; classes listed
/// by smallest member, members ascending. All-error candidates are left out.
inline std::vector<std::vector<int>> partition(const std::vector<Candidate>& cs, double rtol) {
  const std::size_t n = cs.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (!all_error_outputs(cs[i]) && !all_error_outputs(cs[j]) &&
          same_outputs(*cs[i].output_vector, *cs[j].output_vector, rtol))
        parent[find(i)] = find(j);
  std::map<std::size_t, std::vector<int>> classes;
  for (std::size_t i = 0; i < n; ++i)
    if (!all_error_outputs(cs[i])) classes[find(i)].push_back(cs[i].index);
  std::vector<std::vector<int>> out;
  for (auto& [_, members] : classes) {
    std::sort(members.begin(), members.end());
    out.push_back(members);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

/// Representative (smallest index) of the most populous class; ties to the
/// class with the smallest representative.
inline std::optional<int> mode(const std::vector<std::vector<int>>& classes) {
  std::optional<int> best;
  std::size_t best_size = 0;
  for (const auto& c : classes) {
    if (c.size() > best_size || (c.size() == best_size && c.front() < *best)) {
      best = c.front();
      best_size = c.size();
    }
  }
  return best;
}

inline bool any_correct(const std::vector<Candidate>& cs) {
  bool solved = false;
  for (const auto& c : cs) solved = solved || (c.is_correct.has_value() && *c.is_correct);
  return solved;
}

// ---------------------------------------------------------------------------
// Best set and tournament

/// Scores as hits/k and delta as p/q, compared in integers:
/// i is kept iff (hits_max − hits_i)·q ≤ p·k.
inline std::vector<int> exact_best_set(const std::vector<int>& indices, const std::vector<int>& hits, int k, int p,
                                       int q) {
  const int top = *std::max_element(hits.begin(), hits.end());
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < hits.size(); ++i)
    if (static_cast<long>(top - hits[i]) * q <= static_cast<long>(p) * k) kept.push_back(i);
  std::sort(kept.begin(), kept.end(), [&](std::size_t a, std::size_t b) {
    return hits[a] != hits[b] ? hits[a] > hits[b] : indices[a] < indices[b];
  });
  std::vector<int> out;
  for (auto i : kept) out.push_back(indices[i]);
  return out;
}

/// Outcome of one pair: +1 first wins, -1 second wins, 0 no winner.
using PairResults = std::map<std::pair<int, int>, int>;

/// Entrant maximising (wins, score, −index), by explicit search.
inline int tournament(const std::vector<int>& entrants, const PairResults& results, const std::map<int, double>& score) {
  std::map<int, int> wins;
  for (int e : entrants) wins[e] = 0;
  for (const auto& [pair, r] : results) {
    if (r > 0) ++wins[pair.first];
    if (r < 0) ++wins[pair.second];
  }
  int best_wins = -1;
  for (int e : entrants) best_wins = std::max(best_wins, wins[e]);
  double best_score = -1;
  for (int e : entrants)
    if (wins[e] == best_wins) best_score = std::max(best_score, score.at(e));
  int winner = -1;
  for (int e : entrants)
    if (wins[e] == best_wins && score.at(e) == best_score && (winner < 0 || e < winner)) winner = e;
  return winner;
}

// ---------------------------------------------------------------------------
// Best-of-n probability

/// Fraction of all n-subsets of {0..N-1} that contain one of the first c
/// elements, by walking every subset.
inline double enumerate_best_of_n(int c, int N, int n) {
  std::vector<int> pick(n);
  std::iota(pick.begin(), pick.end(), 0);
  std::int64_t hit = 0, total = 0;
  while (true) {
    ++total;
    hit += pick.front() < c ? 1 : 0;  // pick is ascending
    int i = n - 1;
    while (i >= 0 && pick[i] == N - n + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < n; ++j) pick[j] = pick[j - 1] + 1;
  }
  return static_cast<double>(hit) / static_cast<double>(total);
}

/// Monte-Carlo estimate with std::shuffle over `resamples` draws.
inline double sample_best_of_n(int c, int N, int n, int resamples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int> items(N);
  std::iota(items.begin(), items.end(), 0);
  int hit = 0;
  for (int r = 0; r < resamples; ++r) {
    std::shuffle(items.begin(), items.end(), rng);
    hit += std::any_of(items.begin(), items.begin() + n, [c](int x) { return x < c; }) ? 1 : 0;
  }
  return static_cast<double>(hit) / resamples;
}

}  // namespace ttscale::oracle
