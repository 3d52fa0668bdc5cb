#pragma once

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "dchaos/markov.hpp"

namespace dchaos::testing {

// (1/n) sum_{k<n} P^k, in floating point.
inline std::vector<std::vector<double>> averaged_powers(const MarkovChain& c, int n) {
  const std::size_t N = c.size();
  std::vector<std::vector<double>> cur(N, std::vector<double>(N, 0.0)), sum = cur;
  for (std::size_t i = 0; i < N; ++i) cur[i][i] = 1.0;
  for (int k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) sum[i][j] += cur[i][j];
    std::vector<std::vector<double>> next(N, std::vector<double>(N, 0.0));
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) {
        if (cur[i][j] == 0.0) continue;
        for (const auto& [to, w] : c.rows[j]) next[i][to] += cur[i][j] * w.get_d();
      }
    cur = std::move(next);
  }
  for (auto& row : sum)
    for (auto& v : row) v /= n;
  return sum;
}

// Random chain with 1-3 closed classes (a cycle plus random chords each) and
// transient states that reach a closed state with probability >= 1/4 per step.
// The brute-force average is off by O(mixing time / n), so absorption is kept fast.
inline MarkovChain random_chain(std::mt19937_64& rng, std::size_t max_states) {
  std::uniform_int_distribution<std::size_t> size(2, max_states);
  const std::size_t N = size(rng);
  std::uniform_int_distribution<std::size_t> nclasses(1, std::min<std::size_t>(3, N));
  const std::size_t C = nclasses(rng);
  std::uniform_int_distribution<std::size_t> closed_count(C, std::max(C, N * 2 / 3));
  const std::size_t R = closed_count(rng);
  std::vector<std::size_t> perm(N);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);

  std::vector<std::vector<std::size_t>> classes(C);
  for (std::size_t i = 0; i < R; ++i) classes[i % C].push_back(perm[i]);
  const std::vector<std::size_t> closed(perm.begin(), perm.begin() + static_cast<long>(R));
  const std::vector<std::size_t> transient(perm.begin() + static_cast<long>(R), perm.end());

  std::uniform_int_distribution<int> weight(1, 3), chords(0, 2);
  auto pick = [&](const std::vector<std::size_t>& from) {
    return from[std::uniform_int_distribution<std::size_t>(0, from.size() - 1)(rng)];
  };
  auto emit = [](MarkovChain::Row& row, const std::vector<std::pair<std::size_t, long>>& picks) {
    long total = 0;
    for (const auto& pr : picks) total += pr.second;
    for (const auto& [to, w] : picks) row.push_back({to, frac(w, total)});
  };

  MarkovChain c;
  c.rows.resize(N);
  for (const auto& cls : classes) {
    for (std::size_t a = 0; a < cls.size(); ++a) {
      std::vector<std::pair<std::size_t, long>> picks{{cls[(a + 1) % cls.size()], weight(rng)}};
      for (int e = chords(rng); e > 0; --e) picks.push_back({pick(cls), weight(rng)});
      emit(c.rows[cls[a]], picks);
    }
  }
  for (auto s : transient) {
    std::vector<std::pair<std::size_t, long>> picks{{pick(closed), 3}};
    for (int e = 1 + chords(rng) % 2; e > 0; --e) picks.push_back({pick(transient), weight(rng)});
    emit(c.rows[s], picks);
  }
  return c;
}

}  // namespace dchaos::testing
