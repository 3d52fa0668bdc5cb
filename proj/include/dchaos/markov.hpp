#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dchaos/maps.hpp"
#include "dchaos/rational.hpp"

namespace dchaos {

/// Finite Markov chain with exact rational, row-stochastic transitions.
struct MarkovChain {
  using Row = std::vector<std::pair<std::size_t, Rational>>;
  std::vector<Row> rows;

  std::size_t size() const { return rows.size(); }
  /// Throws InputError unless every row is nonnegative, in range and sums to 1.
  void validate() const;
};

/// Chain of the pair (x_n, y_n) on A x A, state index i * |A| + j.
struct PairChain {
  std::vector<Rational> A;  // sorted, distinct
  MarkovChain chain;

  std::size_t index(std::size_t i, std::size_t j) const { return i * A.size() + j; }
  std::pair<std::size_t, std::size_t> pair(std::size_t state) const {
    return {state / A.size(), state % A.size()};
  }
  /// State of (a, b); throws InputError if a or b is not in A.
  std::size_t state_of(const Rational& a, const Rational& b) const;
};

/// Throws InvarianceError naming the first a in A with f(a) or g(a) outside A.
void check_invariance(const SystemConfig& config, std::span<const Rational> A);

PairChain build_pair_chain(const SystemConfig& config, std::span<const Rational> A);

struct ChainDecomposition {
  std::vector<std::vector<std::size_t>> closed;  // states of each closed class, sorted
  std::vector<std::size_t> transient;
  std::vector<int> class_of;                     // -1 for transient states
  std::vector<std::vector<Rational>> stationary;  // aligned with closed[l]
  /// For each state, P(absorbed into class l) as sparse (l, prob) entries.
  /// Recurrent states carry their own class with probability 1.
  std::vector<std::vector<std::pair<std::size_t, Rational>>> hitting;
  /// Position of each recurrent state inside its class.
  std::vector<std::size_t> position;

  Rational hitting_probability(std::size_t state, std::size_t cls) const;
};

ChainDecomposition decompose(const MarkovChain& chain);

/// lim (1/n) sum_{k<n} P(Z_k = j | Z_0 = i).
Rational cesaro_limit(const ChainDecomposition& dec, std::size_t i, std::size_t j);

/// Exact lim F^(n)(t) for the pair (a, b) of A.
Rational exact_F_limit(const PairChain& pc, const ChainDecomposition& dec, const Rational& a, const Rational& b,
                       const Rational& t);

struct AbsorptionReport {
  bool covering = false;
  /// P(x_n not in A) <= bound_base^n when covering holds.
  Rational bound_base;
  /// A point of I reached by neither map into A, when covering fails.
  std::optional<Rational> uncovered;
  long n_probe = 0;
  /// Monte Carlo fraction of trajectories in A at n_probe (covering fails).
  std::optional<double> empirical;
  std::uint64_t samples = 0;
};

/// Whether every x in I has f(x) in A or g(x) in A.
bool one_step_covering(const SystemConfig& config, std::span<const Rational> A,
                       std::optional<Rational>* uncovered = nullptr);

AbsorptionReport check_absorption(const SystemConfig& config, std::span<const Rational> A, long n_probe,
                                  std::uint64_t samples = 1000, std::uint64_t seed = 1);

}  // namespace dchaos
