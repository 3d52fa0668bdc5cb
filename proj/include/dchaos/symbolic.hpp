#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dchaos/engine.hpp"
#include "dchaos/maps.hpp"
#include "dchaos/rational.hpp"

namespace dchaos {

/// Ternary sequence made of digit blocks, the last one infinite.
/// "0^3 2^5 0^inf" is 0.00022222000... in base 3.
class BlockSeq {
 public:
  static constexpr long kInf = -1;

  struct Block {
    int digit = 0;
    long count = 0;  // kInf for the final block

    friend bool operator==(const Block&, const Block&) = default;
  };

  /// 0^inf.
  BlockSeq();
  /// Finite blocks followed by tail^inf. Zero-count blocks are dropped and
  /// equal neighbours merged.
  BlockSeq(std::span<const Block> finite, int tail);

  static BlockSeq parse(std::string_view text);
  std::string to_string() const;

  const std::vector<Block>& blocks() const { return blocks_; }
  int tail_digit() const { return blocks_.back().digit; }
  /// Number of digits before the infinite block.
  long prefix_length() const;
  /// Digit at position i (0-based).
  int digit(long i) const;
  bool contains_digit(int d) const;

  Rational value() const;

  /// Sequence with the first n digits removed.
  BlockSeq suffix(long n) const;
  /// Digit map 0<->2, 1 fixed.
  BlockSeq conjugated() const;
  /// d^count followed by this sequence.
  BlockSeq prepended(int d, long count = 1) const;
  /// This prefix (finite part) followed by d^count and then tail^inf.
  BlockSeq appended(int d, long count, int tail) const;
  /// The other expansion of the same value, if the value is a triadic
  /// rational in (0,1).
  std::optional<BlockSeq> alternate() const;
  /// The expansion ending in 0^inf when there is a choice.
  BlockSeq canonical() const;

  friend bool operator==(const BlockSeq&, const BlockSeq&) = default;

 private:
  void normalize();
  std::vector<Block> blocks_;
};

enum class Rules { ex1, ex2 };

Rules parse_rules(std::string_view name);
std::string_view rules_name(Rules rules);
/// The builtin system the rule set describes (example1 / example2).
SystemConfig rules_system(Rules rules, const Rational& p);
/// The rule set of a builtin config, if it has one.
std::optional<Rules> rules_for(const SystemConfig& config);

/// Symbolic image of seq under f (which = 'f') or g (which = 'g').
BlockSeq apply(Rules rules, char which, const BlockSeq& seq);

/// Longest common prefix length, maximized over expansions; nullopt when the
/// values coincide.
std::optional<long> u_index(const BlockSeq& x, const BlockSeq& y);

/// P(simple +-1 walk with up-probability p ever reaches -k).
Rational rw_hitting(const Rational& p, long k);

/// Monte Carlo frequency of reaching -k within `steps` steps.
double rw_hitting_mc(double p, long k, long steps, std::uint64_t walks, std::uint64_t seed, unsigned threads = 0);

/// mu of example1 as a function of p.
Rational mu_theoretical_ex1(const Rational& p);

/// Position of the symbolic walk for x against y = 0. For ex1 the current
/// point is 0^pushed followed by the unread tail of x (conjugated when conj
/// is set). For ex2 at most one digit sits in front of the tail: prefix is
/// -1 for none, otherwise that digit (0 or 2).
struct WalkState {
  long pushed = 0;
  long shift = 0;
  bool conj = false;
  int prefix = -1;
};

/// Exact P(x_n < t) for n = 0..n_max, y = 0. Thresholds must be positive and
/// increasing.
StepProbabilities dp_exact_law(Rules rules, const BlockSeq& x, const Rational& p, int n_max,
                               std::span<const Rational> thresholds);

/// Floating-point version of dp_exact_law for long horizons. Edge states
/// lighter than prune are dropped; err holds the dropped mass.
StepProbabilities dp_fast_law(Rules rules, const BlockSeq& x, const Rational& p, int n_max,
                              std::span<const Rational> thresholds, double prune = 1e-16);

// ---------------------------------------------------------------------------
// Witness points

struct WitnessParams {
  /// Tolerance of stage j is eps[j-1]; the last entry repeats. Empty: 1/j.
  std::vector<double> eps;
  int stages = 2;
  long cap_m = 5000;
  long cap_n = 5000;
  /// Stage step counts are at least this large.
  long n_min = 1;
  /// Leading finite word r, without ones.
  std::vector<BlockSeq::Block> prefix;
};

struct WitnessStage {
  int index = 0;  // j, from 1
  int digit = 0;
  long m = 0;
  long n = 0;
  double eps = 0.0;
  std::vector<Rational> t;    // thresholds checked at this stage
  std::vector<double> target;
  std::vector<double> achieved;  // F^(n)(t) recomputed on the returned witness
};

struct WitnessResult {
  BlockSeq x;
  long k = 0;
  Rules rules = Rules::ex1;
  Rational p;
  std::vector<WitnessStage> stages;
  bool complete = false;
  std::string diagnostic;
};

/// Alternating 0- and 2-block construction of a point x with a large gap
/// between lower and upper distribution functions against y = 0.
WitnessResult witness_x_k(Rules rules, long k, const Rational& p, const WitnessParams& params = {});

/// Thresholds the witness search works with: 3^-l - 3^-k (ex1), or
/// 3^-k and 1 - 3^-k (ex2).
std::vector<Rational> witness_thresholds(Rules rules, long k);

}  // namespace dchaos
