#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dchaos/engine.hpp"
#include "dchaos/maps.hpp"
#include "dchaos/rational.hpp"
#include "dchaos/symbolic.hpp"

namespace dchaos {

enum class GridScheme { uniform, triadic, standard, custom };

/// Increasing thresholds t in (0, |I|].
class ThresholdGrid {
 public:
  /// |I| k / n for k = 1..n.
  static ThresholdGrid uniform(const Interval& interval, int n);
  /// |I| 3^-k and 2 |I| 3^-k for k = 0..depth, those <= |I|.
  static ThresholdGrid triadic(const Interval& interval, int depth = 12);
  /// triadic(12) merged with uniform(64).
  static ThresholdGrid standard(const Interval& interval);
  static ThresholdGrid custom(const Interval& interval, std::vector<Rational> values);

  GridScheme scheme() const { return scheme_; }
  const std::vector<Rational>& values() const { return values_; }
  const std::vector<double>& doubles() const { return doubles_; }
  std::size_t size() const { return values_.size(); }
  const Rational& length() const { return length_; }
  std::string describe() const;

 private:
  ThresholdGrid(GridScheme scheme, const Interval& interval, std::vector<Rational> values, std::string label);

  GridScheme scheme_;
  Rational length_;
  std::vector<Rational> values_;
  std::vector<double> doubles_;
  std::string label_;
};

/// F^(n)(t) for n = 1..n_hi and its envelopes over the window [n_lo, n_hi].
struct DistributionProfile {
  std::vector<double> t;
  std::vector<Rational> t_exact;
  Rational length;  // |I|
  long n_lo = 1;
  long n_hi = 1;
  long burn_in = 0;
  ProbMode source = ProbMode::exact;
  std::vector<double> F;      // row n-1, column k
  std::vector<double> F_err;  // same layout
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> error;  // per t, worst error over the window
  /// Exact envelopes when the step probabilities were exact.
  std::vector<Rational> lower_exact;
  std::vector<Rational> upper_exact;

  double at(long n, std::size_t k) const { return F[static_cast<std::size_t>(n - 1) * t.size() + k]; }
  bool has_exact() const { return !lower_exact.empty(); }
};

/// Mean of the step probabilities i = burn_in .. burn_in + n - 1 at column k.
double cesaro(const StepProbabilities& probs, long n, std::size_t k, long burn_in = 0);

/// Window start for a horizon and a window fraction in (0, 1].
long window_start(long n_hi, double window_frac);

DistributionProfile profile_from_steps(const StepProbabilities& probs, std::span<const Rational> thresholds,
                                       const Rational& length, long n_hi, double window_frac, long burn_in = 0);

struct EngineParams {
  ProbMode mode = ProbMode::monte_carlo;
  McPlan mc;
  ExactOptions exact;
  /// F^(n) averages steps burn_in .. burn_in + n - 1.
  long burn_in = 0;
};

DistributionProfile profile(const SystemConfig& config, const Rational& x, const Rational& y,
                            const ThresholdGrid& grid, long n_hi, double window_frac,
                            const EngineParams& params = {});

/// Symbolic profile of x against y = 0 for a rule set (floating DP).
DistributionProfile symbolic_profile(Rules rules, const BlockSeq& x, const Rational& p, const ThresholdGrid& grid,
                                     long n_hi, double window_frac, long burn_in = 0);

/// (1/|I|) * integral over (0, |I|] of F_upper - F_lower. F is
/// left-continuous in t, so on (t_{k-1}, t_k] the gap is taken at t_k, on
/// (0, t_0] at t_0, and past the last grid point at the last grid point.
double gap_area(const DistributionProfile& profile);
/// The same integral for the error band of the envelopes.
double gap_area_error(const DistributionProfile& profile);
/// Exact version; nullopt unless the profile carries exact envelopes.
std::optional<Rational> gap_area_exact(const DistributionProfile& profile);

struct PairPoint {
  std::string label;
  Rational x;
  Rational y;
  /// Set for symbolic points (against y = 0).
  std::optional<BlockSeq> sequence;
};

struct PairStrategy {
  int grid = 16;  // grid x grid uniform points of I x I, pairs with x < y
  int rays = 64;  // (x, lo) pairs
  std::vector<std::pair<Rational, Rational>> extra;
  /// Witness points for k = 1..witness_k when the system has a rule set.
  int witness_k = 0;
  std::vector<double> witness_eps{0.02};
};

struct PairArea {
  PairPoint pair;
  double area = 0.0;
  double error = 0.0;
};

struct ChaosEstimate {
  double mu_hat = 0.0;
  std::size_t best = 0;
  std::vector<PairArea> areas;
  long n_lo = 0;
  long n_hi = 0;
  double window_frac = 0.5;
  std::string grid;
  EngineParams params;
  std::vector<std::string> notes;

  const PairArea& best_pair() const { return areas.at(best); }
};

std::vector<PairPoint> make_pairs(const SystemConfig& config, const PairStrategy& strategy, long n_lo, long n_hi);

ChaosEstimate estimate_mu(const SystemConfig& config, const PairStrategy& strategy, const ThresholdGrid& grid,
                          long n_hi, double window_frac, const EngineParams& params = {});

}  // namespace dchaos
