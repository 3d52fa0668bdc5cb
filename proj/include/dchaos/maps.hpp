#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dchaos/rational.hpp"

namespace dchaos {

/// Closed interval [lo, hi] with lo < hi.
class Interval {
 public:
  Interval(Rational lo, Rational hi);

  const Rational& lo() const { return lo_; }
  const Rational& hi() const { return hi_; }
  Rational length() const { return hi_ - lo_; }
  bool contains(const Rational& x) const { return lo_ <= x && x <= hi_; }

  friend bool operator==(const Interval& a, const Interval& b) {
    return a.lo_ == b.lo_ && a.hi_ == b.hi_;
  }

 private:
  Rational lo_;
  Rational hi_;
};

struct Breakpoint {
  Rational x;
  Rational y;
};

/// Continuous piecewise-linear self-map of an interval, given by its
/// breakpoints and linear interpolation between them. Immutable.
class PiecewiseLinearMap {
 public:
  explicit PiecewiseLinearMap(std::vector<Breakpoint> breakpoints);

  Interval domain() const { return Interval(points_.front().x, points_.back().x); }
  std::span<const Breakpoint> breakpoints() const { return points_; }
  std::size_t segments() const { return points_.size() - 1; }

  /// Slope of segment k, between breakpoints k and k+1.
  Rational slope(std::size_t k) const;

  /// Exact evaluation. Throws DomainError outside the domain.
  Rational operator()(const Rational& x) const;

  /// Floating-point evaluation used by the Monte Carlo engine. Arguments
  /// outside the domain are a DomainError; results are clamped into it.
  double operator()(double x) const;

 private:
  std::vector<Breakpoint> points_;
  std::vector<double> xs_;
  std::vector<double> ys_;
  std::vector<double> slopes_;
  double lo_d_ = 0.0;
  double hi_d_ = 0.0;
};

PiecewiseLinearMap identity_map(const Interval& interval);
PiecewiseLinearMap constant_map(const Interval& interval, const Rational& value);

/// Least Lipschitz constant: the maximal absolute slope.
Rational lipschitz_constant(const PiecewiseLinearMap& map);

/// The contraction constant if the map is a strict contraction (max slope < 1).
std::optional<Rational> contraction_constant(const PiecewiseLinearMap& map);

/// sup over the domain of |a(x) - b(x)|, exact. Domains must agree.
Rational sup_distance(const PiecewiseLinearMap& a, const PiecewiseLinearMap& b);

/// The random system: apply f with probability p, g otherwise.
struct SystemConfig {
  PiecewiseLinearMap f;
  PiecewiseLinearMap g;
  Rational p;
  Interval interval;
  /// Builtin name when the system came from builtin(); empty otherwise.
  std::string name;

  SystemConfig(PiecewiseLinearMap f, PiecewiseLinearMap g, Rational p, std::string name = {});

  SystemConfig with_p(const Rational& q) const;
  /// The same system with the roles of f and g exchanged (and p -> 1-p).
  SystemConfig swapped() const;
};

/// Names accepted by builtin().
std::span<const std::string_view> builtin_names();

/// One of: example1, example2, halving_pair, mixing_pair.
SystemConfig builtin(std::string_view name, const Rational& p = Rational(1, 2));

enum class Verdict {
  ZeroByContraction,
  ZeroByLipschitzSmallExpanding,     // cM >= 1 rule
  ZeroByLipschitzSmallNonexpanding,  // cM <= 1 rule
  NoGuarantee,
};

std::string_view verdict_name(Verdict v);

/// Outcome of the sufficient-condition check for a zero measure of chaos.
/// NoGuarantee says nothing about chaos either way.
struct Certificate {
  Verdict verdict = Verdict::NoGuarantee;
  Rational lipschitz;    // M
  Rational contraction;  // c
  /// Step count r of the rule that fired; nullopt when every r qualifies.
  std::optional<long> r;
  /// Upper bound the probability of the Lipschitz map must stay below.
  Rational threshold;
  /// 'f' or 'g': which map played the Lipschitz role.
  char lipschitz_map = 'f';
  Rational lipschitz_probability;
};

Certificate zero_chaos_certificate(const SystemConfig& config);

}  // namespace dchaos
