#include "dchaos/distfn.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "dchaos/errors.hpp"

namespace dchaos {

ThresholdGrid::ThresholdGrid(GridScheme scheme, const Interval& interval, std::vector<Rational> values,
                             std::string label)
    : scheme_(scheme), length_(interval.length()), values_(std::move(values)), label_(std::move(label)) {
  std::sort(values_.begin(), values_.end());
  values_.erase(std::unique(values_.begin(), values_.end()), values_.end());
  if (values_.empty()) throw InputError("threshold grid is empty");
  if (!(values_.front() > 0)) throw InputError("thresholds must be positive");
  if (values_.back() > length_) throw InputError("thresholds must not exceed the interval length");
  for (const auto& v : values_) doubles_.push_back(v.get_d());
}

ThresholdGrid ThresholdGrid::uniform(const Interval& interval, int n) {
  if (n < 1) throw InputError("uniform grid needs at least one point");
  std::vector<Rational> values;
  for (int k = 1; k <= n; ++k) values.push_back(interval.length() * frac(k, n));
  return ThresholdGrid(GridScheme::uniform, interval, std::move(values), "uniform:" + std::to_string(n));
}

ThresholdGrid ThresholdGrid::triadic(const Interval& interval, int depth) {
  if (depth < 0) throw InputError("triadic depth must be nonnegative");
  std::vector<Rational> values;
  for (int k = 0; k <= depth; ++k) {
    const Rational base = pow(Rational(1, 3), static_cast<unsigned long>(k));
    values.push_back(interval.length() * base);
    if (2 * base <= 1) values.push_back(interval.length() * 2 * base);
  }
  return ThresholdGrid(GridScheme::triadic, interval, std::move(values), "triadic");
}

ThresholdGrid ThresholdGrid::standard(const Interval& interval) {
  auto values = triadic(interval).values();
  const auto u = uniform(interval, 64).values();
  values.insert(values.end(), u.begin(), u.end());
  return ThresholdGrid(GridScheme::standard, interval, std::move(values), "default");
}

ThresholdGrid ThresholdGrid::custom(const Interval& interval, std::vector<Rational> values) {
  return ThresholdGrid(GridScheme::custom, interval, std::move(values), "custom");
}

std::string ThresholdGrid::describe() const { return label_; }

// ---------------------------------------------------------------------------

double cesaro(const StepProbabilities& probs, long n, std::size_t k, long burn_in) {
  if (n < 1 || burn_in < 0 || static_cast<std::size_t>(burn_in + n) > probs.steps) {
    throw InputError("cesaro: n out of range of the available steps");
  }
  if (k >= probs.thresholds()) throw InputError("cesaro: threshold index out of range");
  double total = 0.0;
  for (long i = burn_in; i < burn_in + n; ++i) total += probs.at(static_cast<std::size_t>(i), k);
  return total / static_cast<double>(n);
}

long window_start(long n_hi, double window_frac) {
  if (!(window_frac > 0.0 && window_frac <= 1.0)) throw InputError("window fraction must lie in (0, 1]");
  if (n_hi < 1) throw InputError("n_hi must be at least 1");
  const long n_lo = static_cast<long>(std::ceil((1.0 - window_frac) * static_cast<double>(n_hi) - 1e-9));
  return std::clamp(n_lo, 1L, n_hi);
}

DistributionProfile profile_from_steps(const StepProbabilities& probs, std::span<const Rational> thresholds,
                                       const Rational& length, long n_hi, double window_frac, long burn_in) {
  if (thresholds.size() != probs.thresholds()) throw InputError("threshold list does not match the probabilities");
  if (burn_in < 0) throw InputError("burn-in must be nonnegative");
  if (static_cast<std::size_t>(burn_in + n_hi) > probs.steps) {
    throw InputError("profile needs " + std::to_string(burn_in + n_hi) + " steps, got " +
                     std::to_string(probs.steps));
  }
  DistributionProfile out;
  out.t = probs.t;
  out.t_exact.assign(thresholds.begin(), thresholds.end());
  out.length = length;
  out.n_hi = n_hi;
  out.n_lo = window_start(n_hi, window_frac);
  out.burn_in = burn_in;
  out.source = probs.mode;
  const std::size_t T = probs.thresholds();
  out.F.resize(static_cast<std::size_t>(n_hi) * T);
  out.F_err.resize(out.F.size());

  std::vector<double> sum(T, 0.0), err(T, 0.0);
  const bool exact = !probs.exact.empty();
  std::vector<Rational> exact_sum(exact ? T : 0);
  if (exact) {
    out.lower_exact.assign(T, Rational(1));
    out.upper_exact.assign(T, Rational(0));
  }
  out.lower.assign(T, 1.0);
  out.upper.assign(T, 0.0);
  out.error.assign(T, 0.0);
  for (long n = 1; n <= n_hi; ++n) {
    const std::size_t i = static_cast<std::size_t>(burn_in + n - 1);
    for (std::size_t k = 0; k < T; ++k) {
      sum[k] += probs.at(i, k);
      err[k] += probs.error(i, k);
      const double f = std::clamp(sum[k] / static_cast<double>(n), 0.0, 1.0);
      const double e = err[k] / static_cast<double>(n);
      out.F[static_cast<std::size_t>(n - 1) * T + k] = f;
      out.F_err[static_cast<std::size_t>(n - 1) * T + k] = e;
      Rational fe;
      if (exact) {
        exact_sum[k] += probs.exact_at(i, k);
        fe = exact_sum[k] / n;
      }
      if (n >= out.n_lo) {
        out.lower[k] = std::min(out.lower[k], f);
        out.upper[k] = std::max(out.upper[k], f);
        out.error[k] = std::max(out.error[k], e);
        if (exact) {
          if (fe < out.lower_exact[k]) out.lower_exact[k] = fe;
          if (fe > out.upper_exact[k]) out.upper_exact[k] = fe;
        }
      }
    }
  }
  for (auto& q : out.lower_exact) q.canonicalize();
  for (auto& q : out.upper_exact) q.canonicalize();
  return out;
}

DistributionProfile profile(const SystemConfig& config, const Rational& x, const Rational& y,
                            const ThresholdGrid& grid, long n_hi, double window_frac, const EngineParams& params) {
  if (!config.interval.contains(x) || !config.interval.contains(y)) {
    throw DomainError("initial pair is outside the interval");
  }
  window_start(n_hi, window_frac);
  if (params.burn_in < 0) throw InputError("burn-in must be nonnegative");
  const long steps = params.burn_in + n_hi - 1;
  if (steps > std::numeric_limits<int>::max()) throw InputError("horizon too large");
  StepProbabilities probs;
  if (params.mode == ProbMode::exact) {
    const auto laws = propagate_exact(config, x, y, static_cast<int>(steps), params.exact);
    probs = step_probabilities_exact(laws, grid.values());
  } else {
    probs = monte_carlo(config, x.get_d(), y.get_d(), static_cast<int>(steps), grid.values(), params.mc);
  }
  return profile_from_steps(probs, grid.values(), config.interval.length(), n_hi, window_frac, params.burn_in);
}

DistributionProfile symbolic_profile(Rules rules, const BlockSeq& x, const Rational& p, const ThresholdGrid& grid,
                                     long n_hi, double window_frac, long burn_in) {
  window_start(n_hi, window_frac);
  const auto probs = dp_fast_law(rules, x, p, static_cast<int>(burn_in + n_hi - 1), grid.values());
  return profile_from_steps(probs, grid.values(), grid.length(), n_hi, window_frac, burn_in);
}

namespace {

// Lengths of the pieces (0, t_0], (t_0, t_1], ..., with the remainder up to
// |I| added to the last piece.
std::vector<double> piece_widths(const DistributionProfile& profile) {
  std::vector<double> widths(profile.t.size());
  double prev = 0.0;
  for (std::size_t k = 0; k < profile.t.size(); ++k) {
    widths[k] = profile.t[k] - prev;
    prev = profile.t[k];
  }
  widths.back() += std::max(0.0, profile.length.get_d() - prev);
  return widths;
}

}  // namespace

double gap_area(const DistributionProfile& profile) {
  if (profile.t.empty()) return 0.0;
  const auto widths = piece_widths(profile);
  double area = 0.0;
  for (std::size_t k = 0; k < widths.size(); ++k) area += widths[k] * (profile.upper[k] - profile.lower[k]);
  return std::clamp(area / profile.length.get_d(), 0.0, 1.0);
}

double gap_area_error(const DistributionProfile& profile) {
  if (profile.t.empty()) return 0.0;
  const auto widths = piece_widths(profile);
  double area = 0.0;
  for (std::size_t k = 0; k < widths.size(); ++k) area += widths[k] * 2.0 * profile.error[k];
  return area / profile.length.get_d();
}

std::optional<Rational> gap_area_exact(const DistributionProfile& profile) {
  if (!profile.has_exact()) return std::nullopt;
  Rational area = 0;
  Rational prev = 0;
  for (std::size_t k = 0; k < profile.t.size(); ++k) {
    const Rational& t = profile.t_exact[k];
    Rational width = t - prev;
    if (k + 1 == profile.t.size() && t < profile.length) width += profile.length - t;
    area += width * (profile.upper_exact[k] - profile.lower_exact[k]);
    prev = t;
  }
  area /= profile.length;
  area.canonicalize();
  return area;
}

// ---------------------------------------------------------------------------

std::vector<PairPoint> make_pairs(const SystemConfig& config, const PairStrategy& strategy, long n_lo, long n_hi) {
  std::vector<PairPoint> pairs;
  const Rational& lo = config.interval.lo();
  const Rational len = config.interval.length();
  if (strategy.grid >= 2) {
    const int g = strategy.grid;
    for (int i = 0; i < g; ++i) {
      for (int j = i + 1; j < g; ++j) {
        PairPoint pt;
        pt.x = lo + len * frac(i, g - 1);
        pt.y = lo + len * frac(j, g - 1);
        pt.label = "grid";
        pairs.push_back(std::move(pt));
      }
    }
  }
  for (int i = 1; i <= strategy.rays; ++i) {
    PairPoint pt;
    pt.x = lo + len * frac(i, strategy.rays);
    pt.y = lo;
    pt.label = "ray";
    pairs.push_back(std::move(pt));
  }
  for (const auto& [x, y] : strategy.extra) {
    if (!config.interval.contains(x) || !config.interval.contains(y)) {
      throw DomainError("pair (" + to_string(x) + ", " + to_string(y) + ") is outside the interval");
    }
    pairs.push_back(PairPoint{"extra", x, y, std::nullopt});
  }
  if (strategy.witness_k > 0) {
    const auto rules = rules_for(config);
    if (!rules) return pairs;
    WitnessParams wp;
    wp.eps = strategy.witness_eps;
    wp.stages = 2;
    wp.n_min = n_lo;
    wp.cap_n = n_hi;
    wp.cap_m = n_hi;
    for (int k = 1; k <= strategy.witness_k; ++k) {
      try {
        const auto w = witness_x_k(*rules, k, config.p, wp);
        pairs.push_back(PairPoint{"witness k=" + std::to_string(k), w.x.value(), Rational(0), w.x});
      } catch (const DomainError&) {
        break;
      }
    }
  }
  return pairs;
}

ChaosEstimate estimate_mu(const SystemConfig& config, const PairStrategy& strategy, const ThresholdGrid& grid,
                          long n_hi, double window_frac, const EngineParams& params) {
  ChaosEstimate out;
  out.n_hi = n_hi;
  out.n_lo = window_start(n_hi, window_frac);
  out.window_frac = window_frac;
  out.grid = grid.describe();
  out.params = params;
  if (strategy.witness_k > 0 && !rules_for(config)) {
    out.notes.push_back("witness points skipped: the system has no symbolic rule set");
  }
  if (strategy.witness_k > 0 && rules_for(config) == Rules::ex1 && !(config.p > Rational(1, 2))) {
    out.notes.push_back("witness points skipped: ex1 witnesses need p > 1/2");
  }
  const auto pairs = make_pairs(config, strategy, out.n_lo, n_hi);
  if (pairs.empty()) throw InputError("the pair strategy yields no pairs");

  const auto rules = rules_for(config);
  for (const auto& pt : pairs) {
    DistributionProfile prof = pt.sequence
                                   ? symbolic_profile(*rules, *pt.sequence, config.p, grid, n_hi, window_frac,
                                                      params.burn_in)
                                   : profile(config, pt.x, pt.y, grid, n_hi, window_frac, params);
    out.areas.push_back(PairArea{pt, gap_area(prof), gap_area_error(prof)});
  }
  for (std::size_t i = 0; i < out.areas.size(); ++i) {
    if (out.areas[i].area > out.areas[out.best].area) out.best = i;
  }
  out.mu_hat = out.areas[out.best].area;
  return out;
}

}  // namespace dchaos
