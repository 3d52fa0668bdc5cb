#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include "dchaos/maps.hpp"
#include "dchaos/rational.hpp"

namespace dchaos {

// ---------------------------------------------------------------------------
// Exact law of the coupled pair (x_n, y_n)

struct PairAtom {
  Rational x;
  Rational y;
  Rational mass;
};

/// Joint law of (x_n, y_n) at one step. Masses plus pruned_mass sum to 1.
struct PairLaw {
  int step = 0;
  std::vector<PairAtom> atoms;
  Rational pruned_mass;

  /// Sum of the atom masses.
  Rational total_mass() const;
};

struct ExactOptions {
  std::size_t max_atoms = 1'000'000;
  Rational prune_eps = 0;  // atoms with mass < prune_eps are dropped
  bool coalesce = true;    // merge atoms sitting on the same (x, y)
};

/// Laws for steps 0..n_max. Step 0 is the point mass at (x, y).
std::vector<PairLaw> propagate_exact(const SystemConfig& config, const Rational& x, const Rational& y,
                                     int n_max, const ExactOptions& options = {});

// ---------------------------------------------------------------------------
// Step probabilities P(|x_i - y_i| < t)

enum class ProbMode { exact, monte_carlo };

/// Matrix of P(|x_i - y_i| < t_k), rows i = 0..steps-1, columns k over the
/// threshold list. `err` holds the pruned mass (exact) or the 95% normal
/// half-width (Monte Carlo) of each entry.
struct StepProbabilities {
  ProbMode mode = ProbMode::exact;
  double x0 = 0.0;
  double y0 = 0.0;
  std::vector<double> t;
  std::size_t steps = 0;
  std::vector<double> prob;
  std::vector<double> err;
  std::vector<Rational> exact;  // exact mode only; same layout as prob

  std::size_t thresholds() const { return t.size(); }
  double at(std::size_t i, std::size_t k) const { return prob[i * t.size() + k]; }
  double error(std::size_t i, std::size_t k) const { return err[i * t.size() + k]; }
  const Rational& exact_at(std::size_t i, std::size_t k) const { return exact[i * t.size() + k]; }
};

/// Throws InputError unless the list is nonempty, positive and strictly increasing.
void check_thresholds(std::span<const Rational> thresholds);

StepProbabilities step_probabilities_exact(std::span<const PairLaw> laws,
                                           std::span<const Rational> thresholds);

// ---------------------------------------------------------------------------
// Monte Carlo

struct McPlan {
  std::uint64_t samples = 4096;
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Random stream of one sample. Depends only on (seed, sample index), so a
/// run is reproducible whatever the number of workers.
class SampleStream {
 public:
  SampleStream(std::uint64_t seed, std::uint64_t index);

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// True with probability p (choose f).
  bool bernoulli(double p) { return uniform() < p; }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

unsigned resolve_threads(unsigned requested, std::uint64_t work_items);

/// Runs fn(worker, begin, end) over a deterministic partition of [0, items).
template <class Fn>
void parallel_chunks(std::uint64_t items, unsigned threads, Fn&& fn) {
  const unsigned workers = resolve_threads(threads, items);
  if (workers <= 1) {
    fn(0u, std::uint64_t{0}, items);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t begin = items * w / workers;
    const std::uint64_t end = items * (w + 1) / workers;
    pool.emplace_back([&fn, w, begin, end] { fn(w, begin, end); });
  }
  for (auto& th : pool) th.join();
}

/// Coupled-trajectory Monte Carlo driver. `make_sim()` returns a simulator
/// with reset(), step(bool use_f) and bucket(); bucket() is the number of
/// thresholds t_k with t_k <= current distance, so the event
/// |x_i - y_i| < t_k is bucket() <= k.
template <class MakeSim>
StepProbabilities run_coupled_monte_carlo(MakeSim&& make_sim, double p, int n_max, std::size_t n_thresholds,
                                          const McPlan& plan) {
  const std::size_t steps = static_cast<std::size_t>(n_max) + 1;
  const std::size_t buckets = n_thresholds + 1;
  const unsigned workers = resolve_threads(plan.threads, plan.samples);
  std::vector<std::vector<std::uint64_t>> counts(workers, std::vector<std::uint64_t>(steps * buckets, 0));

  parallel_chunks(plan.samples, workers, [&](unsigned w, std::uint64_t begin, std::uint64_t end) {
    auto sim = make_sim();
    auto& local = counts[w];
    for (std::uint64_t s = begin; s < end; ++s) {
      SampleStream stream(plan.seed, s);
      sim.reset();
      local[sim.bucket()] += 1;
      for (std::size_t i = 1; i < steps; ++i) {
        sim.step(stream.bernoulli(p));
        local[i * buckets + sim.bucket()] += 1;
      }
    }
  });

  StepProbabilities out;
  out.mode = ProbMode::monte_carlo;
  out.steps = steps;
  out.prob.assign(steps * n_thresholds, 0.0);
  out.err.assign(steps * n_thresholds, 0.0);
  const double n = static_cast<double>(plan.samples);
  for (std::size_t i = 0; i < steps; ++i) {
    std::uint64_t cumulative = 0;
    for (std::size_t k = 0; k < n_thresholds; ++k) {
      for (const auto& c : counts) cumulative += c[i * buckets + k];
      const double ph = static_cast<double>(cumulative) / n;
      out.prob[i * n_thresholds + k] = ph;
      out.err[i * n_thresholds + k] = 1.959963984540054 * std::sqrt(ph * (1.0 - ph) / n);
    }
  }
  return out;
}

/// Empirical P(|x_i - y_i| < t) over `samples` shared-choice trajectory pairs.
StepProbabilities monte_carlo(const SystemConfig& config, double x, double y, int n_max,
                              std::span<const Rational> thresholds, const McPlan& plan);

// ---------------------------------------------------------------------------

/// P(X >= a n + b) for X ~ Binomial(n, p), by summation of the pmf.
double binomial_tail(long n, const Rational& p, double a, double b);

}  // namespace dchaos
