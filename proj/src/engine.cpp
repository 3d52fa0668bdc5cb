#include "dchaos/engine.hpp"

#include <numeric>
#include <unordered_map>

#include "dchaos/errors.hpp"

namespace dchaos {

Rational PairLaw::total_mass() const {
  Rational total = 0;
  for (const auto& a : atoms) total += a.mass;
  return total;
}

namespace {

bool atom_less(const PairAtom& a, const PairAtom& b) {
  if (a.x != b.x) return a.x < b.x;
  return a.y < b.y;
}

void prune(std::vector<PairAtom>& atoms, Rational& pruned, const ExactOptions& options) {
  if (options.prune_eps > 0) {
    auto keep = std::partition(atoms.begin(), atoms.end(),
                               [&](const PairAtom& a) { return !(a.mass < options.prune_eps); });
    for (auto it = keep; it != atoms.end(); ++it) pruned += it->mass;
    atoms.erase(keep, atoms.end());
  }
  if (atoms.size() > options.max_atoms) {
    std::sort(atoms.begin(), atoms.end(), [](const PairAtom& a, const PairAtom& b) {
      if (a.mass != b.mass) return a.mass > b.mass;
      return atom_less(a, b);
    });
    for (std::size_t k = options.max_atoms; k < atoms.size(); ++k) pruned += atoms[k].mass;
    atoms.resize(options.max_atoms);
  }
}

}  // namespace

std::vector<PairLaw> propagate_exact(const SystemConfig& config, const Rational& x, const Rational& y,
                                     int n_max, const ExactOptions& options) {
  if (!config.interval.contains(x) || !config.interval.contains(y)) {
    throw DomainError("initial pair (" + to_string(x) + ", " + to_string(y) + ") is outside the interval");
  }
  if (n_max < 0) throw InputError("n_max must be nonnegative");
  if (options.max_atoms == 0) throw InputError("max_atoms must be positive");

  const Rational p = config.p;
  const Rational q = 1 - p;
  std::vector<PairLaw> laws;
  laws.reserve(static_cast<std::size_t>(n_max) + 1);
  laws.push_back(PairLaw{0, {PairAtom{x, y, Rational(1)}}, Rational(0)});

  for (int n = 1; n <= n_max; ++n) {
    const PairLaw& prev = laws.back();
    std::vector<PairAtom> next;
    if (options.coalesce) {
      std::unordered_map<std::pair<Rational, Rational>, Rational, RationalPairHash> merged;
      merged.reserve(prev.atoms.size() * 2);
      for (const auto& a : prev.atoms) {
        if (p != 0) merged[{config.f(a.x), config.f(a.y)}] += a.mass * p;
        if (q != 0) merged[{config.g(a.x), config.g(a.y)}] += a.mass * q;
      }
      next.reserve(merged.size());
      for (auto& [xy, mass] : merged) next.push_back(PairAtom{xy.first, xy.second, std::move(mass)});
    } else {
      next.reserve(prev.atoms.size() * 2);
      for (const auto& a : prev.atoms) {
        if (p != 0) next.push_back(PairAtom{config.f(a.x), config.f(a.y), a.mass * p});
        if (q != 0) next.push_back(PairAtom{config.g(a.x), config.g(a.y), a.mass * q});
      }
    }
    Rational pruned = prev.pruned_mass;
    prune(next, pruned, options);
    std::sort(next.begin(), next.end(), atom_less);
    laws.push_back(PairLaw{n, std::move(next), std::move(pruned)});
  }
  return laws;
}

void check_thresholds(std::span<const Rational> thresholds) {
  if (thresholds.empty()) throw InputError("threshold grid is empty");
  if (!(thresholds.front() > 0)) throw InputError("thresholds must be positive");
  for (std::size_t k = 1; k < thresholds.size(); ++k) {
    if (!(thresholds[k - 1] < thresholds[k])) throw InputError("thresholds must be strictly increasing");
  }
}

StepProbabilities step_probabilities_exact(std::span<const PairLaw> laws, std::span<const Rational> thresholds) {
  check_thresholds(thresholds);
  StepProbabilities out;
  out.mode = ProbMode::exact;
  if (!laws.empty() && !laws.front().atoms.empty()) {
    out.x0 = laws.front().atoms.front().x.get_d();
    out.y0 = laws.front().atoms.front().y.get_d();
  }
  const std::size_t T = thresholds.size();
  for (const auto& t : thresholds) out.t.push_back(t.get_d());
  out.steps = laws.size();
  out.prob.resize(out.steps * T);
  out.err.resize(out.steps * T);
  out.exact.resize(out.steps * T);

  for (std::size_t i = 0; i < laws.size(); ++i) {
    std::vector<std::pair<Rational, const Rational*>> by_distance;
    by_distance.reserve(laws[i].atoms.size());
    for (const auto& a : laws[i].atoms) by_distance.emplace_back(abs(a.x - a.y), &a.mass);
    std::sort(by_distance.begin(), by_distance.end(),
              [](const auto& l, const auto& r) { return l.first < r.first; });
    const double pruned = laws[i].pruned_mass.get_d();
    Rational cumulative = 0;
    std::size_t j = 0;
    for (std::size_t k = 0; k < T; ++k) {
      while (j < by_distance.size() && by_distance[j].first < thresholds[k]) {
        cumulative += *by_distance[j].second;
        ++j;
      }
      out.exact[i * T + k] = cumulative;
      out.prob[i * T + k] = cumulative.get_d();
      out.err[i * T + k] = pruned;
    }
  }
  return out;
}

SampleStream::SampleStream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  engine_.seed(seq);
}

unsigned resolve_threads(unsigned requested, std::uint64_t work_items) {
  unsigned n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (work_items < n) n = static_cast<unsigned>(std::max<std::uint64_t>(1, work_items));
  return n;
}

namespace {

class NumericPairSim {
 public:
  NumericPairSim(const SystemConfig& config, double x, double y, std::span<const double> t)
      : f_(config.f), g_(config.g), x0_(x), y0_(y), t_(t) {}

  void reset() {
    x_ = x0_;
    y_ = y0_;
  }
  void step(bool use_f) {
    const auto& m = use_f ? f_ : g_;
    x_ = m(x_);
    y_ = m(y_);
  }
  std::size_t bucket() const {
    const double d = std::abs(x_ - y_);
    return static_cast<std::size_t>(std::upper_bound(t_.begin(), t_.end(), d) - t_.begin());
  }

 private:
  const PiecewiseLinearMap& f_;
  const PiecewiseLinearMap& g_;
  double x0_, y0_;
  double x_ = 0.0, y_ = 0.0;
  std::span<const double> t_;
};

}  // namespace

StepProbabilities monte_carlo(const SystemConfig& config, double x, double y, int n_max,
                              std::span<const Rational> thresholds, const McPlan& plan) {
  check_thresholds(thresholds);
  if (plan.samples < 1) throw InputError("samples must be at least 1");
  if (n_max < 0) throw InputError("n_max must be nonnegative");
  const double lo = config.interval.lo().get_d();
  const double hi = config.interval.hi().get_d();
  if (!(x >= lo && x <= hi && y >= lo && y <= hi)) throw DomainError("initial pair is outside the interval");

  std::vector<double> t;
  for (const auto& v : thresholds) t.push_back(v.get_d());
  auto out = run_coupled_monte_carlo([&] { return NumericPairSim(config, x, y, t); }, config.p.get_d(), n_max,
                                     t.size(), plan);
  out.t = t;
  out.x0 = x;
  out.y0 = y;
  return out;
}

double binomial_tail(long n, const Rational& p, double a, double b) {
  if (n < 0) throw InputError("binomial_tail needs n >= 0");
  if (p < 0 || p > 1) throw InputError("binomial_tail needs p in [0,1]");
  const double cut = a * static_cast<double>(n) + b;
  long k0;
  if (cut <= 0) {
    k0 = 0;
  } else if (cut > static_cast<double>(n)) {
    return 0.0;
  } else {
    k0 = static_cast<long>(std::ceil(cut));
  }
  if (k0 == 0) return 1.0;
  if (p == 0) return 0.0;
  if (p == 1) return 1.0;

  if (n <= 4096) {
    // Exact rational summation of C(n,k) p^k (1-p)^(n-k), k >= k0.
    const Rational q = 1 - p;
    Rational total = 0;
    BigInt binom = 1;  // C(n, k) updated incrementally
    for (long k = 0; k <= n; ++k) {
      if (k > 0) {
        binom *= n - k + 1;
        binom /= k;
      }
      if (k >= k0) total += Rational(binom) * pow(p, static_cast<unsigned long>(k)) *
                           pow(q, static_cast<unsigned long>(n - k));
    }
    return total.get_d();
  }

  // Log-space accumulation for large n.
  const long double lp = std::log(static_cast<long double>(p.get_d()));
  const long double lq = std::log1p(-static_cast<long double>(p.get_d()));
  const long double lgn = std::lgamma(static_cast<long double>(n) + 1.0L);
  auto log_term = [&](long k) {
    return lgn - std::lgamma(static_cast<long double>(k) + 1.0L) -
           std::lgamma(static_cast<long double>(n - k) + 1.0L) + k * lp + (n - k) * lq;
  };
  long double peak = -INFINITY;
  for (long k = k0; k <= n; ++k) peak = std::max(peak, log_term(k));
  long double sum = 0.0L;
  for (long k = k0; k <= n; ++k) sum += std::exp(log_term(k) - peak);
  return static_cast<double>(std::exp(peak) * sum);
}

}  // namespace dchaos
