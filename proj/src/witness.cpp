#include <algorithm>
#include <cmath>

#include "dchaos/errors.hpp"
#include "dchaos/symbolic.hpp"
#include "walk_dp.hpp"

namespace dchaos {

std::vector<Rational> witness_thresholds(Rules rules, long k) {
  if (k < 1) throw InputError("k must be positive");
  const Rational tk = pow(Rational(1, 3), static_cast<unsigned long>(k));
  std::vector<Rational> out;
  if (rules == Rules::ex1) {
    for (long l = k - 1; l >= 0; --l) out.push_back(pow(Rational(1, 3), static_cast<unsigned long>(l)) - tk);
  } else {
    out.push_back(tk);
    out.push_back(1 - tk);
  }
  return out;
}

namespace {

struct StageGoal {
  std::vector<std::size_t> index;  // positions in the sorted threshold list
  std::vector<double> target;
};

// Thresholds are sorted increasingly: for ex1 index i is t_l with l = k-1-i.
StageGoal stage_goal(Rules rules, long k, int digit, double rho) {
  StageGoal goal;
  if (rules == Rules::ex1) {
    if (digit == 0) {
      goal.index = {0};
      goal.target = {1.0};
    } else {
      for (long l = 0; l < k; ++l) {
        goal.index.push_back(static_cast<std::size_t>(k - 1 - l));
        goal.target.push_back(std::pow(rho, static_cast<double>(l + 1)));
      }
    }
  } else if (digit == 0) {
    goal.index = {0};
    goal.target = {1.0};
  } else {
    goal.index = {1};
    goal.target = {0.0};
  }
  return goal;
}

bool meets(const StageGoal& goal, const std::vector<double>& f, double eps) {
  for (std::size_t i = 0; i < goal.index.size(); ++i) {
    if (!(std::abs(f[goal.index[i]] - goal.target[i]) < eps)) return false;
  }
  return true;
}

double stage_eps(const WitnessParams& params, int j) {
  if (params.eps.empty()) return 1.0 / j;
  return params.eps[std::min<std::size_t>(static_cast<std::size_t>(j - 1), params.eps.size() - 1)];
}

// Cesaro averages F^(n) at every threshold for n = 1..n_max, one row per n.
std::vector<std::vector<double>> cesaro_rows(Rules rules, const BlockSeq& x, const Rational& p, long n_max,
                                             std::span<const Rational> thresholds) {
  detail::SeqTable table(rules, x, n_max + 2, thresholds);
  const double pf = p.get_d();
  detail::WalkDp<double> dp(table, pf, 1.0 - pf, 1e-16);
  std::vector<double> sums(thresholds.size(), 0.0), buckets;
  std::vector<std::vector<double>> rows;
  for (long n = 1; n <= n_max; ++n) {
    if (n > 1) dp.step();
    dp.bucket_masses(buckets);
    double cumulative = 0.0;
    std::vector<double> row(thresholds.size());
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      cumulative += buckets[i];
      sums[i] += cumulative;
      row[i] = sums[i] / static_cast<double>(n);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

WitnessResult witness_x_k(Rules rules, long k, const Rational& p, const WitnessParams& params) {
  if (k < 1) throw InputError("k must be positive");
  if (rules == Rules::ex1 && !(p > Rational(1, 2) && p <= 1)) {
    throw DomainError("the ex1 witness construction needs p > 1/2");
  }
  if (rules == Rules::ex2 && !(p > 0 && p < 1)) throw DomainError("the ex2 witness construction needs 0 < p < 1");
  if (params.cap_m < 1 || params.cap_n < 1) throw ConstructionError("witness caps exhausted before the first stage");
  if (params.stages < 1) throw InputError("at least one stage is needed");
  for (const auto& b : params.prefix) {
    if (b.digit == 1) throw InputError("the witness prefix must not contain ones");
  }

  const auto thresholds = witness_thresholds(rules, k);
  std::vector<Rational> sorted = thresholds;
  std::sort(sorted.begin(), sorted.end());
  const double pf = p.get_d();
  const double rho = (1.0 - pf) / pf;

  WitnessResult result;
  result.k = k;
  result.rules = rules;
  result.p = p;

  std::vector<BlockSeq::Block> word = params.prefix;
  long word_len = 0;
  for (const auto& b : word) word_len += b.count;
  long n_prev = 0;
  int open_digit = -1;

  for (int j = 1; j <= params.stages; ++j) {
    const int d = (j % 2 == 1) ? 0 : 2;
    const double eps = stage_eps(params, j);
    const StageGoal goal = stage_goal(rules, k, d, rho);

    std::vector<BlockSeq::Block> cand = word;
    cand.push_back({d, params.cap_m});
    const BlockSeq candidate(cand, 2 - d);

    detail::SeqTable table(rules, candidate, params.cap_n + 2, sorted);
    detail::WalkDp<double> dp(table, pf, 1.0 - pf, 1e-16);
    std::vector<double> sums(sorted.size(), 0.0), buckets, f(sorted.size());
    long found = 0;
    for (long n = 1; n <= params.cap_n; ++n) {
      if (n > 1) dp.step();
      dp.bucket_masses(buckets);
      double cumulative = 0.0;
      for (std::size_t i = 0; i < sorted.size(); ++i) {
        cumulative += buckets[i];
        sums[i] += cumulative;
        f[i] = sums[i] / static_cast<double>(n);
      }
      if (n > n_prev && n >= params.n_min && meets(goal, f, eps)) {
        found = n;
        break;
      }
    }
    if (found == 0) {
      open_digit = d;
      result.diagnostic = "stage " + std::to_string(j) + " (digit " + std::to_string(d) +
                          ") missed tolerance " + std::to_string(eps) + " within " +
                          std::to_string(params.cap_n) + " steps";
      break;
    }

    // Shortest block that the walk overruns by fewer than k+2 digits with
    // probability at least 1 - eps/10.
    long m_star = dp.s_hi() + 1;
    for (long m = dp.s_lo(); m <= dp.s_hi() + 1; ++m) {
      if (dp.shift_tail(m) <= eps / 10.0) {
        m_star = m;
        break;
      }
    }
    const long m = std::clamp(m_star + k + 1 - word_len, 1L, params.cap_m);

    WitnessStage stage;
    stage.index = j;
    stage.digit = d;
    stage.m = m;
    stage.n = found;
    stage.eps = eps;
    for (std::size_t i = 0; i < goal.index.size(); ++i) {
      stage.t.push_back(sorted[goal.index[i]]);
      stage.target.push_back(goal.target[i]);
    }
    result.stages.push_back(std::move(stage));
    word.push_back({d, m});
    word_len += m;
    n_prev = found;
  }

  if (open_digit >= 0) {
    result.complete = false;
    result.x = BlockSeq(word, open_digit);
  } else {
    result.complete = true;
    const int last = word.back().digit;
    word.pop_back();
    result.x = BlockSeq(word, last);
  }

  if (!result.stages.empty()) {
    const auto rows = cesaro_rows(rules, result.x, p, n_prev, sorted);
    for (auto& stage : result.stages) {
      const auto& row = rows[static_cast<std::size_t>(stage.n - 1)];
      for (const auto& t : stage.t) {
        const auto pos = std::lower_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
        stage.achieved.push_back(row[static_cast<std::size_t>(pos)]);
      }
    }
  }
  return result;
}

}  // namespace dchaos
