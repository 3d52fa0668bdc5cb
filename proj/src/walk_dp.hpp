#pragma once

// Distribution of the symbolic walk of x against y = 0 for the two ternary
// rule sets. Shared by the law functions and the witness search.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "dchaos/rational.hpp"
#include "dchaos/symbolic.hpp"

namespace dchaos::detail {

// Digits of x up to a horizon, the conjugation parity in front of each
// position and the value of the (effective) unread tail.
class SeqTable {
 public:
  SeqTable(Rules rules, const BlockSeq& x, long horizon, std::span<const Rational> thresholds)
      : rules_(rules), x_(x), thresholds_(thresholds.begin(), thresholds.end()) {
    digit_.resize(horizon + 1);
    conj_.resize(horizon + 1);
    tail_.resize(horizon + 1);
    long pos = 0;
    for (const auto& b : x.blocks()) {
      const long end = b.count == BlockSeq::kInf ? horizon + 1 : std::min(horizon + 1, pos + b.count);
      for (; pos < end; ++pos) digit_[pos] = static_cast<std::uint8_t>(b.digit);
      if (pos > horizon) break;
    }
    bool parity = false;
    for (long s = 0; s <= horizon; ++s) {
      conj_[s] = parity;
      if (digit_[s] == 1) parity = !parity;
    }
    double raw = x.suffix(horizon).value().get_d();
    tail_[horizon] = conj_[horizon] ? 1.0 - raw : raw;
    for (long s = horizon - 1; s >= 0; --s) {
      raw = (digit_[s] + raw) / 3.0;
      tail_[s] = conj_[s] ? 1.0 - raw : raw;
    }
    for (const auto& t : thresholds_) t_d_.push_back(t.get_d());
    pow3_.push_back(1.0);
  }

  Rules rules() const { return rules_; }
  long horizon() const { return static_cast<long>(digit_.size()) - 1; }
  int effective(long s) const { return conj_[s] ? 2 - digit_[s] : digit_[s]; }
  std::size_t thresholds() const { return t_d_.size(); }

  // Number of thresholds <= value of the state (level, s).
  std::uint16_t bucket(long level, long s) const {
    double v;
    if (rules_ == Rules::ex1) {
      v = inv_pow3(level) * tail_[s];
    } else {
      v = level == 0 ? tail_[s] : level == 1 ? tail_[s] / 3.0 : (2.0 + tail_[s]) / 3.0;
    }
    const auto it = std::upper_bound(t_d_.begin(), t_d_.end(), v);
    const std::size_t k = static_cast<std::size_t>(it - t_d_.begin());
    const bool near = (k < t_d_.size() && t_d_[k] - v <= 1e-9) || (k > 0 && v - t_d_[k - 1] <= 1e-9);
    if (!near) return static_cast<std::uint16_t>(k);
    const Rational exact = exact_value(level, s);
    return static_cast<std::uint16_t>(std::upper_bound(thresholds_.begin(), thresholds_.end(), exact) -
                                      thresholds_.begin());
  }

 private:
  double inv_pow3(long q) const {
    while (static_cast<long>(pow3_.size()) <= q) pow3_.push_back(pow3_.back() / 3.0);
    return pow3_[q];
  }

  const Rational& exact_tail(long s) const {
    auto it = exact_tail_.find(s);
    if (it != exact_tail_.end()) return it->second;
    Rational v = x_.suffix(s).value();
    if (conj_[s]) v = 1 - v;
    return exact_tail_.emplace(s, std::move(v)).first->second;
  }

  Rational exact_value(long level, long s) const {
    const Rational& t = exact_tail(s);
    if (rules_ == Rules::ex1) return t * pow(Rational(1, 3), static_cast<unsigned long>(level));
    if (level == 0) return t;
    if (level == 1) return t / 3;
    return (2 + t) / 3;
  }

  Rules rules_;
  BlockSeq x_;
  std::vector<Rational> thresholds_;
  std::vector<double> t_d_;
  std::vector<std::uint8_t> digit_;
  std::vector<std::uint8_t> conj_;
  std::vector<double> tail_;
  mutable std::vector<double> pow3_;
  mutable std::unordered_map<long, Rational> exact_tail_;
};

// Law of the walk state on a box [s_lo, s_hi] x [0, levels). Mass is double
// (probabilities) or BigInt (probabilities scaled by den^n).
template <class Mass>
class WalkDp {
 public:
  WalkDp(const SeqTable& table, Mass wf, Mass wg, double prune)
      : table_(table), wf_(std::move(wf)), wg_(std::move(wg)), prune_(prune) {
    levels_ = table.rules() == Rules::ex1 ? 1 : 3;
    mass_.assign(static_cast<std::size_t>(levels_), Mass(0));
    mass_[0] = 1;
    scale_ = 1;
    pruned_ = 0;
  }

  long steps() const { return steps_; }
  const Mass& scale() const { return scale_; }
  double pruned() const { return pruned_; }
  long s_lo() const { return s_lo_; }
  long s_hi() const { return s_hi_; }

  void step() {
    if (s_hi_ + 1 > table_.horizon()) throw std::logic_error("walk horizon exceeded");
    const bool ex1 = table_.rules() == Rules::ex1;
    const long new_levels = ex1 ? levels_ + 1 : 3;
    const long width = s_hi_ - s_lo_ + 2;
    std::vector<Mass> next(static_cast<std::size_t>(width * new_levels), Mass(0));
    auto at = [&](long level, long s) -> Mass& {
      return next[static_cast<std::size_t>((s - s_lo_) * new_levels + level)];
    };
    const bool use_f = wf_ != 0;
    const bool use_g = wg_ != 0;
    for (long s = s_lo_; s <= s_hi_; ++s) {
      for (long level = 0; level < levels_; ++level) {
        const Mass& m = mass_[static_cast<std::size_t>((s - s_lo_) * levels_ + level)];
        if (m == 0) continue;
        if (ex1) {
          if (use_f) {
            if (level > 0) {
              at(level - 1, s) += m * wf_;
            } else {
              at(0, s + 1) += m * wf_;
            }
          }
          if (use_g) at(level + 1, s) += m * wg_;
          continue;
        }
        long fl, fs, gl, gs;
        if (level == 1) {
          fl = 0, fs = s, gl = 1, gs = s;
        } else if (level == 2) {
          fl = 2, fs = s, gl = 0, gs = s;
        } else {
          switch (table_.effective(s)) {
            case 0: fl = 0, fs = s + 1, gl = 0, gs = s; break;
            case 2: fl = 0, fs = s, gl = 0, gs = s + 1; break;
            default: fl = 2, fs = s + 1, gl = 1, gs = s + 1; break;
          }
        }
        if (use_f) at(fl, fs) += m * wf_;
        if (use_g) at(gl, gs) += m * wg_;
      }
    }
    mass_ = std::move(next);
    levels_ = new_levels;
    s_hi_ += 1;
    scale_ *= wf_ + wg_;
    ++steps_;
    if constexpr (std::is_same_v<Mass, double>) {
      if (prune_ > 0) trim();
    }
  }

  // out[b] = mass of states whose value has exactly b thresholds below or at it.
  void bucket_masses(std::vector<Mass>& out) {
    out.assign(table_.thresholds() + 1, Mass(0));
    for (long s = s_lo_; s <= s_hi_; ++s) {
      auto& cache = buckets_for(s);
      for (long level = 0; level < levels_; ++level) {
        const Mass& m = mass_[static_cast<std::size_t>((s - s_lo_) * levels_ + level)];
        if (m == 0) continue;
        while (static_cast<long>(cache.size()) <= level) {
          cache.push_back(table_.bucket(static_cast<long>(cache.size()), s));
        }
        out[cache[level]] += m;
      }
    }
  }

  // Mass of states that have consumed at least m digits.
  Mass shift_tail(long m) const {
    Mass total = 0;
    for (long s = std::max(m, s_lo_); s <= s_hi_; ++s) {
      for (long level = 0; level < levels_; ++level) {
        total += mass_[static_cast<std::size_t>((s - s_lo_) * levels_ + level)];
      }
    }
    return total;
  }

 private:
  std::vector<std::uint16_t>& buckets_for(long s) {
    if (static_cast<long>(bucket_cache_.size()) <= s) bucket_cache_.resize(s + 1);
    return bucket_cache_[s];
  }

  double row_sum(long s) const {
    double total = 0.0;
    for (long level = 0; level < levels_; ++level) {
      total += mass_[static_cast<std::size_t>((s - s_lo_) * levels_ + level)];
    }
    return total;
  }

  void trim() {
    while (s_lo_ < s_hi_) {
      const double r = row_sum(s_lo_);
      if (r >= prune_) break;
      pruned_ += r;
      mass_.erase(mass_.begin(), mass_.begin() + levels_);
      ++s_lo_;
    }
    while (s_hi_ > s_lo_) {
      const double r = row_sum(s_hi_);
      if (r >= prune_) break;
      pruned_ += r;
      mass_.resize(mass_.size() - static_cast<std::size_t>(levels_));
      --s_hi_;
    }
    if (table_.rules() != Rules::ex1) return;
    long keep = levels_;
    while (keep > 1) {
      double col = 0.0;
      for (long s = s_lo_; s <= s_hi_; ++s) col += mass_[static_cast<std::size_t>((s - s_lo_) * levels_ + keep - 1)];
      if (col >= prune_) break;
      pruned_ += col;
      --keep;
    }
    if (keep == levels_) return;
    std::vector<double> packed;
    packed.reserve(static_cast<std::size_t>((s_hi_ - s_lo_ + 1) * keep));
    for (long s = s_lo_; s <= s_hi_; ++s) {
      for (long level = 0; level < keep; ++level) {
        packed.push_back(mass_[static_cast<std::size_t>((s - s_lo_) * levels_ + level)]);
      }
    }
    mass_ = std::move(packed);
    levels_ = keep;
  }

  const SeqTable& table_;
  Mass wf_, wg_;
  double prune_;
  long levels_ = 1;
  long s_lo_ = 0;
  long s_hi_ = 0;
  long steps_ = 0;
  std::vector<Mass> mass_;
  Mass scale_;
  double pruned_ = 0.0;
  std::vector<std::vector<std::uint16_t>> bucket_cache_;
};

}  // namespace dchaos::detail
