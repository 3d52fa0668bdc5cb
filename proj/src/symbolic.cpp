#include "dchaos/symbolic.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <sstream>

#include "dchaos/errors.hpp"
#include "walk_dp.hpp"

namespace dchaos {

BlockSeq::BlockSeq() : blocks_{Block{0, kInf}} {}

BlockSeq::BlockSeq(std::span<const Block> finite, int tail) {
  for (const auto& b : finite) {
    if (b.digit < 0 || b.digit > 2) throw InputError("ternary digits are 0, 1 or 2");
    if (b.count < 0) throw InputError("only the final block may be infinite");
    blocks_.push_back(b);
  }
  if (tail < 0 || tail > 2) throw InputError("ternary digits are 0, 1 or 2");
  blocks_.push_back(Block{tail, kInf});
  normalize();
}

void BlockSeq::normalize() {
  std::vector<Block> out;
  for (const auto& b : blocks_) {
    if (b.count == 0) continue;
    if (!out.empty() && out.back().digit == b.digit) {
      out.back().count = b.count == kInf ? kInf : out.back().count + b.count;
    } else {
      out.push_back(b);
    }
  }
  blocks_ = std::move(out);
}

BlockSeq BlockSeq::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string token;
  std::vector<Block> finite;
  std::optional<int> tail;
  while (in >> token) {
    if (tail) throw InputError("block sequence: nothing may follow the infinite block");
    if (token.empty() || token[0] < '0' || token[0] > '2') {
      throw InputError("block sequence: bad token '" + token + "'");
    }
    const int d = token[0] - '0';
    if (token.size() == 1) {
      finite.push_back(Block{d, 1});
      continue;
    }
    if (token[1] != '^' || token.size() < 3) throw InputError("block sequence: bad token '" + token + "'");
    const std::string_view count = std::string_view(token).substr(2);
    if (count == "inf") {
      tail = d;
      continue;
    }
    long c = 0;
    auto [ptr, ec] = std::from_chars(count.data(), count.data() + count.size(), c);
    if (ec != std::errc() || ptr != count.data() + count.size() || c < 0) {
      throw InputError("block sequence: bad count in '" + token + "'");
    }
    finite.push_back(Block{d, c});
  }
  if (!tail) throw InputError("block sequence must end with an infinite block such as 0^inf");
  return BlockSeq(finite, *tail);
}

std::string BlockSeq::to_string() const {
  std::string out;
  for (const auto& b : blocks_) {
    if (!out.empty()) out += ' ';
    out += static_cast<char>('0' + b.digit);
    out += '^';
    out += b.count == kInf ? std::string("inf") : std::to_string(b.count);
  }
  return out;
}

long BlockSeq::prefix_length() const {
  long n = 0;
  for (std::size_t i = 0; i + 1 < blocks_.size(); ++i) n += blocks_[i].count;
  return n;
}

int BlockSeq::digit(long i) const {
  for (const auto& b : blocks_) {
    if (b.count == kInf || i < b.count) return b.digit;
    i -= b.count;
  }
  return blocks_.back().digit;
}

bool BlockSeq::contains_digit(int d) const {
  return std::any_of(blocks_.begin(), blocks_.end(), [d](const Block& b) { return b.digit == d; });
}

Rational BlockSeq::value() const {
  Rational total = 0;
  Rational scale = 1;  // 3^-position
  for (const auto& b : blocks_) {
    if (b.count == kInf) {
      total += frac(b.digit, 2) * scale;
      break;
    }
    const Rational drop = pow(Rational(1, 3), static_cast<unsigned long>(b.count));
    total += frac(b.digit, 2) * scale * (1 - drop);
    scale *= drop;
  }
  total.canonicalize();
  return total;
}

BlockSeq BlockSeq::suffix(long n) const {
  if (n < 0) throw InputError("suffix length must be nonnegative");
  BlockSeq out;
  out.blocks_.clear();
  for (const auto& b : blocks_) {
    if (n == 0 || b.count == kInf) {
      out.blocks_.push_back(b);
      n = 0;
    } else if (n >= b.count) {
      n -= b.count;
    } else {
      out.blocks_.push_back(Block{b.digit, b.count - n});
      n = 0;
    }
  }
  return out;
}

BlockSeq BlockSeq::conjugated() const {
  BlockSeq out = *this;
  for (auto& b : out.blocks_) b.digit = 2 - b.digit;
  return out;
}

BlockSeq BlockSeq::prepended(int d, long count) const {
  if (d < 0 || d > 2) throw InputError("ternary digits are 0, 1 or 2");
  BlockSeq out;
  out.blocks_.clear();
  out.blocks_.push_back(Block{d, count});
  out.blocks_.insert(out.blocks_.end(), blocks_.begin(), blocks_.end());
  out.normalize();
  return out;
}

BlockSeq BlockSeq::appended(int d, long count, int tail) const {
  std::vector<Block> finite(blocks_.begin(), blocks_.end() - 1);
  finite.push_back(Block{d, count});
  return BlockSeq(finite, tail);
}

std::optional<BlockSeq> BlockSeq::alternate() const {
  const int tail = tail_digit();
  if (tail == 1) return std::nullopt;
  // r d 0^inf -> r (d-1) 2^inf with d > 0; r d 2^inf -> r (d+1) 0^inf with d < 2.
  std::vector<Block> finite(blocks_.begin(), blocks_.end() - 1);
  if (finite.empty()) return std::nullopt;
  Block last = finite.back();
  finite.pop_back();
  if (last.count > 1) finite.push_back(Block{last.digit, last.count - 1});
  const int changed = tail == 0 ? last.digit - 1 : last.digit + 1;
  finite.push_back(Block{changed, 1});
  return BlockSeq(finite, 2 - tail);
}

BlockSeq BlockSeq::canonical() const {
  if (tail_digit() == 2) {
    if (auto alt = alternate()) return *alt;
  }
  return *this;
}

// ---------------------------------------------------------------------------

Rules parse_rules(std::string_view name) {
  if (name == "ex1" || name == "example1") return Rules::ex1;
  if (name == "ex2" || name == "example2") return Rules::ex2;
  throw InputError("unknown rule set '" + std::string(name) + "' (expected ex1 or ex2)");
}

std::string_view rules_name(Rules rules) { return rules == Rules::ex1 ? "ex1" : "ex2"; }

SystemConfig rules_system(Rules rules, const Rational& p) {
  return builtin(rules == Rules::ex1 ? "example1" : "example2", p);
}

namespace {

bool same_points(const PiecewiseLinearMap& a, const PiecewiseLinearMap& b) {
  auto pa = a.breakpoints();
  auto pb = b.breakpoints();
  if (pa.size() != pb.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (pa[i].x != pb[i].x || pa[i].y != pb[i].y) return false;
  }
  return true;
}

}  // namespace

std::optional<Rules> rules_for(const SystemConfig& config) {
  for (Rules r : {Rules::ex1, Rules::ex2}) {
    const SystemConfig ref = rules_system(r, config.p);
    if (same_points(ref.f, config.f) && same_points(ref.g, config.g)) return r;
  }
  return std::nullopt;
}

BlockSeq apply(Rules rules, char which, const BlockSeq& seq) {
  if (which != 'f' && which != 'g') throw InputError("map selector must be 'f' or 'g'");
  const int head = seq.digit(0);
  if (rules == Rules::ex1) {
    if (which == 'g') return seq.prepended(0);
    return head == 1 ? seq.suffix(1).conjugated() : seq.suffix(1);
  }
  if (which == 'f') {
    if (head == 0) return seq.suffix(1);
    if (head == 1) return seq.suffix(1).conjugated().prepended(2);
    return seq;
  }
  if (head == 0) return seq;
  if (head == 1) return seq.suffix(1).conjugated().prepended(0);
  return seq.suffix(1);
}

namespace {

// Length of the common prefix of two distinct normalized sequences.
long common_prefix(const BlockSeq& a, const BlockSeq& b) {
  const auto& ba = a.blocks();
  const auto& bb = b.blocks();
  std::size_t i = 0, j = 0;
  long left_a = ba[0].count, left_b = bb[0].count;
  long pos = 0;
  while (true) {
    if (ba[i].digit != bb[j].digit) return pos;
    if (left_a == BlockSeq::kInf && left_b == BlockSeq::kInf) return -1;
    long run;
    if (left_a == BlockSeq::kInf) {
      run = left_b;
    } else if (left_b == BlockSeq::kInf) {
      run = left_a;
    } else {
      run = std::min(left_a, left_b);
    }
    pos += run;
    if (left_a != BlockSeq::kInf) {
      left_a -= run;
      if (left_a == 0) left_a = ba[++i].count;
    }
    if (left_b != BlockSeq::kInf) {
      left_b -= run;
      if (left_b == 0) left_b = bb[++j].count;
    }
  }
}

}  // namespace

std::optional<long> u_index(const BlockSeq& x, const BlockSeq& y) {
  std::vector<BlockSeq> xs{x}, ys{y};
  if (auto alt = x.alternate()) xs.push_back(*alt);
  if (auto alt = y.alternate()) ys.push_back(*alt);
  long best = 0;
  for (const auto& a : xs) {
    for (const auto& b : ys) {
      if (a == b) return std::nullopt;
      best = std::max(best, common_prefix(a, b));
    }
  }
  return best;
}

Rational rw_hitting(const Rational& p, long k) {
  if (p < 0 || p > 1) throw InputError("p must lie in [0,1]");
  if (k < 1) throw InputError("k must be positive");
  if (p < Rational(1, 2)) return 1;
  return pow((1 - p) / p, static_cast<unsigned long>(k));
}

double rw_hitting_mc(double p, long k, long steps, std::uint64_t walks, std::uint64_t seed, unsigned threads) {
  if (walks < 1) throw InputError("walks must be at least 1");
  if (k < 1) throw InputError("k must be positive");
  const unsigned workers = resolve_threads(threads, walks);
  std::vector<std::uint64_t> hits(workers, 0);
  parallel_chunks(walks, workers, [&](unsigned w, std::uint64_t begin, std::uint64_t end) {
    std::uint64_t local = 0;
    for (std::uint64_t i = begin; i < end; ++i) {
      SampleStream stream(seed, i);
      long s = 0;
      for (long n = 0; n < steps; ++n) {
        s += stream.bernoulli(p) ? 1 : -1;
        if (s == -k) {
          ++local;
          break;
        }
        // -k is out of reach for the remaining steps.
        if (s + k > steps - n - 1) break;
      }
    }
    hits[w] = local;
  });
  std::uint64_t total = 0;
  for (auto h : hits) total += h;
  return static_cast<double>(total) / static_cast<double>(walks);
}

Rational mu_theoretical_ex1(const Rational& p) {
  if (p < 0 || p > 1) throw InputError("p must lie in [0,1]");
  if (p < Rational(1, 2)) return 0;
  Rational mu = (6 * p - 3) / (4 * p - 1);
  mu.canonicalize();
  return mu;
}

// ---------------------------------------------------------------------------

namespace {

template <class Mass>
StepProbabilities run_dp(Rules rules, const BlockSeq& x, int n_max, std::span<const Rational> thresholds,
                         const Mass& wf, const Mass& wg, double prune) {
  check_thresholds(thresholds);
  if (n_max < 0) throw InputError("n_max must be nonnegative");
  detail::SeqTable table(rules, x, n_max + 2, thresholds);
  detail::WalkDp<Mass> dp(table, wf, wg, prune);

  StepProbabilities out;
  out.x0 = x.value().get_d();
  out.y0 = 0.0;
  const std::size_t T = thresholds.size();
  for (const auto& t : thresholds) out.t.push_back(t.get_d());
  out.steps = static_cast<std::size_t>(n_max) + 1;
  out.prob.resize(out.steps * T);
  out.err.resize(out.steps * T);

  std::vector<Mass> buckets;
  for (std::size_t i = 0; i < out.steps; ++i) {
    if (i > 0) dp.step();
    dp.bucket_masses(buckets);
    Mass cumulative = 0;
    for (std::size_t k = 0; k < T; ++k) {
      cumulative += buckets[k];
      if constexpr (std::is_same_v<Mass, double>) {
        out.prob[i * T + k] = std::clamp(cumulative, 0.0, 1.0);
        out.err[i * T + k] = dp.pruned();
      } else {
        out.exact.push_back(frac(cumulative, dp.scale()));
        out.exact.back().canonicalize();
        out.prob[i * T + k] = out.exact.back().get_d();
        out.err[i * T + k] = 0.0;
      }
    }
  }
  out.mode = ProbMode::exact;
  return out;
}

}  // namespace

StepProbabilities dp_exact_law(Rules rules, const BlockSeq& x, const Rational& p, int n_max,
                               std::span<const Rational> thresholds) {
  if (p < 0 || p > 1) throw InputError("p must lie in [0,1]");
  return run_dp<BigInt>(rules, x, n_max, thresholds, BigInt(p.get_num()), BigInt(p.get_den() - p.get_num()),
                        0.0);
}

StepProbabilities dp_fast_law(Rules rules, const BlockSeq& x, const Rational& p, int n_max,
                              std::span<const Rational> thresholds, double prune) {
  if (p < 0 || p > 1) throw InputError("p must lie in [0,1]");
  const double pf = p.get_d();
  return run_dp<double>(rules, x, n_max, thresholds, pf, 1.0 - pf, prune);
}

}  // namespace dchaos
