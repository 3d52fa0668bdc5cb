#include "dchaos/markov.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "dchaos/engine.hpp"
#include "dchaos/errors.hpp"

namespace dchaos {

void MarkovChain::validate() const {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Rational total = 0;
    for (const auto& [j, w] : rows[i]) {
      if (j >= rows.size()) throw InputError("transition to unknown state " + std::to_string(j));
      if (w < 0) throw InputError("negative transition probability in row " + std::to_string(i));
      total += w;
    }
    if (total != 1) throw InputError("row " + std::to_string(i) + " sums to " + to_string(total));
  }
}

std::size_t PairChain::state_of(const Rational& a, const Rational& b) const {
  auto find = [&](const Rational& v) {
    auto it = std::lower_bound(A.begin(), A.end(), v);
    if (it == A.end() || *it != v) throw InputError(to_string(v) + " is not in A");
    return static_cast<std::size_t>(it - A.begin());
  };
  return index(find(a), find(b));
}

void check_invariance(const SystemConfig& config, std::span<const Rational> A) {
  std::vector<Rational> sorted(A.begin(), A.end());
  std::sort(sorted.begin(), sorted.end());
  auto in_a = [&](const Rational& v) { return std::binary_search(sorted.begin(), sorted.end(), v); };
  for (const auto& a : sorted) {
    if (!config.interval.contains(a)) throw InvarianceError("point " + to_string(a) + " of A is outside I");
    const Rational fa = config.f(a);
    if (!in_a(fa)) throw InvarianceError("f(" + to_string(a) + ") = " + to_string(fa) + " escapes A");
    const Rational ga = config.g(a);
    if (!in_a(ga)) throw InvarianceError("g(" + to_string(a) + ") = " + to_string(ga) + " escapes A");
  }
}

PairChain build_pair_chain(const SystemConfig& config, std::span<const Rational> A) {
  if (A.empty()) throw InputError("A must not be empty");
  check_invariance(config, A);
  PairChain pc;
  pc.A.assign(A.begin(), A.end());
  std::sort(pc.A.begin(), pc.A.end());
  pc.A.erase(std::unique(pc.A.begin(), pc.A.end()), pc.A.end());
  const std::size_t m = pc.A.size();
  std::vector<std::size_t> fi(m), gi(m);
  for (std::size_t i = 0; i < m; ++i) {
    fi[i] = static_cast<std::size_t>(std::lower_bound(pc.A.begin(), pc.A.end(), config.f(pc.A[i])) - pc.A.begin());
    gi[i] = static_cast<std::size_t>(std::lower_bound(pc.A.begin(), pc.A.end(), config.g(pc.A[i])) - pc.A.begin());
  }
  const Rational p = config.p;
  const Rational q = 1 - p;
  pc.chain.rows.resize(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      auto& row = pc.chain.rows[pc.index(i, j)];
      const std::size_t to_f = pc.index(fi[i], fi[j]);
      const std::size_t to_g = pc.index(gi[i], gi[j]);
      if (to_f == to_g) {
        row.emplace_back(to_f, Rational(1));
      } else {
        if (p != 0) row.emplace_back(to_f, p);
        if (q != 0) row.emplace_back(to_g, q);
      }
    }
  }
  return pc;
}

namespace {

// Strongly connected components, each listed after every component it can reach.
std::vector<std::vector<std::size_t>> tarjan(const MarkovChain& chain) {
  const std::size_t n = chain.size();
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnset), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> out;
  std::size_t counter = 0;
  struct Frame {
    std::size_t v;
    std::size_t edge;
  };
  std::vector<Frame> calls;
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnset) continue;
    calls.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!calls.empty()) {
      Frame& fr = calls.back();
      const auto& row = chain.rows[fr.v];
      if (fr.edge < row.size()) {
        const auto& [w, prob] = row[fr.edge++];
        if (prob == 0) continue;
        if (index[w] == kUnset) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          calls.push_back({w, 0});
        } else if (on_stack[w]) {
          low[fr.v] = std::min(low[fr.v], index[w]);
        }
        continue;
      }
      const std::size_t v = fr.v;
      calls.pop_back();
      if (!calls.empty()) low[calls.back().v] = std::min(low[calls.back().v], low[v]);
      if (low[v] == index[v]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
      }
    }
  }
  return out;
}

// Exact state elimination on a sparse chain fragment. Nodes 0..m-1 are
// eliminable states, higher indices are absorbing targets.
class Eliminator {
 public:
  using Row = std::map<std::size_t, Rational>;

  explicit Eliminator(std::size_t nodes) : out_(nodes), in_(nodes), alive_(nodes, true) {}

  void add(std::size_t u, std::size_t v, const Rational& w) {
    if (w == 0) return;
    out_[u][v] += w;
    if (u != v) in_[v][u] += w;
  }

  // Eliminates `count` of the states 0..m-1, smallest in*out degree first.
  // Returns the order.
  std::vector<std::size_t> run(std::size_t m, std::size_t count) {
    std::vector<std::size_t> order;
    out_rec_.resize(m);
    in_rec_.resize(m);
    scale_.resize(m);
    for (std::size_t step = 0; step < count; ++step) {
      std::size_t best = m;
      std::size_t cost = static_cast<std::size_t>(-1);
      for (std::size_t v = 0; v < m; ++v) {
        if (!alive_[v]) continue;
        const std::size_t c = in_[v].size() * out_[v].size();
        if (c < cost) {
          cost = c;
          best = v;
        }
      }
      eliminate(best);
      order.push_back(best);
    }
    return order;
  }

  // Row of v at its elimination, normalized by 1 - P_vv, self-loop removed.
  const Row& out_record(std::size_t v) const { return out_rec_[v]; }
  // Predecessors of v at its elimination with their weights, and 1 - P_vv.
  const Row& in_record(std::size_t v) const { return in_rec_[v]; }
  const Rational& scale(std::size_t v) const { return scale_[v]; }

 private:
  void eliminate(std::size_t v) {
    alive_[v] = false;
    Rational loop = 0;
    if (auto it = out_[v].find(v); it != out_[v].end()) {
      loop = it->second;
      out_[v].erase(it);
    }
    const Rational s = 1 - loop;
    if (s == 0) throw std::logic_error("closed state met during elimination");
    Row row;
    for (const auto& [w, x] : out_[v]) row.emplace(w, x / s);
    for (const auto& [u, puv] : in_[v]) {
      out_[u].erase(v);
      for (const auto& [w, pw] : row) add(u, w, puv * pw);
    }
    for (const auto& [w, x] : out_[v]) {
      if (w < in_.size()) in_[w].erase(v);
    }
    in_rec_[v] = std::move(in_[v]);
    scale_[v] = s;
    out_rec_[v] = std::move(row);
    out_[v].clear();
    in_[v].clear();
  }

  std::vector<Row> out_;
  std::vector<Row> in_;
  std::vector<bool> alive_;
  std::vector<Row> out_rec_;
  std::vector<Row> in_rec_;
  std::vector<Rational> scale_;
};

std::vector<Rational> stationary_of(const MarkovChain& chain, const std::vector<std::size_t>& cls) {
  const std::size_t m = cls.size();
  if (m == 1) return {Rational(1)};
  std::unordered_map<std::size_t, std::size_t> pos;
  for (std::size_t k = 0; k < m; ++k) pos[cls[k]] = k;
  Eliminator el(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (const auto& [j, w] : chain.rows[cls[i]]) el.add(i, pos.at(j), w);
  }
  const auto order = el.run(m, m - 1);
  std::vector<bool> done(m, false);
  for (auto v : order) done[v] = true;
  std::vector<Rational> pi(m, Rational(0));
  for (std::size_t v = 0; v < m; ++v) {
    if (!done[v]) pi[v] = 1;
  }
  // pi_v = sum_u pi_u P_uv / (1 - P_vv), over states still present when v went.
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Rational total = 0;
    for (const auto& [u, w] : el.in_record(*it)) total += pi[u] * w;
    pi[*it] = total / el.scale(*it);
  }
  Rational sum = 0;
  for (const auto& x : pi) sum += x;
  for (auto& x : pi) {
    x /= sum;
    x.canonicalize();
  }
  return pi;
}

}  // namespace

ChainDecomposition decompose(const MarkovChain& chain) {
  chain.validate();
  const std::size_t n = chain.size();
  ChainDecomposition dec;
  dec.class_of.assign(n, -1);
  dec.position.assign(n, 0);
  dec.hitting.resize(n);
  const auto comps = tarjan(chain);

  std::vector<int> comp_of(n, -1);
  for (std::size_t c = 0; c < comps.size(); ++c) {
    for (auto v : comps[c]) comp_of[v] = static_cast<int>(c);
  }
  for (std::size_t c = 0; c < comps.size(); ++c) {
    const auto& comp = comps[c];
    bool closed = true;
    for (auto v : comp) {
      for (const auto& [w, prob] : chain.rows[v]) {
        if (prob != 0 && comp_of[w] != static_cast<int>(c)) closed = false;
      }
    }
    if (closed) {
      const std::size_t l = dec.closed.size();
      for (std::size_t k = 0; k < comp.size(); ++k) {
        dec.class_of[comp[k]] = static_cast<int>(l);
        dec.position[comp[k]] = k;
        dec.hitting[comp[k]] = {{l, Rational(1)}};
      }
      dec.closed.push_back(comp);
      dec.stationary.push_back(stationary_of(chain, comp));
      continue;
    }
    // Transient component; everything it can leave to is already solved.
    std::unordered_map<std::size_t, std::size_t> pos;
    for (std::size_t k = 0; k < comp.size(); ++k) pos[comp[k]] = k;
    std::map<std::size_t, std::size_t> column;  // class -> column
    for (auto v : comp) {
      for (const auto& [w, prob] : chain.rows[v]) {
        if (prob == 0 || pos.count(w)) continue;
        for (const auto& [l, h] : dec.hitting[w]) column.emplace(l, 0);
      }
    }
    std::size_t next_col = 0;
    for (auto& [l, col] : column) col = next_col++;
    const std::size_t m = comp.size();
    Eliminator el(m + column.size());
    for (std::size_t k = 0; k < m; ++k) {
      for (const auto& [w, prob] : chain.rows[comp[k]]) {
        if (prob == 0) continue;
        auto it = pos.find(w);
        if (it != pos.end()) {
          el.add(k, it->second, prob);
        } else {
          for (const auto& [l, h] : dec.hitting[w]) el.add(k, m + column.at(l), prob * h);
        }
      }
    }
    const auto order = el.run(m, m);
    std::vector<std::map<std::size_t, Rational>> nu(m);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      auto& target = nu[*it];
      for (const auto& [w, x] : el.out_record(*it)) {
        if (w >= m) {
          target[w - m] += x;
        } else {
          for (const auto& [c, h] : nu[w]) target[c] += x * h;
        }
      }
    }
    std::vector<std::size_t> class_of_column(column.size());
    for (const auto& [l, col] : column) class_of_column[col] = l;
    for (std::size_t k = 0; k < m; ++k) {
      dec.transient.push_back(comp[k]);
      for (auto& [col, h] : nu[k]) {
        h.canonicalize();
        if (h != 0) dec.hitting[comp[k]].emplace_back(class_of_column[col], h);
      }
      std::sort(dec.hitting[comp[k]].begin(), dec.hitting[comp[k]].end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
    }
  }
  std::sort(dec.transient.begin(), dec.transient.end());
  return dec;
}

Rational ChainDecomposition::hitting_probability(std::size_t state, std::size_t cls) const {
  for (const auto& [l, h] : hitting.at(state)) {
    if (l == cls) return h;
  }
  return 0;
}

Rational cesaro_limit(const ChainDecomposition& dec, std::size_t i, std::size_t j) {
  if (i >= dec.class_of.size() || j >= dec.class_of.size()) throw InputError("unknown chain state");
  const int cj = dec.class_of[j];
  if (cj < 0) return 0;
  const auto l = static_cast<std::size_t>(cj);
  const Rational& pi = dec.stationary[l][dec.position[j]];
  if (dec.class_of[i] >= 0) return dec.class_of[i] == cj ? pi : Rational(0);
  return dec.hitting_probability(i, l) * pi;
}

Rational exact_F_limit(const PairChain& pc, const ChainDecomposition& dec, const Rational& a, const Rational& b,
                       const Rational& t) {
  const std::size_t start = pc.state_of(a, b);
  Rational total = 0;
  for (const auto& [l, h] : dec.hitting.at(start)) {
    Rational inside = 0;
    const auto& cls = dec.closed[l];
    for (std::size_t k = 0; k < cls.size(); ++k) {
      const auto [i, j] = pc.pair(cls[k]);
      if (abs(pc.A[i] - pc.A[j]) < t) inside += dec.stationary[l][k];
    }
    total += h * inside;
  }
  total.canonicalize();
  return total;
}

// ---------------------------------------------------------------------------

namespace {

void constant_segments(const PiecewiseLinearMap& map, const std::vector<Rational>& sorted,
                       std::vector<std::pair<Rational, Rational>>& out) {
  const auto pts = map.breakpoints();
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    if (pts[k].y == pts[k + 1].y && std::binary_search(sorted.begin(), sorted.end(), pts[k].y)) {
      out.emplace_back(pts[k].x, pts[k + 1].x);
    }
  }
}

}  // namespace

bool one_step_covering(const SystemConfig& config, std::span<const Rational> A, std::optional<Rational>* uncovered) {
  std::vector<Rational> sorted(A.begin(), A.end());
  std::sort(sorted.begin(), sorted.end());
  auto in_a = [&](const Rational& v) { return std::binary_search(sorted.begin(), sorted.end(), v); };
  // A non-constant piece meets A in finitely many points, and the uncovered
  // set is relatively open, so only constant pieces valued in A can cover.
  std::vector<std::pair<Rational, Rational>> segs;
  constant_segments(config.f, sorted, segs);
  constant_segments(config.g, sorted, segs);
  std::sort(segs.begin(), segs.end());
  Rational reach = config.interval.lo();
  std::optional<std::pair<Rational, Rational>> gap;
  for (const auto& [l, r] : segs) {
    if (l > reach) {
      gap = std::make_pair(reach, l);
      break;
    }
    if (r > reach) reach = r;
  }
  if (!gap && reach < config.interval.hi()) gap = std::make_pair(reach, config.interval.hi());
  if (!gap) return true;
  if (uncovered) {
    Rational lo = gap->first, hi = gap->second;
    Rational pt = (lo + hi) / 2;
    for (int tries = 0; tries < 64 && (in_a(config.f(pt)) || in_a(config.g(pt))); ++tries) {
      hi = pt;
      pt = (lo + hi) / 2;
    }
    pt.canonicalize();
    *uncovered = pt;
  }
  return false;
}

AbsorptionReport check_absorption(const SystemConfig& config, std::span<const Rational> A, long n_probe,
                                  std::uint64_t samples, std::uint64_t seed) {
  check_invariance(config, A);
  if (n_probe < 0) throw InputError("n_probe must be nonnegative");
  AbsorptionReport report;
  report.n_probe = n_probe;
  report.bound_base = max(config.p, 1 - config.p);
  report.covering = one_step_covering(config, A, &report.uncovered);
  if (report.covering) return report;

  std::vector<Rational> sorted(A.begin(), A.end());
  std::sort(sorted.begin(), sorted.end());
  const Rational lo = config.interval.lo();
  const Rational len = config.interval.length();
  const double p = config.p.get_d();
  std::uint64_t inside = 0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    SampleStream stream(seed, s);
    const auto u = static_cast<unsigned long>(stream.engine()() >> 32);
    Rational x = lo + len * Rational(BigInt(u), BigInt(1) << 32);
    x.canonicalize();
    for (long n = 0; n < n_probe; ++n) x = stream.bernoulli(p) ? config.f(x) : config.g(x);
    if (std::binary_search(sorted.begin(), sorted.end(), x)) ++inside;
  }
  report.samples = samples;
  report.empirical = samples == 0 ? 0.0 : static_cast<double>(inside) / static_cast<double>(samples);
  return report;
}

}  // namespace dchaos
