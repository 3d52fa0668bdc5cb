#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "dchaos/errors.hpp"
#include "dchaos/markov.hpp"
#include "dchaos/perturb.hpp"
#include "support.hpp"

using namespace dchaos;
using dchaos::testing::averaged_powers;
using dchaos::testing::random_chain;

namespace {

Rational q(long n, long d = 1) { return frac(n, d); }

const Interval kUnit(q(0), q(1));

PiecewiseLinearMap flip() { return PiecewiseLinearMap({{q(0), q(1)}, {q(1), q(0)}}); }

MarkovChain chain_of(std::vector<MarkovChain::Row> rows) { return MarkovChain{std::move(rows)}; }

void check_decomposition(const MarkovChain& c, const ChainDecomposition& dec) {
  const std::size_t N = c.size();
  std::vector<int> seen(N, 0);
  for (const auto& cls : dec.closed)
    for (auto s : cls) ++seen[s];
  for (auto s : dec.transient) ++seen[s];
  for (auto v : seen) CHECK(v == 1);
  for (std::size_t l = 0; l < dec.closed.size(); ++l) {
    const auto& cls = dec.closed[l];
    const auto& pi = dec.stationary[l];
    Rational total = 0;
    for (const auto& v : pi) {
      CHECK(v >= 0);
      total += v;
    }
    CHECK(total == 1);
    std::vector<Rational> image(cls.size());
    for (std::size_t a = 0; a < cls.size(); ++a)
      for (const auto& [to, w] : c.rows[cls[a]]) {
        REQUIRE(dec.class_of[to] == static_cast<int>(l));
        image[dec.position[to]] += pi[a] * w;
      }
    CHECK(image == pi);
  }
  for (auto i : dec.transient) {
    Rational total = 0;
    for (std::size_t l = 0; l < dec.closed.size(); ++l) total += dec.hitting_probability(i, l);
    CHECK(total == 1);
  }
  for (std::size_t i = 0; i < N; ++i) {
    Rational row = 0;
    for (std::size_t j = 0; j < N; ++j) row += cesaro_limit(dec, i, j);
    CHECK(row == 1);
  }
}

}  // namespace

TEST_CASE("chain validation") {
  CHECK_NOTHROW(chain_of({{{0, q(1)}}}).validate());
  CHECK_THROWS_AS(chain_of({{{0, q(1, 2)}}}).validate(), InputError);
  CHECK_THROWS_AS(chain_of({{{1, q(1)}}}).validate(), InputError);
  CHECK_THROWS_AS(chain_of({{{0, q(3, 2)}, {0, q(-1, 2)}}}).validate(), InputError);
}

TEST_CASE("pair chain construction") {
  const SystemConfig cfg(identity_map(kUnit), constant_map(kUnit, q(0)), q(1, 2));
  const std::vector<Rational> A{q(0), q(1)};
  const auto pc = build_pair_chain(cfg, A);
  REQUIRE(pc.chain.size() == 4);
  pc.chain.validate();
  const auto& row = pc.chain.rows[pc.state_of(q(1), q(1))];
  REQUIRE(row.size() == 2);
  Rational to_self = 0, to_zero = 0;
  for (const auto& [to, w] : row) {
    if (to == pc.state_of(q(1), q(1))) to_self += w;
    if (to == pc.state_of(q(0), q(0))) to_zero += w;
  }
  CHECK(to_self == q(1, 2));
  CHECK(to_zero == q(1, 2));
  // (0, 0) goes to itself under both maps: one merged edge
  CHECK(pc.chain.rows[pc.state_of(q(0), q(0))].size() == 1);
  CHECK_THROWS_AS(pc.state_of(q(1, 2), q(0)), InputError);

  const SystemConfig fixed(constant_map(kUnit, q(1, 3)), constant_map(kUnit, q(1, 3)), q(1, 2));
  const std::vector<Rational> single{q(1, 3)};
  const auto one = build_pair_chain(fixed, single);
  const auto dec = decompose(one.chain);
  CHECK(dec.closed.size() == 1);
  CHECK(dec.transient.empty());

  const std::vector<Rational> leaky{q(0), q(1, 2)};
  try {
    build_pair_chain(SystemConfig(flip(), flip(), q(1, 2)), leaky);
    FAIL("expected an invariance error");
  } catch (const InvarianceError& e) {
    CHECK(std::string(e.what()).find("0") != std::string::npos);
  }
}

TEST_CASE("decomposition of small chains") {
  const auto id = chain_of({{{0, q(1)}}, {{1, q(1)}}, {{2, q(1)}}});
  const auto d1 = decompose(id);
  CHECK(d1.closed.size() == 3);
  CHECK(d1.transient.empty());
  for (const auto& pi : d1.stationary) CHECK(pi == std::vector<Rational>{q(1)});
  CHECK(cesaro_limit(d1, 1, 1) == 1);
  CHECK(cesaro_limit(d1, 1, 2) == 0);

  const auto swap = chain_of({{{1, q(1)}}, {{0, q(1)}}});
  const auto d2 = decompose(swap);
  REQUIRE(d2.closed.size() == 1);
  CHECK(d2.stationary[0] == std::vector<Rational>{q(1, 2), q(1, 2)});
  CHECK(cesaro_limit(d2, 0, 0) == q(1, 2));
  CHECK(cesaro_limit(d2, 1, 1) == q(1, 2));

  const auto leak = chain_of({{{0, q(1, 2)}, {1, q(1, 2)}}, {{1, q(1)}}});
  const auto d3 = decompose(leak);
  CHECK(d3.transient == std::vector<std::size_t>{0});
  REQUIRE(d3.closed.size() == 1);
  CHECK(d3.hitting_probability(0, 0) == 1);
  CHECK(cesaro_limit(d3, 0, 1) == 1);
  CHECK(cesaro_limit(d3, 0, 0) == 0);
  CHECK_THROWS_AS(cesaro_limit(d3, 0, 5), InputError);

  // Transient state split between two absorbing states 1/3 : 2/3.
  const auto split = chain_of({{{1, q(1, 3)}, {2, q(2, 3)}}, {{1, q(1)}}, {{2, q(1)}}});
  const auto d4 = decompose(split);
  CHECK(cesaro_limit(d4, 0, 1) == q(1, 3));
  CHECK(cesaro_limit(d4, 0, 2) == q(2, 3));
  for (const auto* c : {&id, &swap, &leak, &split}) check_decomposition(*c, decompose(*c));
}

TEST_CASE("random chains against averaged matrix powers") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = random_chain(rng, 25);
    c.validate();
    const auto dec = decompose(c);
    check_decomposition(c, dec);
    const auto avg = averaged_powers(c, 10000);
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = 0; j < c.size(); ++j)
        CHECK(std::abs(cesaro_limit(dec, i, j).get_d() - avg[i][j]) <= 1e-3);
  }
}

TEST_CASE("exact limit distribution functions") {
  // f(x) = 1 - x, g = identity: (0, 1/2) alternates with (1, 1/2), distance 1/2 forever.
  const SystemConfig sw(flip(), identity_map(kUnit), q(1, 2));
  const std::vector<Rational> A{q(0), q(1, 2), q(1)};
  const auto pc = build_pair_chain(sw, A);
  const auto dec = decompose(pc.chain);
  CHECK(exact_F_limit(pc, dec, q(0), q(1, 2), q(1, 2)) == 0);
  CHECK(exact_F_limit(pc, dec, q(0), q(1, 2), q(3, 4)) == 1);
  CHECK(exact_F_limit(pc, dec, q(0), q(1), q(1)) == 0);
  CHECK(exact_F_limit(pc, dec, q(1, 2), q(1, 2), q(1, 100)) == 1);

  const auto avg = averaged_powers(pc.chain, 10000);
  const auto start = pc.state_of(q(0), q(1));
  double brute = 0.0;
  for (std::size_t s = 0; s < pc.chain.size(); ++s) {
    const auto [a, b] = pc.pair(s);
    if (abs(pc.A[a] - pc.A[b]) < q(1, 2)) brute += avg[start][s];
  }
  CHECK(exact_F_limit(pc, dec, q(0), q(1), q(1, 2)).get_d() == doctest::Approx(brute).epsilon(1e-3));

  // Collapse to the diagonal.
  const SystemConfig col(constant_map(kUnit, q(0)), identity_map(kUnit), q(1, 3));
  const auto pc2 = build_pair_chain(col, A);
  const auto dec2 = decompose(pc2.chain);
  CHECK(exact_F_limit(pc2, dec2, q(0), q(1), q(1, 1000)) == 1);

  // Nondecreasing in t and 1 beyond the diameter, on the starred example2.
  const auto star = construct_star(builtin("example2"), q(1, 5));
  const SystemConfig s(star.f_star, star.g_star, q(1, 2));
  const auto pc3 = build_pair_chain(s, star.A);
  const auto dec3 = decompose(pc3.chain);
  const Rational a = star.A.front(), b = star.A.back();
  Rational prev = 0;
  for (int k = 1; k <= 20; ++k) {
    const auto v = exact_F_limit(pc3, dec3, a, b, q(k, 20));
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(exact_F_limit(pc3, dec3, a, b, b - a + q(1, 100)) == 1);
  check_decomposition(pc3.chain, dec3);
}

TEST_CASE("absorption and covering") {
  const std::vector<Rational> ends{q(0), q(1)};
  const SystemConfig still(identity_map(kUnit), identity_map(kUnit), q(1, 2));
  std::optional<Rational> hole;
  CHECK_FALSE(one_step_covering(still, ends, &hole));
  REQUIRE(hole.has_value());
  CHECK(*hole > 0);
  CHECK(*hole < 1);
  const auto rep = check_absorption(still, ends, 20, 500, 3);
  CHECK_FALSE(rep.covering);
  REQUIRE(rep.empirical.has_value());
  CHECK(*rep.empirical < 0.05);

  const SystemConfig drop(constant_map(kUnit, q(1, 4)), PiecewiseLinearMap({{q(0), q(0)}, {q(1, 4), q(1, 4)}, {q(1), q(1)}}),
                          q(1, 3));
  const std::vector<Rational> a{q(1, 4)};
  const auto r2 = check_absorption(drop, a, 10);
  CHECK(r2.covering);
  CHECK(r2.bound_base == q(2, 3));
  CHECK_FALSE(r2.empirical.has_value());

  CHECK_THROWS_AS(check_absorption(SystemConfig(flip(), flip(), q(1, 2)), a, 10), InvarianceError);
}
