#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "dchaos/engine.hpp"
#include "dchaos/errors.hpp"
#include "dchaos/symbolic.hpp"

using namespace dchaos;
using Block = BlockSeq::Block;

namespace {

Rational q(long n, long d = 1) { return frac(n, d); }

BlockSeq seq(std::string_view text) { return BlockSeq::parse(text); }

BlockSeq random_seq(std::mt19937_64& rng, bool allow_one = true, int max_blocks = 6) {
  std::uniform_int_distribution<int> nblocks(0, max_blocks), len(1, 4), digit(0, allow_one ? 2 : 1);
  auto pick = [&] {
    const int d = digit(rng);
    return allow_one ? d : 2 * d;
  };
  std::vector<Block> blocks;
  const int n = nblocks(rng);
  for (int i = 0; i < n; ++i) blocks.push_back({pick(), len(rng)});
  return BlockSeq(blocks, pick());
}

// Exact value of the first n digits plus the tail, computed digit by digit.
Rational digit_value(const BlockSeq& s) {
  const long n = s.prefix_length() + 1;
  Rational v = 0, scale = q(1, 3);
  for (long i = 0; i < n; ++i) {
    v += s.digit(i) * scale;
    scale /= 3;
  }
  // remaining tail digit d contributes d/2 * 3^-n
  return v + q(s.tail_digit(), 2) * scale * 3;
}

}  // namespace

TEST_CASE("parse and print") {
  const auto s = seq("0^3 2^5 0^inf");
  CHECK(s.to_string() == "0^3 2^5 0^inf");
  CHECK(s.prefix_length() == 8);
  CHECK(s.digit(2) == 0);
  CHECK(s.digit(3) == 2);
  CHECK(s.digit(100) == 0);
  CHECK_THROWS_AS(seq("2"), InputError);
  CHECK(seq("0 0 2^2 2 1^inf").to_string() == "0^2 2^3 1^inf");
  CHECK(seq("0^0 2^inf") == seq("2^inf"));
  CHECK_THROWS_AS(seq(""), InputError);
  CHECK_THROWS_AS(seq("3^inf"), InputError);
  CHECK_THROWS_AS(seq("0^inf 2^1"), InputError);
  CHECK_THROWS_AS(seq("0^x"), InputError);
}

TEST_CASE("values") {
  CHECK(seq("0 2^inf").value() == q(1, 3));
  CHECK(seq("2^inf").value() == 1);
  CHECK(seq("0 2 0^inf").value() == q(2, 9));
  CHECK(seq("1^inf").value() == q(1, 2));
  CHECK(seq("0^inf").value() == 0);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto s = random_seq(rng);
    CHECK(s.value() == digit_value(s));
  }
}

TEST_CASE("suffix, conjugation, alternate") {
  const auto s = seq("0^2 1 2^inf");
  CHECK(s.suffix(2) == seq("1 2^inf"));
  CHECK(s.suffix(10) == seq("2^inf"));
  CHECK(s.conjugated() == seq("2^2 1 0^inf"));
  CHECK(s.prepended(0, 2) == seq("0^4 1 2^inf"));
  CHECK(seq("0 2^inf").alternate() == seq("1 0^inf"));
  CHECK(seq("1 0^inf").alternate() == seq("0 2^inf"));
  CHECK_FALSE(seq("0^inf").alternate().has_value());
  CHECK_FALSE(seq("2^inf").alternate().has_value());
  CHECK_FALSE(seq("1^inf").alternate().has_value());
  CHECK(seq("0 2^inf").canonical() == seq("1 0^inf"));
  std::mt19937_64 rng(2);
  for (int i = 0; i < 300; ++i) {
    const auto s = random_seq(rng);
    if (const auto a = s.alternate()) {
      CHECK(a->value() == s.value());
      CHECK_FALSE(*a == s);
    }
    CHECK(s.canonical().value() == s.value());
    CHECK(s.conjugated().value() == 1 - s.value());
  }
}

TEST_CASE("symbolic images") {
  CHECK(apply(Rules::ex1, 'g', seq("2^inf")) == seq("0 2^inf"));
  CHECK(apply(Rules::ex1, 'f', seq("0 2^inf")) == seq("2^inf"));
  CHECK(apply(Rules::ex1, 'f', seq("1 0 2^inf")) == seq("2 0^inf"));
  CHECK(apply(Rules::ex2, 'f', seq("1 0^inf")).value() == 1);
  CHECK(apply(Rules::ex2, 'g', seq("2 1^inf")) == seq("1^inf"));
  CHECK_THROWS_AS(apply(Rules::ex1, 'h', seq("0^inf")), InputError);
}

TEST_CASE("symbolic images commute with the maps") {
  std::mt19937_64 rng(3);
  for (Rules rules : {Rules::ex1, Rules::ex2}) {
    const auto sys = rules_system(rules, q(1, 2));
    for (int i = 0; i < 1000; ++i) {
      const auto s = random_seq(rng);
      const Rational x = s.value();
      CHECK(apply(rules, 'f', s).value() == sys.f(x));
      CHECK(apply(rules, 'g', s).value() == sys.g(x));
      if (const auto a = s.alternate()) {
        CHECK(apply(rules, 'f', *a).value() == sys.f(x));
        CHECK(apply(rules, 'g', *a).value() == sys.g(x));
      }
    }
    for (const char* bp : {"1 0^inf", "0 2^inf", "2 0^inf", "1 2^inf", "0 1^inf", "1^inf"}) {
      const auto s = seq(bp);
      CHECK(apply(rules, 'f', s).value() == sys.f(s.value()));
      CHECK(apply(rules, 'g', s).value() == sys.g(s.value()));
    }
  }
}

TEST_CASE("rule sets") {
  CHECK(parse_rules("ex1") == Rules::ex1);
  CHECK(parse_rules("example2") == Rules::ex2);
  CHECK_THROWS_AS(parse_rules("ex3"), InputError);
  CHECK(rules_for(builtin("example1")) == Rules::ex1);
  CHECK(rules_for(builtin("example2", q(1, 3))) == Rules::ex2);
  CHECK_FALSE(rules_for(builtin("halving_pair")).has_value());
}

TEST_CASE("common prefix index") {
  CHECK(u_index(seq("0 2^inf"), seq("0 2 0^inf")) == 2);
  CHECK_FALSE(u_index(seq("0 1 2^inf"), seq("0 1 2^inf")).has_value());
  CHECK_FALSE(u_index(seq("0 2^inf"), seq("1 0^inf")).has_value());
  CHECK(u_index(seq("0^inf"), seq("0 2^inf")) == 1);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 1000; ++i) {
    const auto x = random_seq(rng), y = random_seq(rng);
    const auto u = u_index(x, y);
    if (!u) {
      CHECK(x.value() == y.value());
      continue;
    }
    CHECK(abs(x.value() - y.value()) <= pow(q(1, 3), static_cast<unsigned long>(*u)));
  }
}

TEST_CASE("random walk hitting") {
  CHECK(rw_hitting(q(2, 5), 3) == 1);
  CHECK(rw_hitting(q(2, 3), 2) == q(1, 4));
  CHECK(rw_hitting(q(1, 2), 5) == 1);
  CHECK(rw_hitting(q(1), 1) == 0);
  CHECK(rw_hitting(q(3, 5), 1) == q(2, 3));
  CHECK(rw_hitting_mc(0.6, 1, 2000, 20000, 5, 0) == doctest::Approx(2.0 / 3).epsilon(0.03));
  CHECK(rw_hitting_mc(0.6, 1, 2000, 4000, 5, 1) == rw_hitting_mc(0.6, 1, 2000, 4000, 5, 3));
}

TEST_CASE("closed-form measure of chaos") {
  CHECK(mu_theoretical_ex1(q(1, 2)) == 0);
  CHECK(mu_theoretical_ex1(q(3, 10)) == 0);
  CHECK(mu_theoretical_ex1(q(3, 4)) == q(3, 4));
  CHECK(mu_theoretical_ex1(q(1)) == 1);
  CHECK(mu_theoretical_ex1(q(2, 3)) == q(3, 5));
  Rational prev = 0;
  for (int k = 50; k <= 100; ++k) {
    const auto v = mu_theoretical_ex1(q(k, 100));
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(mu_theoretical_ex1(q(501, 1000)) < q(1, 100));
}

TEST_CASE("walk DP: small cases by hand") {
  const std::vector<Rational> t{q(1, 3)};
  const auto p1 = dp_exact_law(Rules::ex1, seq("2^inf"), q(2, 3), 2, t);
  CHECK(p1.exact_at(1, 0) == 0);
  const auto p2 = dp_exact_law(Rules::ex1, seq("2^inf"), q(1, 2), 2, t);
  CHECK(p2.exact_at(2, 0) == q(1, 4));
  CHECK(p2.exact_at(0, 0) == 0);
}

TEST_CASE("walk DP: long-run values for x = 1") {
  const std::vector<Rational> t{q(1, 3), q(2, 3)};
  const auto pr = dp_fast_law(Rules::ex1, seq("2^inf"), q(2, 3), 200, t);
  // P(x_n < 2/3) tends to (1-p)/p = 1/2; P(x_n < 1/3) to its square.
  CHECK(pr.at(200, 1) == doctest::Approx(0.5).epsilon(0.04));
  CHECK(pr.at(200, 0) == doctest::Approx(0.25).epsilon(0.08));
}

TEST_CASE("walk DP agrees exactly with the pair engine") {
  std::mt19937_64 rng(6);
  const std::vector<Rational> t{q(1, 27), q(2, 27), q(1, 9), q(8, 27), q(1, 3), q(1, 2), q(2, 3), q(26, 27), q(1)};
  for (Rules rules : {Rules::ex1, Rules::ex2}) {
    for (int trial = 0; trial < 6; ++trial) {
      const auto x = random_seq(rng, rules == Rules::ex2, 4);
      const Rational p = q(1 + trial, 8);
      const int n = rules == Rules::ex1 ? 12 : 9;
      const auto dp = dp_exact_law(rules, x, p, n, t);
      const auto en = step_probabilities_exact(propagate_exact(rules_system(rules, p), x.value(), q(0), n), t);
      CHECK(dp.exact == en.exact);
      const auto fast = dp_fast_law(rules, x, p, n, t, 0.0);
      for (std::size_t i = 0; i < dp.prob.size(); ++i) CHECK(fast.prob[i] == doctest::Approx(dp.prob[i]));
    }
  }
}

TEST_CASE("walk DP: probabilities are monotone in t and bounded") {
  const std::vector<Rational> t{q(1, 81), q(1, 9), q(1, 3), q(2, 3), q(1)};
  const auto pr = dp_exact_law(Rules::ex1, seq("0^2 2^3 0 2^inf"), q(3, 5), 30, t);
  for (std::size_t i = 0; i < pr.steps; ++i) {
    for (std::size_t k = 0; k < t.size(); ++k) {
      CHECK(pr.exact_at(i, k) >= 0);
      CHECK(pr.exact_at(i, k) <= 1);
      if (k > 0) CHECK(pr.exact_at(i, k) >= pr.exact_at(i, k - 1));
    }
  }
}

TEST_CASE("witness thresholds") {
  const auto t1 = witness_thresholds(Rules::ex1, 2);
  REQUIRE(t1.size() == 2);
  CHECK(t1[0] == q(2, 9));
  CHECK(t1[1] == q(8, 9));
  const auto t2 = witness_thresholds(Rules::ex2, 2);
  CHECK(t2 == std::vector<Rational>{q(1, 9), q(8, 9)});
}

TEST_CASE("witness for example1, k = 1") {
  WitnessParams wp;
  wp.eps = {0.05};
  const auto w = witness_x_k(Rules::ex1, 1, q(2, 3), wp);
  REQUIRE(w.complete);
  REQUIRE(w.stages.size() == 2);
  CHECK(w.x.tail_digit() == 2);
  CHECK_FALSE(w.x.contains_digit(1));
  CHECK(w.stages[0].digit == 0);
  CHECK(w.stages[0].achieved[0] >= 0.95);
  CHECK(w.stages[1].digit == 2);
  CHECK(w.stages[1].achieved[0] <= 0.55);
  CHECK(w.stages[1].n > w.stages[0].n);

  // The reported values are F^(N)(t) of the returned point.
  const auto& st = w.stages[1];
  const auto pr = dp_exact_law(Rules::ex1, w.x, q(2, 3), static_cast<int>(st.n), st.t);
  Rational sum = 0;
  for (long i = 0; i < st.n; ++i) sum += pr.exact_at(static_cast<std::size_t>(i), 0);
  CHECK(Rational(sum / st.n).get_d() == doctest::Approx(st.achieved[0]).epsilon(1e-9));
}

TEST_CASE("witness for example2, k = 1") {
  for (auto p : {q(1, 3), q(1, 2), q(4, 5)}) {
    WitnessParams wp;
    wp.eps = {0.1};
    const auto w = witness_x_k(Rules::ex2, 1, p, wp);
    REQUIRE(w.complete);
    REQUIRE(w.stages.size() == 2);
    CHECK(w.stages[0].t.front() == q(1, 3));
    CHECK(w.stages[0].achieved[0] >= 0.9);
    CHECK(w.stages[1].t.front() == q(2, 3));
    CHECK(w.stages[1].achieved[0] <= 0.1);
  }
}

TEST_CASE("witness errors and partial results") {
  WitnessParams zero;
  zero.cap_m = 0;
  CHECK_THROWS_AS(witness_x_k(Rules::ex1, 1, q(2, 3), zero), ConstructionError);
  CHECK_THROWS_AS(witness_x_k(Rules::ex1, 1, q(1, 2), {}), DomainError);
  WitnessParams bad;
  bad.prefix = {{1, 2}};
  CHECK_THROWS_AS(witness_x_k(Rules::ex1, 1, q(2, 3), bad), InputError);

  WitnessParams tight;
  tight.eps = {1e-6};
  tight.cap_m = 4;
  tight.cap_n = 6;
  const auto w = witness_x_k(Rules::ex1, 2, q(2, 3), tight);
  CHECK_FALSE(w.complete);
  CHECK_FALSE(w.diagnostic.empty());
}
