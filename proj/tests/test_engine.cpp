#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "dchaos/engine.hpp"
#include "dchaos/errors.hpp"

using namespace dchaos;

namespace {

Rational q(long n, long d = 1) { return frac(n, d); }

PiecewiseLinearMap random_map(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pieces(1, 4), y(0, 7);
  const int n = pieces(rng);
  std::vector<Breakpoint> bp;
  for (int i = 0; i <= n; ++i) bp.push_back({q(i, n), q(y(rng), 7)});
  return PiecewiseLinearMap(bp);
}

}  // namespace

TEST_CASE("initial law and mass conservation") {
  const auto cfg = builtin("example1", q(2, 3));
  const auto laws = propagate_exact(cfg, q(1, 5), q(4, 7), 8);
  REQUIRE(laws.size() == 9);
  CHECK(laws[0].atoms.size() == 1);
  CHECK(laws[0].atoms[0].mass == 1);
  for (const auto& law : laws) {
    CHECK(law.total_mass() + law.pruned_mass == 1);
    for (const auto& a : law.atoms) {
      CHECK(cfg.interval.contains(a.x));
      CHECK(cfg.interval.contains(a.y));
    }
    for (std::size_t i = 1; i < law.atoms.size(); ++i) {
      const auto& u = law.atoms[i - 1];
      const auto& v = law.atoms[i];
      CHECK((u.x != v.x || u.y != v.y));
    }
  }
  CHECK_THROWS_AS(propagate_exact(cfg, q(2), q(0), 1), DomainError);
}

TEST_CASE("example1 first step from (1/3, 0)") {
  const auto cfg = builtin("example1", q(2, 3));
  const auto laws = propagate_exact(cfg, q(1, 3), q(0), 1);
  REQUIRE(laws[1].atoms.size() == 2);
  // sorted by (x, y)
  CHECK(laws[1].atoms[0].x == q(1, 9));
  CHECK(laws[1].atoms[0].mass == q(1, 3));
  CHECK(laws[1].atoms[1].x == q(1));
  CHECK(laws[1].atoms[1].y == q(0));
  CHECK(laws[1].atoms[1].mass == q(2, 3));

  const auto half = builtin("example1", q(1, 2));
  const std::vector<Rational> t{q(1, 2)};
  const auto probs = step_probabilities_exact(propagate_exact(half, q(1, 3), q(0), 1), t);
  CHECK(probs.exact_at(1, 0) == q(1, 2));
  CHECK(probs.exact_at(0, 0) == q(1));
}

TEST_CASE("p = 1 traces the f-orbit") {
  const auto cfg = builtin("example1", q(1));
  auto x = q(2, 7);
  const auto laws = propagate_exact(cfg, x, q(0), 6);
  for (const auto& law : laws) {
    REQUIRE(law.atoms.size() == 1);
    CHECK(law.atoms[0].x == x);
    x = cfg.f(x);
  }
}

TEST_CASE("halving pair: the distance is a point mass at 2^-n") {
  const auto cfg = builtin("halving_pair", q(1, 3));
  const auto laws = propagate_exact(cfg, q(0), q(1), 10);
  for (const auto& a : laws[10].atoms) CHECK(abs(a.x - a.y) == q(1, 1024));
  CHECK(laws[10].total_mass() == 1);
  const std::vector<Rational> t{q(1, 1000)};
  CHECK(step_probabilities_exact(laws, t).exact_at(10, 0) == 1);
  CHECK(step_probabilities_exact(laws, t).exact_at(9, 0) == 0);
}

TEST_CASE("strict inequality and zero distance") {
  const auto cfg = builtin("halving_pair");
  const std::vector<Rational> t{q(1, 4), q(1, 2), q(3, 4)};
  const auto probs = step_probabilities_exact(propagate_exact(cfg, q(0), q(1), 2), t);
  CHECK(probs.exact_at(1, 0) == 0);
  CHECK(probs.exact_at(1, 1) == 0);  // distance exactly 1/2
  CHECK(probs.exact_at(1, 2) == 1);
  const auto same = step_probabilities_exact(propagate_exact(cfg, q(1, 2), q(1, 2), 0), t);
  for (std::size_t k = 0; k < t.size(); ++k) CHECK(same.exact_at(0, k) == 1);
}

TEST_CASE("thresholds are validated") {
  const auto laws = propagate_exact(builtin("halving_pair"), q(0), q(1), 1);
  CHECK_THROWS_AS(step_probabilities_exact(laws, std::vector<Rational>{}), InputError);
  CHECK_THROWS_AS(step_probabilities_exact(laws, std::vector<Rational>{q(0)}), InputError);
  CHECK_THROWS_AS(step_probabilities_exact(laws, std::vector<Rational>{q(1, 2), q(1, 4)}), InputError);
}

TEST_CASE("pruning keeps a certified error") {
  const auto cfg = builtin("example1", q(2, 3));
  ExactOptions opt;
  opt.max_atoms = 5;
  const auto laws = propagate_exact(cfg, q(1, 5), q(4, 7), 10, opt);
  const auto full = propagate_exact(cfg, q(1, 5), q(4, 7), 10);
  const std::vector<Rational> t{q(1, 10), q(1, 2)};
  const auto a = step_probabilities_exact(laws, t);
  const auto b = step_probabilities_exact(full, t);
  for (std::size_t i = 0; i <= 10; ++i) {
    CHECK(laws[i].atoms.size() <= 5);
    CHECK(laws[i].total_mass() + laws[i].pruned_mass == 1);
    for (std::size_t k = 0; k < t.size(); ++k) {
      CHECK(a.exact_at(i, k) <= b.exact_at(i, k));
      CHECK(b.exact_at(i, k) - a.exact_at(i, k) <= laws[i].pruned_mass);
      CHECK(a.error(i, k) == doctest::Approx(laws[i].pruned_mass.get_d()));
    }
  }
  ExactOptions eps;
  eps.prune_eps = q(1, 100);
  for (const auto& law : propagate_exact(cfg, q(1, 5), q(4, 7), 10, eps))
    for (const auto& atom : law.atoms) CHECK(atom.mass >= q(1, 100));
}

TEST_CASE("coalescing does not change step probabilities") {
  std::mt19937_64 rng(3);
  ExactOptions raw;
  raw.coalesce = false;
  const std::vector<Rational> t{q(1, 10), q(1, 3), q(1, 2), q(1)};
  for (int trial = 0; trial < 10; ++trial) {
    const SystemConfig cfg(random_map(rng), random_map(rng), q(2, 5));
    const auto a = step_probabilities_exact(propagate_exact(cfg, q(1, 3), q(5, 6), 8), t);
    const auto b = step_probabilities_exact(propagate_exact(cfg, q(1, 3), q(5, 6), 8, raw), t);
    CHECK(a.exact == b.exact);
  }
}

TEST_CASE("monte carlo agrees with the exact law on random systems") {
  std::mt19937_64 rng(5);
  const std::vector<Rational> t{q(1, 11), q(2, 9), q(5, 11), q(9, 13)};
  const std::uint64_t samples = 20000;
  for (int trial = 0; trial < 8; ++trial) {
    const SystemConfig cfg(random_map(rng), random_map(rng), q(1 + trial, 10));
    const Rational x = q(1, 5), y = q(6, 7);
    const auto ex = step_probabilities_exact(propagate_exact(cfg, x, y, 12), t);
    const auto mc = monte_carlo(cfg, x.get_d(), y.get_d(), 12, t, McPlan{samples, 42, 2});
    for (std::size_t i = 0; i <= 12; ++i) {
      for (std::size_t k = 0; k < t.size(); ++k) {
        const double P = ex.at(i, k);
        const double sd = std::sqrt(P * (1 - P) / static_cast<double>(samples));
        CHECK(std::abs(mc.at(i, k) - P) <= 4 * std::max(mc.error(i, k), 1.96 * sd) + 1e-12);
      }
    }
  }
}

TEST_CASE("monte carlo: reference values and determinism") {
  const auto cfg = builtin("example1", q(1, 2));
  const std::vector<Rational> t{q(1, 2)};
  const auto mc = monte_carlo(cfg, 1.0 / 3, 0.0, 1, t, McPlan{100000, 9, 0});
  CHECK(std::abs(mc.at(1, 0) - 0.5) < 0.004);

  const auto g_only = builtin("example1", q(0));
  const std::vector<Rational> tt{q(1, 100), q(1, 2)};
  const auto det = monte_carlo(g_only, 0.9, 0.0, 5, tt, McPlan{64, 1, 1});
  double x = 0.9;
  for (std::size_t i = 0; i <= 5; ++i) {
    CHECK(det.at(i, 0) == (x < 0.01 ? 1.0 : 0.0));
    CHECK(det.at(i, 1) == (x < 0.5 ? 1.0 : 0.0));
    CHECK(det.error(i, 0) == 0.0);
    x /= 3;
  }

  const auto half = builtin("halving_pair", q(1, 3));
  const std::vector<Rational> th{q(1, 1000)};
  for (std::uint64_t seed : {1u, 2u, 99u}) CHECK(monte_carlo(half, 0, 1, 10, th, McPlan{500, seed, 0}).at(10, 0) == 1.0);

  const std::vector<Rational> grid{q(1, 9), q(1, 3), q(2, 3)};
  const auto a = monte_carlo(builtin("example1", q(2, 3)), 0.4, 0.1, 50, grid, McPlan{3000, 17, 1});
  const auto b = monte_carlo(builtin("example1", q(2, 3)), 0.4, 0.1, 50, grid, McPlan{3000, 17, 3});
  CHECK(a.prob == b.prob);
  CHECK(a.err == b.err);
}

TEST_CASE("binomial tail") {
  CHECK(binomial_tail(10, q(1, 2), 0, 0) == doctest::Approx(1.0));
  CHECK(binomial_tail(10, q(1, 2), 0.5, 0) == doctest::Approx(0.623046875).epsilon(1e-12));
  CHECK(binomial_tail(1000, q(1, 2), 0.6, 0) < 0.01);
  CHECK(binomial_tail(1000, q(1, 2), 0.4, 0) > 0.99);
  double last = 2.0;
  for (long n : {10L, 100L, 1000L, 10000L}) {
    const double v = binomial_tail(n, q(1, 2), 0.6, 0);
    CHECK(v < last);
    last = v;
  }
  double prev = 1.0;
  for (double a = 0.0; a <= 1.0; a += 0.05) {
    const double v = binomial_tail(200, q(1, 3), a, 0);
    CHECK(v <= prev + 1e-15);
    prev = v;
  }
  // P(X >= k) + P(X <= k - 1) = 1, with P(X <= k - 1) = P(n - X >= n - k + 1).
  for (long k = 0; k <= 30; ++k) {
    const double up = binomial_tail(30, q(2, 7), static_cast<double>(k) / 30, 0);
    const double down = binomial_tail(30, q(5, 7), static_cast<double>(30 - k + 1) / 30, 0);
    CHECK(up + down == doctest::Approx(1.0).epsilon(1e-12));
  }
  // large n goes through log space; compare with the normal approximation
  const double z = binomial_tail(100000, q(1, 2), 0.5, 50);
  CHECK(z == doctest::Approx(0.376).epsilon(0.02));
}
