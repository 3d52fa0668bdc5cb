#pragma once

#include <string>
#include <vector>

#include "dchaos/maps.hpp"
#include "dchaos/markov.hpp"
#include "dchaos/rational.hpp"

namespace dchaos {

/// Perturbed pair (f*, g*) with a finite invariant set A that absorbs
/// every trajectory.
struct StarSystem {
  PiecewiseLinearMap f_star;
  PiecewiseLinearMap g_star;
  std::vector<Rational> A;  // sorted, distinct
  long n = 0;
  Rational delta;
  Rational epsilon;
};

/// eps / max(1, L), L the larger Lipschitz constant of f and g.
Rational modulus_delta(const PiecewiseLinearMap& f, const PiecewiseLinearMap& g, const Rational& eps);

/// Sorted distinct values f(x_k), g(x_k) on the grid x_k = lo + |I| k / n.
std::vector<Rational> build_A(const PiecewiseLinearMap& f, const PiecewiseLinearMap& g, long n);

/// Smallest n with |I| / n < delta.
long grid_resolution(const Interval& interval, const Rational& delta);

StarSystem construct_star(const SystemConfig& config, const Rational& eps);

struct StarReport {
  Rational dist_f;
  Rational dist_g;
  bool close_f = false;
  bool close_g = false;
  bool invariant = false;
  std::string invariance_message;
  bool covering = false;
  std::optional<Rational> uncovered;
  Rational bound_base;  // P(x_n not in A) <= bound_base^n
  bool absorption_agrees = false;

  bool all_pass() const { return close_f && close_g && invariant && covering && absorption_agrees; }
};

StarReport verify_star(const StarSystem& sys, const SystemConfig& original);

}  // namespace dchaos
