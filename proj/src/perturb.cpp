#include "dchaos/perturb.hpp"

#include <algorithm>

#include "dchaos/errors.hpp"

namespace dchaos {

Rational modulus_delta(const PiecewiseLinearMap& f, const PiecewiseLinearMap& g, const Rational& eps) {
  if (!(eps > 0)) throw InputError("epsilon must be positive");
  const Rational L = max(lipschitz_constant(f), lipschitz_constant(g));
  Rational delta = eps / max(Rational(1), L);
  delta.canonicalize();
  return delta;
}

std::vector<Rational> build_A(const PiecewiseLinearMap& f, const PiecewiseLinearMap& g, long n) {
  if (n < 1) throw InputError("grid resolution must be at least 1");
  const Interval I = f.domain();
  std::vector<Rational> A;
  A.reserve(static_cast<std::size_t>(2 * (n + 1)));
  for (long k = 0; k <= n; ++k) {
    const Rational x = I.lo() + I.length() * frac(k, n);
    A.push_back(f(x));
    A.push_back(g(x));
  }
  for (auto& a : A) a.canonicalize();
  std::sort(A.begin(), A.end());
  A.erase(std::unique(A.begin(), A.end()), A.end());
  return A;
}

long grid_resolution(const Interval& interval, const Rational& delta) {
  if (!(delta > 0)) throw InputError("delta must be positive");
  // |I| / n < delta  <=>  n > |I| / delta
  const Rational ratio = interval.length() / delta;
  BigInt n = ratio.get_num() / ratio.get_den() + 1;
  if (!n.fits_slong_p()) throw InputError("grid resolution too large");
  return n.get_si();
}

namespace {

void push_point(std::vector<Breakpoint>& pts, const Rational& x, const Rational& y) {
  if (!pts.empty() && pts.back().x == x) {
    if (pts.back().y != y) throw ConstructionError("conflicting values at x=" + to_string(x));
    return;
  }
  pts.push_back(Breakpoint{x, y});
}

}  // namespace

StarSystem construct_star(const SystemConfig& config, const Rational& eps) {
  const Rational delta = modulus_delta(config.f, config.g, eps);
  const long n = grid_resolution(config.interval, delta);
  auto A = build_A(config.f, config.g, n);

  const Rational& lo = config.interval.lo();
  const Rational len = config.interval.length();
  std::vector<Breakpoint> fp, gp;
  for (long k = 0; k < n; ++k) {
    const Rational left = lo + len * frac(k, n);
    const Rational right = lo + len * frac(k + 1, n);
    const Rational fl = config.f(left), fr = config.f(right);
    const Rational gl = config.g(left), gr = config.g(right);
    auto first = std::upper_bound(A.begin(), A.end(), left);
    auto last = std::lower_bound(A.begin(), A.end(), right);
    if (first >= last) {
      const Rational mid = (left + right) / 2;
      push_point(fp, left, fl);
      push_point(fp, mid, fl);
      push_point(fp, right, fr);
      push_point(gp, left, gl);
      push_point(gp, mid, gr);
      push_point(gp, right, gr);
    } else {
      const Rational b0 = (left + *first) / 2;
      const Rational b1 = (*(last - 1) + right) / 2;
      push_point(fp, left, fl);
      push_point(fp, b1, fl);
      push_point(fp, right, fr);
      push_point(gp, left, gl);
      push_point(gp, b0, gr);
      push_point(gp, right, gr);
    }
  }
  for (auto& bp : fp) bp.x.canonicalize(), bp.y.canonicalize();
  for (auto& bp : gp) bp.x.canonicalize(), bp.y.canonicalize();

  StarSystem sys{PiecewiseLinearMap(std::move(fp)), PiecewiseLinearMap(std::move(gp)), std::move(A), n, delta, eps};
  const StarReport report = verify_star(sys, config);
  if (!report.all_pass()) {
    std::string what = "perturbed system failed verification:";
    if (!report.close_f) what += " d(f,f*)=" + to_string(report.dist_f);
    if (!report.close_g) what += " d(g,g*)=" + to_string(report.dist_g);
    if (!report.invariant) what += " " + report.invariance_message;
    if (!report.covering && report.uncovered) what += " uncovered point " + to_string(*report.uncovered);
    throw ConstructionError(what);
  }
  return sys;
}

StarReport verify_star(const StarSystem& sys, const SystemConfig& original) {
  StarReport r;
  r.dist_f = sup_distance(original.f, sys.f_star);
  r.dist_g = sup_distance(original.g, sys.g_star);
  r.close_f = r.dist_f < sys.epsilon;
  r.close_g = r.dist_g < sys.epsilon;
  const SystemConfig star(sys.f_star, sys.g_star, original.p);
  try {
    check_invariance(star, sys.A);
    r.invariant = true;
  } catch (const InvarianceError& e) {
    r.invariance_message = e.what();
  }
  r.covering = one_step_covering(star, sys.A, &r.uncovered);
  r.bound_base = max(original.p, 1 - original.p);
  if (r.invariant) {
    const AbsorptionReport ab = check_absorption(star, sys.A, 0, 0);
    r.absorption_agrees = ab.covering == r.covering && ab.bound_base == r.bound_base;
  }
  return r;
}

}  // namespace dchaos
