#include "dchaos/maps.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "dchaos/errors.hpp"

namespace dchaos {

Interval::Interval(Rational lo, Rational hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (!(lo_ < hi_)) {
    throw InputError("interval needs lo < hi, got [" + to_string(lo_) + ", " + to_string(hi_) + "]");
  }
}

PiecewiseLinearMap::PiecewiseLinearMap(std::vector<Breakpoint> breakpoints)
    : points_(std::move(breakpoints)) {
  if (points_.size() < 2) throw InputError("a piecewise-linear map needs at least two breakpoints");
  for (std::size_t k = 1; k < points_.size(); ++k) {
    if (!(points_[k - 1].x < points_[k].x)) {
      throw InputError("breakpoint x-coordinates must be strictly increasing (at index " +
                       std::to_string(k) + ")");
    }
  }
  const Rational& lo = points_.front().x;
  const Rational& hi = points_.back().x;
  for (const auto& bp : points_) {
    if (bp.y < lo || bp.y > hi) {
      throw InputError("value " + to_string(bp.y) + " at x=" + to_string(bp.x) +
                       " leaves the domain; the map must be a self-map");
    }
  }
  xs_.reserve(points_.size());
  ys_.reserve(points_.size());
  for (const auto& bp : points_) {
    xs_.push_back(bp.x.get_d());
    ys_.push_back(bp.y.get_d());
  }
  for (std::size_t k = 0; k + 1 < points_.size(); ++k) slopes_.push_back(slope(k).get_d());
  lo_d_ = xs_.front();
  hi_d_ = xs_.back();
}

Rational PiecewiseLinearMap::slope(std::size_t k) const {
  return (points_[k + 1].y - points_[k].y) / (points_[k + 1].x - points_[k].x);
}

Rational PiecewiseLinearMap::operator()(const Rational& x) const {
  if (x < points_.front().x || x > points_.back().x) {
    throw DomainError("x=" + to_string(x) + " is outside the map's domain");
  }
  auto it = std::upper_bound(points_.begin(), points_.end(), x,
                             [](const Rational& v, const Breakpoint& bp) { return v < bp.x; });
  if (it == points_.end()) return points_.back().y;
  const Breakpoint& right = *it;
  const Breakpoint& left = *(it - 1);
  if (x == left.x) return left.y;
  return left.y + (right.y - left.y) * (x - left.x) / (right.x - left.x);
}

double PiecewiseLinearMap::operator()(double x) const {
  if (!(x >= lo_d_ && x <= hi_d_)) throw DomainError("x is outside the map's domain");
  std::size_t k;
  if (xs_.size() <= 8) {
    k = 0;
    while (k + 2 < xs_.size() && x >= xs_[k + 1]) ++k;
  } else {
    k = static_cast<std::size_t>(std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin());
    k = k == 0 ? 0 : std::min(k - 1, xs_.size() - 2);
  }
  double y = ys_[k] + slopes_[k] * (x - xs_[k]);
  return std::clamp(y, lo_d_, hi_d_);
}

PiecewiseLinearMap identity_map(const Interval& interval) {
  return PiecewiseLinearMap({{interval.lo(), interval.lo()}, {interval.hi(), interval.hi()}});
}

PiecewiseLinearMap constant_map(const Interval& interval, const Rational& value) {
  return PiecewiseLinearMap({{interval.lo(), value}, {interval.hi(), value}});
}

Rational lipschitz_constant(const PiecewiseLinearMap& map) {
  Rational best = 0;
  for (std::size_t k = 0; k < map.segments(); ++k) best = max(best, abs(map.slope(k)));
  return best;
}

std::optional<Rational> contraction_constant(const PiecewiseLinearMap& map) {
  Rational m = lipschitz_constant(map);
  if (m < 1) return m;
  return std::nullopt;
}

Rational sup_distance(const PiecewiseLinearMap& a, const PiecewiseLinearMap& b) {
  if (!(a.domain() == b.domain())) throw DomainError("sup_distance needs maps on the same interval");
  Rational best = 0;
  for (const auto& bp : a.breakpoints()) best = max(best, abs(bp.y - b(bp.x)));
  for (const auto& bp : b.breakpoints()) best = max(best, abs(a(bp.x) - bp.y));
  return best;
}

SystemConfig::SystemConfig(PiecewiseLinearMap f_, PiecewiseLinearMap g_, Rational p_, std::string name_)
    : f(std::move(f_)), g(std::move(g_)), p(std::move(p_)), interval(f.domain()), name(std::move(name_)) {
  if (!(f.domain() == g.domain())) throw InputError("f and g must share the same domain interval");
  if (p < 0 || p > 1) throw InputError("p must lie in [0,1], got " + to_string(p));
}

SystemConfig SystemConfig::with_p(const Rational& q) const {
  return SystemConfig(f, g, q, name);
}

SystemConfig SystemConfig::swapped() const {
  return SystemConfig(g, f, Rational(1 - p), {});
}

namespace {

constexpr std::array<std::string_view, 4> kBuiltinNames = {"example1", "example2", "halving_pair",
                                                           "mixing_pair"};

PiecewiseLinearMap pl(std::initializer_list<std::pair<const char*, const char*>> pts) {
  std::vector<Breakpoint> bps;
  for (const auto& [x, y] : pts) bps.push_back({parse_rational(x), parse_rational(y)});
  return PiecewiseLinearMap(std::move(bps));
}

}  // namespace

std::span<const std::string_view> builtin_names() { return kBuiltinNames; }

SystemConfig builtin(std::string_view name, const Rational& p) {
  if (name == "example1") {
    // Tripling tent and x/3.
    return SystemConfig(pl({{"0", "0"}, {"1/3", "1"}, {"2/3", "0"}, {"1", "1"}}),
                        pl({{"0", "0"}, {"1", "1/3"}}), p, std::string(name));
  }
  if (name == "example2") {
    // Middle branch of g is -x + 2/3; it is the only continuous choice
    // consistent with g(1s) = 0 conj(s) in ternary.
    return SystemConfig(pl({{"0", "0"}, {"1/3", "1"}, {"2/3", "2/3"}, {"1", "1"}}),
                        pl({{"0", "0"}, {"1/3", "1/3"}, {"2/3", "0"}, {"1", "1"}}), p,
                        std::string(name));
  }
  if (name == "halving_pair") {
    return SystemConfig(pl({{"0", "0"}, {"1", "1/2"}}), pl({{"0", "1/2"}, {"1", "1"}}), p,
                        std::string(name));
  }
  if (name == "mixing_pair") {
    // Fourth branch of g is 4x - 5/2 (continuity at 5/8 and 3/4).
    return SystemConfig(
        pl({{"0", "0"}, {"1/4", "1"}, {"1/2", "31/32"}, {"3/4", "1"}, {"1", "0"}}),
        pl({{"0", "15/32"}, {"1/4", "1/2"}, {"3/8", "1"}, {"5/8", "0"}, {"3/4", "1/2"}, {"1", "17/32"}}),
        p, std::string(name));
  }
  throw InputError("unknown builtin system '" + std::string(name) +
                   "' (expected example1, example2, halving_pair or mixing_pair)");
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::ZeroByContraction:
      return "ZeroByContraction";
    case Verdict::ZeroByLipschitzSmallExpanding:
      return "ZeroByLipschitzSmall_cM≥1";
    case Verdict::ZeroByLipschitzSmallNonexpanding:
      return "ZeroByLipschitzSmall_cM≤1";
    case Verdict::NoGuarantee:
      return "NoGuarantee";
  }
  return "NoGuarantee";
}

namespace {

struct Orientation {
  char lipschitz_map;
  Rational M;
  Rational c;
  Rational prob;  // probability of applying the Lipschitz map
};

// cM >= 1: r is the smallest positive integer with c^r M <= 1; needs prob < 1/(1+r).
std::optional<Certificate> expanding_rule(const Orientation& o) {
  if (o.c * o.M < 1) return std::nullopt;
  long r = 1;
  Rational power = o.c;
  while (power * o.M > 1) {
    power *= o.c;
    ++r;
  }
  Rational threshold(1, r + 1);
  if (!(o.prob < threshold)) return std::nullopt;
  return Certificate{Verdict::ZeroByLipschitzSmallExpanding, o.M, o.c, r, threshold, o.lipschitz_map, o.prob};
}

// cM <= 1: r is the greatest positive integer with c M^r <= 1; needs prob < r/(1+r).
std::optional<Certificate> nonexpanding_rule(const Orientation& o) {
  if (o.c * o.M > 1) return std::nullopt;
  if (o.c == 0 || o.M <= 1) {
    // c M^r <= 1 for every r: any prob < 1 qualifies.
    if (!(o.prob < 1)) return std::nullopt;
    return Certificate{Verdict::ZeroByLipschitzSmallNonexpanding, o.M, o.c, std::nullopt, Rational(1),
                       o.lipschitz_map, o.prob};
  }
  long r = 1;
  Rational value = o.c * o.M;
  while (value * o.M <= 1) {
    value *= o.M;
    ++r;
  }
  Rational threshold(r, r + 1);
  if (!(o.prob < threshold)) return std::nullopt;
  return Certificate{Verdict::ZeroByLipschitzSmallNonexpanding, o.M, o.c, r, threshold, o.lipschitz_map, o.prob};
}

}  // namespace

Certificate zero_chaos_certificate(const SystemConfig& config) {
  const Rational Mf = lipschitz_constant(config.f);
  const Rational Mg = lipschitz_constant(config.g);
  if (Mf < 1 && Mg < 1) {
    Certificate cert;
    cert.verdict = Verdict::ZeroByContraction;
    cert.contraction = max(Mf, Mg);
    cert.lipschitz = cert.contraction;
    cert.threshold = 1;
    cert.lipschitz_map = 'f';
    cert.lipschitz_probability = config.p;
    return cert;
  }

  std::vector<Orientation> orientations;
  if (Mg < 1) orientations.push_back({'f', Mf, Mg, config.p});
  if (Mf < 1) orientations.push_back({'g', Mg, Mf, Rational(1 - config.p)});

  for (auto rule : {expanding_rule, nonexpanding_rule}) {
    for (const auto& o : orientations) {
      if (auto cert = rule(o)) return *cert;
    }
  }

  Certificate none;
  none.verdict = Verdict::NoGuarantee;
  if (!orientations.empty()) {
    none.lipschitz = orientations.front().M;
    none.contraction = orientations.front().c;
    none.lipschitz_map = orientations.front().lipschitz_map;
    none.lipschitz_probability = orientations.front().prob;
  } else {
    none.lipschitz = Mf;
    none.contraction = Mg;
    none.lipschitz_probability = config.p;
  }
  return none;
}

}  // namespace dchaos
