#include "dchaos/io.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "dchaos/errors.hpp"

namespace dchaos {

Rational rational_from_json(const Json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long>());
  if (j.is_number()) return parse_rational(j.dump());
  throw InputError("expected a rational, got " + j.dump());
}

Json rational_to_json(const Rational& q) { return to_string(q); }

namespace {

Interval interval_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw InputError("interval must be a two-element array");
  return Interval(rational_from_json(j[0]), rational_from_json(j[1]));
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(what + " is not valid JSON: " + e.what());
  }
}

// Shortest round-trip representation, so output is byte-stable.
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

PiecewiseLinearMap map_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("breakpoints")) throw InputError("a map needs a \"breakpoints\" array");
  std::vector<Breakpoint> pts;
  for (const auto& bp : j.at("breakpoints")) {
    if (!bp.is_array() || bp.size() != 2) throw InputError("each breakpoint must be [x, y]");
    pts.push_back(Breakpoint{rational_from_json(bp[0]), rational_from_json(bp[1])});
  }
  PiecewiseLinearMap map(std::move(pts));
  if (j.contains("interval") && !(interval_from_json(j.at("interval")) == map.domain())) {
    throw InputError("breakpoints do not span the stated interval");
  }
  return map;
}

Json map_to_json(const PiecewiseLinearMap& map) {
  Json j;
  const Interval I = map.domain();
  j["interval"] = Json::array({rational_to_json(I.lo()), rational_to_json(I.hi())});
  Json pts = Json::array();
  for (const auto& bp : map.breakpoints()) pts.push_back(Json::array({rational_to_json(bp.x), rational_to_json(bp.y)}));
  j["breakpoints"] = std::move(pts);
  return j;
}

SystemConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("config must be a JSON object");
  if (j.contains("builtin")) {
    const Rational p = j.contains("p") ? rational_from_json(j.at("p")) : Rational(1, 2);
    return builtin(j.at("builtin").get<std::string>(), p);
  }
  if (!j.contains("f") || !j.contains("g")) throw InputError("config needs maps \"f\" and \"g\"");
  const auto f = map_from_json(j.at("f"));
  const auto g = map_from_json(j.at("g"));
  if (j.contains("interval") && !(interval_from_json(j.at("interval")) == f.domain())) {
    throw InputError("maps do not live on the stated interval");
  }
  const Rational p = j.contains("p") ? rational_from_json(j.at("p")) : Rational(1, 2);
  return SystemConfig(f, g, p, j.value("name", std::string()));
}

Json config_to_json(const SystemConfig& config) {
  Json j;
  if (!config.name.empty()) j["name"] = config.name;
  j["interval"] = Json::array({rational_to_json(config.interval.lo()), rational_to_json(config.interval.hi())});
  j["f"] = map_to_json(config.f);
  j["g"] = map_to_json(config.g);
  j["p"] = rational_to_json(config.p);
  return j;
}

SystemConfig load_config(const std::string& path) { return config_from_json(parse_json(slurp(path), path)); }

Json certificate_to_json(const Certificate& cert) {
  Json j;
  j["verdict"] = std::string(verdict_name(cert.verdict));
  j["M"] = rational_to_json(cert.lipschitz);
  j["c"] = rational_to_json(cert.contraction);
  j["r"] = cert.r ? Json(*cert.r) : Json(nullptr);
  j["threshold"] = rational_to_json(cert.threshold);
  j["lipschitz_map"] = std::string(1, cert.lipschitz_map);
  j["lipschitz_probability"] = rational_to_json(cert.lipschitz_probability);
  return j;
}

Json star_to_json(const StarSystem& star) {
  Json j;
  const Interval I = star.f_star.domain();
  j["interval"] = Json::array({rational_to_json(I.lo()), rational_to_json(I.hi())});
  j["f"] = map_to_json(star.f_star);
  j["g"] = map_to_json(star.g_star);
  Json a = Json::array();
  for (const auto& x : star.A) a.push_back(rational_to_json(x));
  j["A"] = std::move(a);
  j["n"] = star.n;
  j["delta"] = rational_to_json(star.delta);
  j["epsilon"] = rational_to_json(star.epsilon);
  return j;
}

Json star_report_to_json(const StarReport& r) {
  Json j;
  j["d_f"] = rational_to_json(r.dist_f);
  j["d_g"] = rational_to_json(r.dist_g);
  j["close_f"] = r.close_f;
  j["close_g"] = r.close_g;
  j["invariant"] = r.invariant;
  if (!r.invariance_message.empty()) j["invariance_message"] = r.invariance_message;
  j["covering"] = r.covering;
  if (r.uncovered) j["uncovered"] = rational_to_json(*r.uncovered);
  j["absorption_bound_base"] = rational_to_json(r.bound_base);
  j["absorption_agrees"] = r.absorption_agrees;
  j["all_pass"] = r.all_pass();
  return j;
}

Json absorption_to_json(const AbsorptionReport& r) {
  Json j;
  j["covering"] = r.covering;
  j["bound_base"] = rational_to_json(r.bound_base);
  if (r.uncovered) j["uncovered"] = rational_to_json(*r.uncovered);
  j["n_probe"] = r.n_probe;
  if (r.empirical) {
    j["empirical_in_A"] = *r.empirical;
    j["samples"] = r.samples;
  }
  return j;
}

Json chain_to_json(const PairChain& pc, const ChainDecomposition& dec) {
  Json j;
  Json a = Json::array();
  for (const auto& x : pc.A) a.push_back(rational_to_json(x));
  j["A"] = std::move(a);
  Json states = Json::array();
  Json rows = Json::array();
  for (std::size_t s = 0; s < pc.chain.size(); ++s) {
    const auto [i, k] = pc.pair(s);
    states.push_back(Json::array({rational_to_json(pc.A[i]), rational_to_json(pc.A[k])}));
    Json row = Json::array();
    for (const auto& [to, w] : pc.chain.rows[s]) row.push_back(Json::array({to, rational_to_json(w)}));
    rows.push_back(std::move(row));
  }
  j["states"] = std::move(states);
  j["transitions"] = std::move(rows);
  Json classes = Json::array();
  for (std::size_t l = 0; l < dec.closed.size(); ++l) {
    Json c;
    c["states"] = dec.closed[l];
    Json pi = Json::array();
    for (const auto& x : dec.stationary[l]) pi.push_back(rational_to_json(x));
    c["stationary"] = std::move(pi);
    classes.push_back(std::move(c));
  }
  j["closed_classes"] = std::move(classes);
  j["transient"] = dec.transient;
  Json hit = Json::object();
  for (auto s : dec.transient) {
    Json h = Json::array();
    for (const auto& [l, x] : dec.hitting[s]) h.push_back(Json::array({l, rational_to_json(x)}));
    hit[std::to_string(s)] = std::move(h);
  }
  j["hitting"] = std::move(hit);
  // Row sums of the Cesaro limit matrix: sum_l nu_i(C_l) * sum_j Pi_j(C_l).
  bool ok = true;
  for (std::size_t s = 0; s < pc.chain.size() && ok; ++s) {
    Rational total = 0;
    for (const auto& [l, h] : dec.hitting[s]) {
      Rational mass = 0;
      for (const auto& x : dec.stationary[l]) mass += x;
      total += h * mass;
    }
    ok = total == 1;
  }
  j["cesaro_rows_sum_to_one"] = ok;
  return j;
}

Json estimate_to_json(const ChaosEstimate& est) {
  Json j;
  j["mu_hat"] = est.mu_hat;
  j["lower_bound_of_sup"] = true;
  const auto& best = est.best_pair();
  j["best_pair"] = {{"label", best.pair.label},
                    {"x", rational_to_json(best.pair.x)},
                    {"y", rational_to_json(best.pair.y)},
                    {"area", best.area}};
  if (best.pair.sequence) j["best_pair"]["x_ternary"] = best.pair.sequence->to_string();
  j["window"] = {{"n_lo", est.n_lo}, {"n_hi", est.n_hi}, {"window_frac", est.window_frac}};
  j["tgrid"] = est.grid;
  j["method"] = {{"mode", est.params.mode == ProbMode::exact ? "exact" : "monte_carlo"},
                 {"samples", est.params.mc.samples},
                 {"seed", est.params.mc.seed},
                 {"burn_in", est.params.burn_in}};
  Json areas = Json::array();
  for (const auto& a : est.areas) {
    Json e = {{"label", a.pair.label},
              {"x", rational_to_json(a.pair.x)},
              {"y", rational_to_json(a.pair.y)},
              {"area", a.area},
              {"error", a.error}};
    if (a.pair.sequence) e["x_ternary"] = a.pair.sequence->to_string();
    areas.push_back(std::move(e));
  }
  j["per_pair_areas"] = std::move(areas);
  if (!est.notes.empty()) j["notes"] = est.notes;
  return j;
}

Json witness_to_json(const WitnessResult& w) {
  Json j;
  j["rules"] = std::string(rules_name(w.rules));
  j["k"] = w.k;
  j["p"] = rational_to_json(w.p);
  j["x"] = w.x.to_string();
  j["x_value"] = w.x.value().get_d();
  j["complete"] = w.complete;
  if (!w.diagnostic.empty()) j["diagnostic"] = w.diagnostic;
  Json stages = Json::array();
  for (const auto& s : w.stages) {
    Json e = {{"j", s.index}, {"digit", s.digit}, {"M", s.m}, {"N", s.n}, {"eps", s.eps}};
    Json vals = Json::array();
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      vals.push_back({{"t", rational_to_json(s.t[i])},
                      {"target", s.target[i]},
                      {"achieved", i < s.achieved.size() ? Json(s.achieved[i]) : Json(nullptr)}});
    }
    e["values"] = std::move(vals);
    stages.push_back(std::move(e));
  }
  j["stages"] = std::move(stages);
  return j;
}

std::vector<Rational> parse_rational_list(const std::string& text) {
  std::vector<Rational> out;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    const Json j = parse_json(text, "rational list");
    for (const auto& v : j) out.push_back(rational_from_json(v));
    return out;
  }
  std::string token;
  for (char c : text + " ") {
    if (c == ',' || c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      if (!token.empty()) out.push_back(parse_rational(token));
      token.clear();
    } else {
      token += c;
    }
  }
  return out;
}

std::vector<Rational> read_rational_list(const std::string& path) { return parse_rational_list(slurp(path)); }

ThresholdGrid parse_grid(const std::string& spec, const Interval& interval) {
  if (spec.empty()) throw InputError("empty t-grid specification");
  if (spec == "default") return ThresholdGrid::standard(interval);
  if (spec == "triadic") return ThresholdGrid::triadic(interval);
  if (spec.rfind("uniform:", 0) == 0) {
    const std::string n = spec.substr(8);
    int count = 0;
    try {
      std::size_t used = 0;
      count = std::stoi(n, &used);
      if (used != n.size()) throw std::invalid_argument(n);
    } catch (const std::exception&) {
      throw InputError("bad uniform grid size '" + n + "'");
    }
    return ThresholdGrid::uniform(interval, count);
  }
  if (spec.rfind("file:", 0) == 0) return ThresholdGrid::custom(interval, read_rational_list(spec.substr(5)));
  throw InputError("unknown t-grid '" + spec + "' (expected default, triadic, uniform:N or file:PATH)");
}

void write_profile_csv(std::ostream& out, const DistributionProfile& profile) {
  out << "t,F_lower,F_upper,n_lo,n_hi\n";
  for (std::size_t k = 0; k < profile.t.size(); ++k) {
    out << fmt(profile.t[k]) << ',' << fmt(profile.lower[k]) << ',' << fmt(profile.upper[k]) << ','
        << profile.n_lo << ',' << profile.n_hi << '\n';
  }
}

void write_step_csv(std::ostream& out, const StepProbabilities& probs) {
  out << "i,t,prob,err\n";
  for (std::size_t i = 0; i < probs.steps; ++i) {
    for (std::size_t k = 0; k < probs.thresholds(); ++k) {
      out << i << ',' << fmt(probs.t[k]) << ',' << fmt(probs.at(i, k)) << ',' << fmt(probs.error(i, k)) << '\n';
    }
  }
}

}  // namespace dchaos
