#include "dchaos/cli.hpp"

#include <fstream>
#include <optional>

#include "CLI11.hpp"

#include "dchaos/errors.hpp"
#include "dchaos/io.hpp"

namespace dchaos {

namespace {

struct Common {
  std::string builtin_name;
  std::string config_path;
  std::string p;
  std::uint64_t seed = 1;
  std::string out_path;
  std::uint64_t samples = 4096;
  long nmax = 0;  // 0: mode default
  double window = 0.5;
  std::string tgrid = "default";
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  auto* b = cmd->add_option("--builtin", c.builtin_name, "example1 | example2 | halving_pair | mixing_pair");
  auto* f = cmd->add_option("--config", c.config_path, "system JSON file");
  b->excludes(f);
  cmd->add_option("--p", c.p, "probability of f, e.g. 2/3");
  cmd->add_option("--seed", c.seed, "Monte Carlo seed");
  cmd->add_option("--out", c.out_path, "output file");
  cmd->add_option("--samples", c.samples, "Monte Carlo samples")->check(CLI::PositiveNumber);
  cmd->add_option("--nmax", c.nmax, "horizon n_hi")->check(CLI::PositiveNumber);
  cmd->add_option("--window", c.window, "trailing window fraction in (0,1]");
  cmd->add_option("--tgrid", c.tgrid, "default | triadic | uniform:N | file:PATH");
  cmd->add_option("--threads", c.threads, "Monte Carlo workers (0: all cores)");
}

SystemConfig load_system(const Common& c) {
  std::optional<SystemConfig> cfg;
  if (!c.config_path.empty()) {
    cfg = load_config(c.config_path);
  } else if (!c.builtin_name.empty()) {
    cfg = builtin(c.builtin_name);
  } else {
    throw InputError("one of --builtin or --config is required");
  }
  if (!c.p.empty()) return cfg->with_p(parse_rational(c.p));
  return *cfg;
}

Json manifest(const std::string& command, const Common& c, const SystemConfig& cfg) {
  Json m;
  m["tool"] = "dchaos";
  m["version"] = kToolVersion;
  m["command"] = command;
  m["system"] = c.config_path.empty() ? c.builtin_name : c.config_path;
  m["p"] = rational_to_json(cfg.p);
  m["seed"] = c.seed;
  m["samples"] = c.samples;
  m["nmax"] = c.nmax;
  m["window"] = c.window;
  m["tgrid"] = c.tgrid;
  m["outputs"] = c.out_path.empty() ? Json::array({"stdout"}) : Json::array({c.out_path});
  return m;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path);
  return f;
}

void emit_json(const Common& c, Json manifest, Json result, std::ostream& out) {
  Json doc;
  doc["manifest"] = std::move(manifest);
  doc["result"] = std::move(result);
  if (c.out_path.empty()) {
    out << doc.dump(2) << '\n';
  } else {
    auto f = open_out(c.out_path);
    f << doc.dump(2) << '\n';
  }
}

template <class Writer>
void emit_csv(const Common& c, Json manifest, Writer&& write, std::ostream& out, std::ostream& err) {
  if (c.out_path.empty()) {
    write(out);
    err << manifest.dump() << '\n';
    return;
  }
  auto f = open_out(c.out_path);
  write(f);
  manifest["outputs"].push_back(c.out_path + ".manifest.json");
  auto m = open_out(c.out_path + ".manifest.json");
  m << manifest.dump(2) << '\n';
}

EngineParams engine_params(const Common& c, bool exact, long burn_in) {
  EngineParams params;
  params.mode = exact ? ProbMode::exact : ProbMode::monte_carlo;
  params.mc.samples = c.samples;
  params.mc.seed = c.seed;
  params.mc.threads = c.threads;
  params.burn_in = burn_in;
  return params;
}

long horizon(const Common& c, bool exact) { return c.nmax > 0 ? c.nmax : (exact ? 20 : 1000); }

std::pair<Rational, Rational> parse_pair(const std::string& text) {
  const auto v = parse_rational_list(text);
  if (v.size() != 2) throw InputError("a pair is two rationals 'x,y', got '" + text + "'");
  return {v[0], v[1]};
}

int parse_witness_k(const std::string& text) {
  std::string v = text.rfind("k=", 0) == 0 ? text.substr(2) : text;
  try {
    std::size_t used = 0;
    const int k = std::stoi(v, &used);
    if (used != v.size() || k < 0) throw std::invalid_argument(v);
    return k;
  } catch (const std::exception&) {
    throw InputError("bad --witnesses value '" + text + "' (expected k=N)");
  }
}

std::vector<double> parse_eps_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& q : parse_rational_list(text)) {
    if (!(q > 0)) throw InputError("tolerances must be positive");
    out.push_back(q.get_d());
  }
  return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distributional chaos of two-map random dynamical systems", "dchaos"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Common c;
  std::string x_text, y_text, seq_text, pairs_text, witnesses_text = "k=0", a_text, a_file, star_eps, eps_text,
                                                        rules_text = "ex1", wit_eps;
  bool exact = false;
  long burn_in = 0, probe = 50, k = 1, cap_m = 5000, cap_n = 5000, n_min = 1;
  int grid_n = 16, rays = 64, stages = 2;
  std::vector<std::string> extra_pairs;

  auto* cert = app.add_subcommand("certificate", "zero-chaos certificate");
  add_common(cert, c);

  auto* prof = app.add_subcommand("profile", "lower/upper distribution functions of one pair (CSV)");
  add_common(prof, c);
  prof->add_option("--x", x_text, "first point");
  prof->add_option("--y", y_text, "second point");
  prof->add_option("--seq", seq_text, "ternary block sequence for x against y=0, e.g. '0^3 2^inf'");
  prof->add_flag("--exact", exact, "exact law propagation instead of Monte Carlo");
  prof->add_option("--burn-in", burn_in, "steps skipped before averaging")->check(CLI::NonNegativeNumber);

  auto* mu = app.add_subcommand("mu", "estimate the measure of chaos (JSON)");
  add_common(mu, c);
  mu->add_option("--grid", grid_n, "points per axis of the pair grid");
  mu->add_option("--rays", rays, "pairs (x, lo)");
  mu->add_option("--pair", extra_pairs, "extra pair 'x,y' (repeatable)");
  mu->add_option("--witnesses", witnesses_text, "symbolic witness points k=1..N, as k=N");
  mu->add_option("--witness-eps", wit_eps, "witness stage tolerances");
  mu->add_flag("--exact", exact, "exact law propagation instead of Monte Carlo");
  mu->add_option("--burn-in", burn_in, "steps skipped before averaging")->check(CLI::NonNegativeNumber);

  auto* mk = app.add_subcommand("markov", "pair chain on a finite invariant set (JSON)");
  add_common(mk, c);
  mk->add_option("--A", a_text, "invariant set, e.g. '0,1/2,1'");
  mk->add_option("--A-file", a_file, "file with the invariant set");
  mk->add_option("--star-eps", star_eps, "analyse the perturbed system for this epsilon");
  mk->add_option("--x", x_text, "pair for exact limit distribution function");
  mk->add_option("--y", y_text, "pair for exact limit distribution function");
  mk->add_option("--probe", probe, "steps for the empirical absorption probe");

  auto* pt = app.add_subcommand("perturb", "nearby system with zero measure of chaos (JSON)");
  add_common(pt, c);
  pt->add_option("--eps", eps_text, "sup-distance bound")->required();

  auto* wt = app.add_subcommand("witness", "symbolic witness point (JSON)");
  add_common(wt, c);
  wt->add_option("--rules", rules_text, "ex1 | ex2");
  wt->add_option("--k", k, "threshold depth")->check(CLI::PositiveNumber);
  wt->add_option("--eps", wit_eps, "stage tolerances (last repeats); default 1/j");
  wt->add_option("--stages", stages, "number of stages")->check(CLI::PositiveNumber);
  wt->add_option("--cap-m", cap_m, "largest block length");
  wt->add_option("--cap-n", cap_n, "largest step count");
  wt->add_option("--n-min", n_min, "smallest step count of a stage");

  auto* sim = app.add_subcommand("simulate", "step probabilities P(|x_i-y_i|<t) (CSV)");
  add_common(sim, c);
  sim->add_option("--x", x_text, "first point")->required();
  sim->add_option("--y", y_text, "second point")->required();
  sim->add_flag("--exact", exact, "exact law propagation instead of Monte Carlo");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cert->parsed()) {
      const auto cfg = load_system(c);
      emit_json(c, manifest("certificate", c, cfg), certificate_to_json(zero_chaos_certificate(cfg)), out);
      return 0;
    }

    if (wt->parsed()) {
      const Rules rules = parse_rules(rules_text);
      const Rational p = c.p.empty() ? Rational(2, 3) : parse_rational(c.p);
      WitnessParams wp;
      if (!wit_eps.empty()) wp.eps = parse_eps_list(wit_eps);
      wp.stages = stages;
      wp.cap_m = cap_m;
      wp.cap_n = cap_n;
      wp.n_min = n_min;
      const auto w = witness_x_k(rules, k, p, wp);
      const auto cfg = rules_system(rules, p);
      Json m = manifest("witness", c, cfg);
      m["system"] = std::string(rules_name(rules));
      m["k"] = k;
      m["caps"] = {{"M", cap_m}, {"N", cap_n}};
      m["eps"] = wp.eps;
      m["stages"] = stages;
      emit_json(c, std::move(m), witness_to_json(w), out);
      return 0;
    }

    const auto cfg = load_system(c);

    if (prof->parsed()) {
      const auto grid = parse_grid(c.tgrid, cfg.interval);
      const long n_hi = horizon(c, exact);
      DistributionProfile result;
      Json m = manifest("profile", c, cfg);
      if (!seq_text.empty()) {
        const auto rules = rules_for(cfg);
        if (!rules) throw InputError("--seq needs example1 or example2");
        const auto seq = BlockSeq::parse(seq_text);
        result = symbolic_profile(*rules, seq, cfg.p, grid, n_hi, c.window, burn_in);
        m["x"] = seq.to_string();
        m["y"] = "0";
        m["mode"] = "symbolic";
      } else {
        if (x_text.empty() || y_text.empty()) throw InputError("profile needs --x and --y (or --seq)");
        const Rational x = parse_rational(x_text), y = parse_rational(y_text);
        result = profile(cfg, x, y, grid, n_hi, c.window, engine_params(c, exact, burn_in));
        m["x"] = to_string(x);
        m["y"] = to_string(y);
        m["mode"] = exact ? "exact" : "monte_carlo";
      }
      m["nmax"] = n_hi;
      m["burn_in"] = burn_in;
      m["n_lo"] = result.n_lo;
      m["gap_area"] = gap_area(result);
      emit_csv(c, std::move(m), [&](std::ostream& o) { write_profile_csv(o, result); }, out, err);
      return 0;
    }

    if (mu->parsed()) {
      const auto grid = parse_grid(c.tgrid, cfg.interval);
      const long n_hi = horizon(c, exact);
      PairStrategy strategy;
      strategy.grid = grid_n;
      strategy.rays = rays;
      for (const auto& text : extra_pairs) strategy.extra.push_back(parse_pair(text));
      strategy.witness_k = parse_witness_k(witnesses_text);
      if (!wit_eps.empty()) strategy.witness_eps = parse_eps_list(wit_eps);
      const auto est = estimate_mu(cfg, strategy, grid, n_hi, c.window, engine_params(c, exact, burn_in));
      Json m = manifest("mu", c, cfg);
      m["nmax"] = n_hi;
      m["mode"] = exact ? "exact" : "monte_carlo";
      m["pairs"] = {{"grid", grid_n}, {"rays", rays}, {"extra", extra_pairs}, {"witness_k", strategy.witness_k}};
      emit_json(c, std::move(m), estimate_to_json(est), out);
      return 0;
    }

    if (mk->parsed()) {
      SystemConfig sys = cfg;
      std::vector<Rational> A;
      Json result;
      if (!star_eps.empty()) {
        const auto star = construct_star(cfg, parse_rational(star_eps));
        sys = SystemConfig(star.f_star, star.g_star, cfg.p);
        A = star.A;
        result["star"] = star_to_json(star);
      } else if (!a_file.empty()) {
        A = read_rational_list(a_file);
      } else if (!a_text.empty()) {
        A = parse_rational_list(a_text);
      } else {
        throw InputError("markov needs --A, --A-file or --star-eps");
      }
      const auto pc = build_pair_chain(sys, A);
      const auto dec = decompose(pc.chain);
      result["chain"] = chain_to_json(pc, dec);
      result["absorption"] = absorption_to_json(check_absorption(sys, A, probe, 1000, c.seed));
      if (!x_text.empty() || !y_text.empty()) {
        if (x_text.empty() || y_text.empty()) throw InputError("--x and --y go together");
        const auto grid = parse_grid(c.tgrid, cfg.interval);
        const Rational x = parse_rational(x_text), y = parse_rational(y_text);
        Json lim = Json::array();
        for (const auto& t : grid.values()) {
          lim.push_back({{"t", rational_to_json(t)}, {"F", rational_to_json(exact_F_limit(pc, dec, x, y, t))}});
        }
        result["F_limit"] = {{"x", to_string(x)}, {"y", to_string(y)}, {"values", std::move(lim)}};
      }
      Json m = manifest("markov", c, cfg);
      if (!star_eps.empty()) m["star_eps"] = star_eps;
      m["probe"] = probe;
      emit_json(c, std::move(m), std::move(result), out);
      return 0;
    }

    if (pt->parsed()) {
      const auto star = construct_star(cfg, parse_rational(eps_text));
      Json result;
      result["star"] = star_to_json(star);
      result["verify"] = star_report_to_json(verify_star(star, cfg));
      Json m = manifest("perturb", c, cfg);
      m["eps"] = eps_text;
      emit_json(c, std::move(m), std::move(result), out);
      return 0;
    }

    if (sim->parsed()) {
      const auto grid = parse_grid(c.tgrid, cfg.interval);
      const long n = horizon(c, exact);
      const Rational x = parse_rational(x_text), y = parse_rational(y_text);
      StepProbabilities probs;
      if (exact) {
        probs = step_probabilities_exact(propagate_exact(cfg, x, y, static_cast<int>(n)), grid.values());
      } else {
        McPlan plan{c.samples, c.seed, c.threads};
        probs = monte_carlo(cfg, x.get_d(), y.get_d(), static_cast<int>(n), grid.values(), plan);
      }
      Json m = manifest("simulate", c, cfg);
      m["nmax"] = n;
      m["x"] = to_string(x);
      m["y"] = to_string(y);
      m["mode"] = exact ? "exact" : "monte_carlo";
      emit_csv(c, std::move(m), [&](std::ostream& o) { write_step_csv(o, probs); }, out, err);
      return 0;
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace dchaos
