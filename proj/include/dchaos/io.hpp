#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dchaos/distfn.hpp"
#include "dchaos/engine.hpp"
#include "dchaos/maps.hpp"
#include "dchaos/markov.hpp"
#include "dchaos/perturb.hpp"
#include "dchaos/symbolic.hpp"

namespace dchaos {

using Json = nlohmann::ordered_json;

/// Rational from a JSON string ("2/3") or number.
Rational rational_from_json(const Json& j);
Json rational_to_json(const Rational& q);

/// {"interval": ["0","1"], "breakpoints": [["0","0"], ["1/3","1"], ...]}
PiecewiseLinearMap map_from_json(const Json& j);
Json map_to_json(const PiecewiseLinearMap& map);

/// {"interval": [...], "f": {map}, "g": {map}, "p": "2/3"}; "p" may be
/// overridden by the caller.
SystemConfig config_from_json(const Json& j);
Json config_to_json(const SystemConfig& config);
SystemConfig load_config(const std::string& path);

Json certificate_to_json(const Certificate& cert);
Json star_to_json(const StarSystem& star);
Json star_report_to_json(const StarReport& report);
Json absorption_to_json(const AbsorptionReport& report);
Json chain_to_json(const PairChain& pc, const ChainDecomposition& dec);
Json estimate_to_json(const ChaosEstimate& est);
Json witness_to_json(const WitnessResult& w);

/// Rationals separated by whitespace or commas, or a JSON array of them.
std::vector<Rational> parse_rational_list(const std::string& text);
std::vector<Rational> read_rational_list(const std::string& path);

/// default | triadic | uniform:N | file:PATH
ThresholdGrid parse_grid(const std::string& spec, const Interval& interval);

/// Header t,F_lower,F_upper,n_lo,n_hi.
void write_profile_csv(std::ostream& out, const DistributionProfile& profile);
/// Header i,t,prob,err.
void write_step_csv(std::ostream& out, const StepProbabilities& probs);

}  // namespace dchaos
