#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gibbs/lab.hpp"

namespace gibbs {

/// Everything a subcommand needs to reproduce a run. Serialized verbatim into
/// every report as "config"; feeding a report back through --config replays it.
struct RunConfig {
  nlohmann::json energy = {{"kind", "const"}, {"c", 1.0}, {"beta", 1.0}};
  std::optional<double> mu;
  std::vector<double> mu_sequence;
  std::optional<double> target_mass;
  std::string ensemble = "quantum";
  std::string strategy = "auto";
  std::uint64_t max_attempts = 10'000'000;
  std::uint64_t samples = 1000;
  std::uint64_t seed = 0;
  double tol = 1e-6;         // sampler truncation
  double series_tol = 1e-10; // analytic series
  std::string grid;          // "lo:hi:n" (geometric) or "lin:lo:hi:n"; empty = automatic
  double y = 0.1;
  double epsilon = 0.1;
  std::vector<double> points;
  std::vector<Interval> intervals;
  std::vector<double> masses;
  bool formal = false;
  std::string out;
  std::string curve;
  unsigned threads = 0;
};

nlohmann::json to_json(const RunConfig& c);
/// Accepts either a bare config object or a report carrying one under "config".
RunConfig run_config_from_json(const nlohmann::json& j);

/// Exit codes: 0 success with all verdicts passing, 1 a verdict failed,
/// 2 configuration error, 3 domain error, 4 cap exceeded, 5 non-convergent,
/// 6 unreachable, 70 internal error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gibbs
