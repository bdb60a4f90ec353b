#include <doctest.h>

#include <string>

#include "gibbs/cli.hpp"
#include "gibbs/config.hpp"
#include "gibbs/error.hpp"

using namespace gibbs;
using nlohmann::json;

namespace {

std::string error_of(const json& j) {
  try {
    energy_from_json(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("energy models survive a JSON round trip") {
  const std::vector<EnergyModel> models{
      EnergyModel::decay(0.5, 1.0, 2.0),
      EnergyModel::constant(1.0, 0.0),
      EnergyModel::loglog(1.0),
      EnergyModel::log(1.5),
      EnergyModel::log(1.0, 0.0),
      EnergyModel::power(1.0, 2.0, 1.0),
      EnergyModel::table({0.0, 0.5}, {EnergyKind::Power, 1.0, 1.0, 1.0}, 1.0),
      EnergyModel::log(1.0).excluding({1}),
      EnergyModel::constant(1.0, 1.0).with_shift(0.25),
  };
  for (const auto& m : models) {
    const json j = energy_to_json(m);
    CAPTURE(j.dump());
    CHECK(energy_from_json(j) == m);
    CHECK(energy_from_json(json::parse(j.dump())) == m);
  }
}

TEST_CASE("energy kinds and defaults") {
  CHECK(energy_from_json({{"kind", "constant"}}) == EnergyModel::constant(1.0, 1.0));
  CHECK(energy_from_json({{"kind", "const"}, {"c", 2.0}, {"beta", 0.0}}) == EnergyModel::constant(2.0, 0.0));
  CHECK(energy_from_json({{"kind", "log"}, {"beta", 1.0}, {"e1", 0.0}}) == EnergyModel::log(1.0, 0.0));
  CHECK(energy_from_json(json::parse(R"({"kind":"table","table":[0],"tail":{"kind":"power","c":1,"p":1},"beta":1})")) ==
        EnergyModel::table({0.0}, {EnergyKind::Power, 1.0, 1.0, 1.0}, 1.0));
  for (auto k : {EnergyKind::Decay, EnergyKind::Constant, EnergyKind::LogLog, EnergyKind::Log, EnergyKind::Power})
    CHECK(energy_from_json({{"kind", to_string(k)}, {"alpha", 1.0}, {"p", 1.0}}).tail().kind == k);
}

TEST_CASE("configuration errors name the offending field") {
  CHECK(error_of(json::array()) == "energy: expected an object");
  CHECK(error_of({{"c", 1}}).find("energy.kind") != std::string::npos);
  CHECK(error_of({{"kind", "quadratic"}}).find("energy.kind") != std::string::npos);
  CHECK(error_of({{"kind", "decay"}}).find("energy.alpha") != std::string::npos);
  CHECK(error_of({{"kind", "decay"}, {"alpha", -1.0}}).find("energy.alpha") != std::string::npos);
  CHECK(error_of({{"kind", "power"}}).find("energy.p") != std::string::npos);
  CHECK(error_of({{"kind", "const"}, {"beta", "hot"}}).find("energy.beta") != std::string::npos);
  CHECK(error_of({{"kind", "const"}, {"beta", -1.0}}).find("energy.beta") != std::string::npos);
  CHECK(error_of({{"kind", "table"}, {"tail", {{"kind", "const"}}}}).find("energy.table") != std::string::npos);
  CHECK(error_of({{"kind", "table"}, {"table", {0.0}}}).find("energy.tail") != std::string::npos);
  CHECK(error_of({{"kind", "const"}, {"table", {0.0, "x"}}}).find("energy.table[1]") != std::string::npos);
  CHECK(error_of({{"kind", "const"}, {"exclude", {0}}}).find("energy.exclude[0]") != std::string::npos);
  CHECK(error_of({{"kind", "const"}, {"rescale_slope", 1}}).find("energy.rescale_slope") != std::string::npos);
}

TEST_CASE("run config round trip") {
  RunConfig c;
  c.energy = {{"kind", "log"}, {"beta", 1.5}};
  c.mu = 1e-3;
  c.mu_sequence = {1e-2, 1e-3};
  c.target_mass = 12.0;
  c.ensemble = "canonical";
  c.strategy = "rejection";
  c.samples = 77;
  c.seed = 123456789012345ULL;
  c.grid = "lin:0:2:5";
  c.y = 0.5;
  c.epsilon = 0.2;
  c.points = {0.5, 1.5};
  c.intervals = {{0.5, 1.0}, {1.0, 2.0}};
  c.masses = {100.0};
  c.formal = true;
  const json j = to_json(c);
  const RunConfig back = run_config_from_json(j);
  CHECK(to_json(back) == j);
  CHECK(back.seed == c.seed);
  CHECK(back.intervals.size() == 2);
  CHECK(to_json(run_config_from_json(json{{"config", j}, {"verdict", "pass"}})) == j);
  CHECK_THROWS_AS(run_config_from_json(json{{"samples", "many"}}), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(json::array()), ConfigError);
}

TEST_CASE("library version is set") { CHECK(std::string(library_version()).size() > 0); }
