#pragma once

#include <string>

#include <json.hpp>

#include "gibbs/energy_model.hpp"

namespace gibbs {

/// Parses an energy-model fragment, e.g.
///   {"kind": "log", "beta": 1.5}
///   {"kind": "table", "table": [0, 2], "tail": {"kind": "power", "c": 1, "p": 1}, "beta": 1}
/// Kinds: decay (alpha, c), const (c), loglog, log (c, e1), power (c, p), table
/// (table, tail). Common keys: beta, shift, exclude, rescale_slope. A "table"
/// array is accepted for every kind and pins E_1..E_n.
/// Errors name the offending field and throw ConfigError.
EnergyModel energy_from_json(const nlohmann::json& j);

/// Lossless serialization; energy_from_json(energy_to_json(m)) == m.
nlohmann::json energy_to_json(const EnergyModel& model);

std::string to_string(EnergyKind kind);

/// Library version string, embedded in every report.
const char* library_version() noexcept;

}  // namespace gibbs
