#include "gibbs/config.hpp"

#include <cmath>

#include <fmt/format.h>

#include "gibbs/error.hpp"

namespace gibbs {

namespace {

using nlohmann::json;

const json* find(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double number(const json& j, const char* key, double fallback, const std::string& path) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_number()) throw ConfigError(fmt::format("{}.{}: expected a number", path, key));
  return v->get<double>();
}

double required_number(const json& j, const char* key, const std::string& path) {
  if (!find(j, key)) throw ConfigError(fmt::format("{}.{}: missing required field", path, key));
  return number(j, key, 0.0, path);
}

EnergyKind parse_kind(const std::string& s, const std::string& path) {
  if (s == "decay") return EnergyKind::Decay;
  if (s == "const" || s == "constant") return EnergyKind::Constant;
  if (s == "loglog") return EnergyKind::LogLog;
  if (s == "log") return EnergyKind::Log;
  if (s == "power") return EnergyKind::Power;
  throw ConfigError(fmt::format("{}.kind: unknown energy kind '{}'", path, s));
}

std::string kind_of(const json& j, const std::string& path) {
  const json* k = find(j, "kind");
  if (!k) throw ConfigError(fmt::format("{}.kind: missing required field", path));
  if (!k->is_string()) throw ConfigError(fmt::format("{}.kind: expected a string", path));
  return k->get<std::string>();
}

TailShape parse_tail(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(fmt::format("{}: expected an object", path));
  TailShape t;
  t.kind = parse_kind(kind_of(j, path), path);
  t.c = number(j, "c", 1.0, path);
  t.alpha = number(j, "alpha", 1.0, path);
  t.power = number(j, "p", 1.0, path);
  if (t.kind == EnergyKind::Decay) {
    t.alpha = required_number(j, "alpha", path);
    if (!(t.alpha > 0.0)) throw ConfigError(fmt::format("{}.alpha: must be positive", path));
  }
  if (t.kind == EnergyKind::Power) t.power = required_number(j, "p", path);
  return t;
}

std::vector<double> parse_table(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(fmt::format("{}.table: expected an array of numbers", path));
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError(fmt::format("{}.table[{}]: expected a number", path, i));
    out.push_back(v[i].get<double>());
  }
  return out;
}

}  // namespace

const char* library_version() noexcept { return GIBBS_VERSION; }

std::string to_string(EnergyKind kind) {
  switch (kind) {
    case EnergyKind::Decay: return "decay";
    case EnergyKind::Constant: return "const";
    case EnergyKind::LogLog: return "loglog";
    case EnergyKind::Log: return "log";
    case EnergyKind::Power: return "power";
  }
  return "?";
}

EnergyModel energy_from_json(const json& j) {
  const std::string path = "energy";
  if (!j.is_object()) throw ConfigError("energy: expected an object");
  const std::string kind = kind_of(j, path);
  const double beta = number(j, "beta", 1.0, path);
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("energy.beta: must be finite and non-negative");

  EnergyModel model;
  try {
    if (kind == "table") {
      const json* table = find(j, "table");
      const json* tail = find(j, "tail");
      if (!table) throw ConfigError("energy.table: missing required field");
      if (!tail) throw ConfigError("energy.tail: missing required field");
      model = EnergyModel::table(parse_table(*table, path), parse_tail(*tail, path + ".tail"), beta);
    } else {
      const TailShape t = parse_tail(j, path);
      if (const json* table = find(j, "table")) {
        model = EnergyModel::table(parse_table(*table, path), t, beta);
      } else {
        switch (t.kind) {
          case EnergyKind::Decay: model = EnergyModel::decay(t.alpha, beta, t.c); break;
          case EnergyKind::Constant: model = EnergyModel::constant(t.c, beta); break;
          case EnergyKind::LogLog: model = EnergyModel::loglog(beta); break;
          case EnergyKind::Log: {
            std::optional<double> e1;
            if (find(j, "e1")) e1 = number(j, "e1", 0.0, path);
            model = EnergyModel::log(beta, e1, t.c);
            break;
          }
          case EnergyKind::Power: model = EnergyModel::power(t.c, t.power, beta); break;
        }
      }
    }
    if (find(j, "shift")) model = model.with_shift(number(j, "shift", 0.0, path));
    if (const json* ex = find(j, "exclude")) {
      if (!ex->is_array()) throw ConfigError("energy.exclude: expected an array of part sizes");
      std::vector<PartSize> states;
      for (std::size_t i = 0; i < ex->size(); ++i) {
        const json& v = (*ex)[i];
        if (!v.is_number_integer() || v.get<std::int64_t>() < 1)
          throw ConfigError(fmt::format("energy.exclude[{}]: expected an integer >= 1", i));
        states.push_back(v.get<PartSize>());
      }
      model = model.excluding(states);
    }
    if (const json* rs = find(j, "rescale_slope")) {
      if (!rs->is_boolean()) throw ConfigError("energy.rescale_slope: expected a boolean");
      if (rs->get<bool>()) model = rescale_to_unit_slope(model);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(fmt::format("energy: {}", e.what()));
  }
  return model;
}

json energy_to_json(const EnergyModel& model) {
  const TailShape& t = model.tail();
  json j;
  j["kind"] = to_string(t.kind);
  j["c"] = t.c;
  if (t.kind == EnergyKind::Decay) j["alpha"] = t.alpha;
  if (t.kind == EnergyKind::Power) j["p"] = t.power;
  j["table"] = model.table_values();
  j["beta"] = model.beta();
  if (model.shift() != 0.0) j["shift"] = model.shift();
  if (!model.excluded().empty()) j["exclude"] = model.excluded();
  return j;
}

}  // namespace gibbs
