#include "gibbs/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "gibbs/analytics.hpp"
#include "gibbs/config.hpp"
#include "gibbs/error.hpp"
#include "gibbs/sampler.hpp"

namespace gibbs {

namespace {

using nlohmann::json;

constexpr int kExitVerdict = 1;

int exit_code(const std::string& code) {
  if (code == "config") return 2;
  if (code == "domain") return 3;
  if (code == "cap_exceeded") return 4;
  if (code == "non_convergent") return 5;
  if (code == "unreachable") return 6;
  return 70;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("{}: '{}' is not a number", what, s));
  }
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& part : split(s, ','))
    if (!part.empty()) out.push_back(parse_double(part, what));
  if (out.empty()) throw ConfigError(fmt::format("{}: empty list", what));
  return out;
}

std::vector<Interval> parse_intervals(const std::string& s) {
  std::vector<Interval> out;
  for (const auto& part : split(s, ',')) {
    const auto ends = split(part, ':');
    if (ends.size() != 2) throw ConfigError(fmt::format("intervals: '{}' is not of the form lo:hi", part));
    out.push_back({parse_double(ends[0], "intervals"), parse_double(ends[1], "intervals")});
  }
  return out;
}

template <class T>
T field(const json& j, const char* key, const T& fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config.{}: {}", key, e.what()));
  }
}

// Flag values; unset flags leave the file config untouched.
struct Overrides {
  std::string config_path;
  std::string energy;
  double alpha = 0, beta = 0, c = 0, p = 0, e1 = 0;
  double mu = 0, target_mass = 0, tol = 0, series_tol = 0, y = 0, epsilon = 0;
  std::string mu_seq, grid, out, curve, ensemble, strategy, points, intervals, masses;
  std::uint64_t samples = 0, seed = 0, max_attempts = 0;
  unsigned threads = 0;
  bool formal = false;
  std::multimap<std::string, CLI::Option*> opts;  // one entry per subcommand
  bool set(const std::string& name) const {
    auto [lo, hi] = opts.equal_range(name);
    for (auto it = lo; it != hi; ++it)
      if (it->second->count() > 0) return true;
    return false;
  }
};

void add_options(CLI::App* app, Overrides& o) {
  auto add = [&](const std::string& name, auto& var, const std::string& help) {
    o.opts.emplace(name, app->add_option("--" + name, var, help));
  };
  add("config", o.config_path, "JSON run config, or a previous report to replay");
  add("energy", o.energy, "energy kind (decay|const|loglog|log|power) or a JSON energy fragment");
  add("alpha", o.alpha, "decay exponent");
  add("beta", o.beta, "inverse temperature");
  add("c", o.c, "energy prefactor");
  add("p", o.p, "power-law exponent");
  add("e1", o.e1, "E_1 override for the log model");
  add("mu", o.mu, "chemical potential");
  add("mu-seq", o.mu_seq, "comma-separated chemical potentials");
  add("target-mass", o.target_mass, "tune mu so that E Mon equals this mass (canonical: M)");
  add("ensemble", o.ensemble, "quantum|classical|canonical");
  add("strategy", o.strategy, "canonical strategy: auto|enumeration|rejection");
  add("max-attempts", o.max_attempts, "canonical rejection budget per draw");
  add("samples", o.samples, "number of replicas");
  add("seed", o.seed, "64-bit seed (fallback: GIBBS_PARTITIONS_SEED)");
  add("tol", o.tol, "sampler truncation tolerance");
  add("series-tol", o.series_tol, "analytic series tolerance");
  add("grid", o.grid, "lo:hi:n (geometric) or lin:lo:hi:n");
  add("y", o.y, "left end of the supremum range");
  add("epsilon", o.epsilon, "deviation threshold");
  add("x", o.points, "comma-separated evaluation points");
  add("intervals", o.intervals, "comma-separated lo:hi intervals");
  add("masses", o.masses, "comma-separated target masses");
  add("out", o.out, "output path (default stdout)");
  add("curve", o.curve, "CSV curve output path");
  add("threads", o.threads, "worker threads (default: all cores)");
  o.opts.emplace("formal", app->add_flag("--formal", o.formal, "use the formal curve when no limit shape exists"));
}

RunConfig resolve(const Overrides& o) {
  RunConfig cfg;
  if (o.set("config")) {
    std::ifstream in(o.config_path);
    if (!in) throw ConfigError(fmt::format("config: cannot open '{}'", o.config_path));
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(fmt::format("config '{}': {}", o.config_path, e.what()));
    }
    cfg = run_config_from_json(j);
  } else if (const char* env = std::getenv("GIBBS_PARTITIONS_SEED")) {
    try {
      cfg.seed = std::stoull(env);
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("GIBBS_PARTITIONS_SEED: '{}' is not an unsigned integer", env));
    }
  }
  if (o.set("energy")) {
    if (!o.energy.empty() && o.energy.front() == '{') {
      try {
        cfg.energy = json::parse(o.energy);
      } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("--energy: {}", e.what()));
      }
    } else {
      const double beta = field<double>(cfg.energy, "beta", 1.0);
      cfg.energy = {{"kind", o.energy}, {"beta", beta}};
    }
  }
  if (o.set("alpha")) cfg.energy["alpha"] = o.alpha;
  if (o.set("beta")) cfg.energy["beta"] = o.beta;
  if (o.set("c")) cfg.energy["c"] = o.c;
  if (o.set("p")) cfg.energy["p"] = o.p;
  if (o.set("e1")) cfg.energy["e1"] = o.e1;
  // A flag choosing how mu is set replaces whatever the file chose.
  if (o.set("mu") || o.set("mu-seq") || o.set("target-mass")) {
    cfg.mu.reset();
    cfg.mu_sequence.clear();
    cfg.target_mass.reset();
  }
  if (o.set("mu")) cfg.mu = o.mu;
  if (o.set("mu-seq")) cfg.mu_sequence = parse_list(o.mu_seq, "--mu-seq");
  if (o.set("target-mass")) cfg.target_mass = o.target_mass;
  if (o.set("ensemble")) cfg.ensemble = o.ensemble;
  if (o.set("strategy")) cfg.strategy = o.strategy;
  if (o.set("max-attempts")) cfg.max_attempts = o.max_attempts;
  if (o.set("samples")) cfg.samples = o.samples;
  if (o.set("seed")) cfg.seed = o.seed;
  if (o.set("tol")) cfg.tol = o.tol;
  if (o.set("series-tol")) cfg.series_tol = o.series_tol;
  if (o.set("grid")) cfg.grid = o.grid;
  if (o.set("y")) cfg.y = o.y;
  if (o.set("epsilon")) cfg.epsilon = o.epsilon;
  if (o.set("x")) cfg.points = parse_list(o.points, "--x");
  if (o.set("intervals")) cfg.intervals = parse_intervals(o.intervals);
  if (o.set("masses")) cfg.masses = parse_list(o.masses, "--masses");
  if (o.set("formal")) cfg.formal = o.formal;
  if (o.set("out")) cfg.out = o.out;
  if (o.set("curve")) cfg.curve = o.curve;
  if (o.set("threads")) cfg.threads = o.threads;

  const int chosen = (cfg.mu ? 1 : 0) + (cfg.mu_sequence.empty() ? 0 : 1) + (cfg.target_mass ? 1 : 0);
  if (chosen > 1) throw ConfigError("config: give exactly one of mu, mu_sequence, target_mass");
  if (cfg.samples < 1) throw ConfigError("config.samples: must be >= 1");
  if (!(cfg.tol > 0.0)) throw ConfigError("config.tol: must be positive");
  if (!(cfg.series_tol > 0.0)) throw ConfigError("config.series_tol: must be positive");
  return cfg;
}

double single_mu(const RunConfig& cfg, const EnergyModel& model) {
  if (cfg.mu) return *cfg.mu;
  if (cfg.target_mass) return mu_for_target_mass(model, *cfg.target_mass);
  if (cfg.mu_sequence.size() == 1) return cfg.mu_sequence.front();
  throw ConfigError("config: this command needs mu or target_mass");
}

std::vector<double> mu_list(const RunConfig& cfg, const EnergyModel& model) {
  if (!cfg.mu_sequence.empty()) return cfg.mu_sequence;
  return {single_mu(cfg, model)};
}

std::vector<double> make_grid(const std::string& text, double lo_default, double hi_default) {
  if (text.empty()) return geometric_grid(lo_default, hi_default, kDefaultGridPoints);
  auto parts = split(text, ':');
  bool linear = false;
  if (!parts.empty() && (parts.front() == "lin" || parts.front() == "log")) {
    linear = parts.front() == "lin";
    parts.erase(parts.begin());
  }
  if (parts.size() != 3) throw ConfigError(fmt::format("grid: '{}' is not of the form [lin:]lo:hi:n", text));
  const double lo = parse_double(parts[0], "grid");
  const double hi = parse_double(parts[1], "grid");
  const double n = parse_double(parts[2], "grid");
  if (!(n >= 2) || n != std::floor(n)) throw ConfigError("grid: n must be an integer >= 2");
  try {
    return linear ? linear_grid(lo, hi, static_cast<std::size_t>(n)) : geometric_grid(lo, hi, static_cast<std::size_t>(n));
  } catch (const DomainError& e) {
    throw ConfigError(fmt::format("grid: {}", e.what()));
  }
}

void write_text(const std::string& path, std::ostream& fallback, const std::string& text) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError(fmt::format("cannot write '{}'", path));
  f << text;
}

json envelope(const std::string& command, const RunConfig& cfg) {
  return {{"command", command}, {"version", library_version()}, {"seed", cfg.seed}, {"config", to_json(cfg)}};
}

std::string csv_header(const std::string& command, const RunConfig& cfg) {
  return fmt::format("# gibbs_partitions {} {} config={}\n", command, library_version(), to_json(cfg).dump());
}

// Reference curve for Monte Carlo comparisons: the limit shape, or the formal
// expression when asked for and defined.
std::function<double(double)> reference_curve(const EnergyModel& model, std::string& kind) {
  const LimitShapeResult ls = limit_shape(model);
  if (ls.status == ShapeStatus::Available) {
    kind = ls.shape->family;
    return ls.shape->F;
  }
  const RegimeTag tag = classify_regime(model);
  if (tag.growth == GrowthClass::Critical && model.beta() < 2.0) {
    kind = "formal";
    const double beta = model.beta();
    return [beta](double x) { return formal_shape(GrowthClass::Critical, beta, x); };
  }
  throw DomainError(fmt::format("no reference curve: {}", ls.reason));
}

int cmd_classify(const RunConfig& cfg, std::ostream& out) {
  const EnergyModel model = energy_from_json(cfg.energy);
  const GroundState gs = ground_state(model);
  const RegimeTag tag = classify_regime(model);
  const LimitShapeResult ls = limit_shape(model);
  json j = envelope("classify", cfg);
  j["scenario"] = to_string(tag.scenario);
  j["regime"] = to_string(tag.growth);
  j["epsilon_star"] = gs.epsilon_star;
  j["mu_star"] = gs.mu_star;
  j["thermo_limit"] = tag.thermo_limit;
  j["rows_apply"] = tag.rows_apply;
  j["indeterminate"] = tag.indeterminate;
  j["limit_shape"] = ls.status == ShapeStatus::Available ? ls.shape->family : to_string(ls.status);
  if (!ls.reason.empty()) j["reason"] = ls.reason;
  if (!tag.note.empty()) j["note"] = tag.note;
  if (ls.shape) j["lambda"] = ls.shape->lambda;
  write_text(cfg.out, out, j.dump(2) + "\n");
  return 0;
}

int cmd_shape(const RunConfig& cfg, std::ostream& out) {
  const EnergyModel model = energy_from_json(cfg.energy);
  std::string kind;
  const auto F = reference_curve(model, kind);
  if (kind == "formal" && !cfg.formal)
    throw DomainError(fmt::format("no limit shape: {} (use --formal for the formal curve)", limit_shape(model).reason));
  std::vector<double> grid;
  if (!cfg.points.empty())
    grid = cfg.points;
  else
    grid = make_grid(cfg.grid, 0.01, find_x_max(F));
  std::string text = csv_header("shape", cfg) + "x,F\n";
  for (double x : grid) text += fmt::format("{:.17g},{:.17g}\n", x, F(x));
  write_text(cfg.out, out, text);
  return 0;
}

int cmd_expect(const RunConfig& cfg, std::ostream& out) {
  const EnergyModel model = energy_from_json(cfg.energy);
  const double mu = single_mu(cfg, model);
  json j = envelope("expect", cfg);
  j["mu"] = mu;
  j["log_xi"] = to_json(grand_potential_log(model, mu, cfg.series_tol));
  j["expected_monomers"] = to_json(expected_monomers(model, mu, cfg.series_tol));
  const RegimeTag tag = classify_regime(model);
  if (tag.rows_apply && tag.growth != GrowthClass::Supercritical && tag.growth != GrowthClass::Undefined) {
    const double scaled = scaled_expected_monomers(model, mu, cfg.series_tol);
    const double lambda = lambda_constant(tag.growth, model.beta());
    j["regime"] = to_string(tag.growth);
    j["scaled_expected_monomers"] = scaled;
    if (std::isfinite(lambda)) {
      j["lambda"] = lambda;
      j["relative_error"] = (scaled - lambda) / lambda;
    }
  }
  const std::vector<double> xs = cfg.points.empty() ? std::vector<double>{0.25, 0.5, 1.0, 2.0} : cfg.points;
  const LimitShapeResult ls = limit_shape(model);
  json pts = json::array();
  for (double x : xs) {
    json p{{"x", x},
           {"expected_F", to_json(expected_F(model, mu, x, cfg.series_tol))},
           {"variance_F", to_json(variance_F(model, mu, x, cfg.series_tol))}};
    if (ls.shape) p["F_limit"] = ls.shape->F(x);
    pts.push_back(p);
  }
  j["points"] = pts;
  write_text(cfg.out, out, j.dump(2) + "\n");
  return 0;
}

int cmd_sample(const RunConfig& cfg, std::ostream& out) {
  SamplerConfig sc;
  sc.model = energy_from_json(cfg.energy);
  sc.ensemble = ensemble_from_string(cfg.ensemble);
  sc.truncation_tol = cfg.tol;
  sc.seed = cfg.seed;
  sc.replicas = cfg.samples;
  sc.strategy = strategy_from_string(cfg.strategy);
  sc.max_attempts = cfg.max_attempts;
  if (sc.ensemble == Ensemble::Canonical) {
    if (!cfg.target_mass || *cfg.target_mass < 0 || *cfg.target_mass != std::floor(*cfg.target_mass))
      throw ConfigError("config.target_mass: canonical sampling needs a non-negative integer mass M");
    sc.M = static_cast<std::uint64_t>(*cfg.target_mass);
  } else {
    sc.mu = single_mu(cfg, sc.model);
  }
  const SampleRun run = sample(sc, cfg.threads);
  std::ostringstream s;
  write_ndjson(s, sc, run, {{"run_config", to_json(cfg)}});
  write_text(cfg.out, out, s.str());
  return 0;
}

int cmd_converge(const RunConfig& cfg, std::ostream& out) {
  const EnergyModel model = energy_from_json(cfg.energy);
  std::string kind;
  const auto F = reference_curve(model, kind);
  const std::vector<double> grid = make_grid(cfg.grid, cfg.y, std::max(find_x_max(F), 2.0 * cfg.y));
  json runs = json::array();
  std::string csv = csv_header("converge", cfg) + "mu,x,mean_F,var_F,F_analytic\n";
  bool pass = true;
  std::vector<double> exceed;
  for (double mu : mu_list(cfg, model)) {
    SamplerConfig sc;
    sc.model = model;
    sc.mu = mu;
    sc.truncation_tol = cfg.tol;
    sc.seed = cfg.seed;
    sc.replicas = cfg.samples;
    const SampleRun run = sample(sc, cfg.threads);
    const EmpiricalShape shape = empirical_scaled_F(run.samples, model, mu, grid);
    const DeviationReport rep = deviation_report(shape, F, cfg.y, cfg.epsilon);
    pass = pass && rep.verdict;
    exceed.push_back(rep.empirical_exceed_prob);
    json r = to_json(rep);
    r["mu"] = mu;
    r["truncation_index"] = run.truncation_index;
    r["expected_mass"] = shape.expected_mass;
    r["mean_mass"] = shape.mean_mass;
    runs.push_back(r);
    for (std::size_t i = 0; i < grid.size(); ++i)
      csv += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", mu, grid[i], shape.mean_F[i], shape.var_F[i],
                         F(grid[i]));
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < exceed.size(); ++i) decreasing = decreasing && exceed[i] < exceed[i - 1];
  json j = envelope("converge", cfg);
  j["reference"] = kind;
  j["runs"] = runs;
  j["exceed_prob_strictly_decreasing"] = decreasing;
  j["verdict"] = pass ? "pass" : "fail";
  write_text(cfg.out, out, j.dump(2) + "\n");
  if (!cfg.curve.empty()) write_text(cfg.curve, out, csv);
  return pass ? 0 : kExitVerdict;
}

LabRun lab_run(const RunConfig& cfg) { return {cfg.seed, cfg.threads, cfg.tol}; }

int finish_report(const std::string& command, const RunConfig& cfg, json report, std::ostream& out) {
  json j = envelope(command, cfg);
  for (auto& [k, v] : report.items()) j[k] = v;
  write_text(cfg.out, out, j.dump(2) + "\n");
  return j.value("verdict", std::string("fail")) == "pass" ? 0 : kExitVerdict;
}

int cmd_condense(const RunConfig& cfg, std::ostream& out) {
  const EnergyModel model = energy_from_json(cfg.energy);
  return finish_report("condense", cfg, condensation_report(model, mu_list(cfg, model), cfg.samples, lab_run(cfg)), out);
}

int cmd_critical(const RunConfig& cfg, std::ostream& out) {
  std::vector<double> mus = cfg.mu_sequence;
  if (mus.empty()) {
    if (!cfg.mu) throw ConfigError("config: critical needs mu or mu_sequence");
    mus = {*cfg.mu};
  }
  const std::vector<Interval> iv = cfg.intervals.empty() ? std::vector<Interval>{{0.5, 1.0}, {1.0, 2.0}} : cfg.intervals;
  return finish_report("critical", cfg, critical_process_report(mus, cfg.samples, iv, lab_run(cfg)), out);
}

int cmd_bell(const RunConfig& cfg, std::ostream& out) {
  const std::vector<double> masses = cfg.masses.empty() ? std::vector<double>{1e3, 1e4, 1e5} : cfg.masses;
  const std::vector<double> xs = cfg.points.empty() ? std::vector<double>{0.5, 1.5} : cfg.points;
  return finish_report("bell", cfg, bell_step_report(masses, cfg.samples, xs, lab_run(cfg)), out);
}

void report_error(std::ostream& err, const std::string& code, const std::string& message) {
  err << json{{"error", {{"code", code}, {"message", message}}}}.dump() << '\n';
}

}  // namespace

json to_json(const RunConfig& c) {
  json j{{"energy", c.energy},
         {"ensemble", c.ensemble},
         {"strategy", c.strategy},
         {"max_attempts", c.max_attempts},
         {"samples", c.samples},
         {"seed", c.seed},
         {"tol", c.tol},
         {"series_tol", c.series_tol},
         {"y", c.y},
         {"epsilon", c.epsilon},
         {"formal", c.formal},
         {"threads", c.threads}};
  if (c.mu) j["mu"] = *c.mu;
  if (!c.mu_sequence.empty()) j["mu_sequence"] = c.mu_sequence;
  if (c.target_mass) j["target_mass"] = *c.target_mass;
  if (!c.grid.empty()) j["grid"] = c.grid;
  if (!c.points.empty()) j["points"] = c.points;
  if (!c.masses.empty()) j["masses"] = c.masses;
  if (!c.intervals.empty()) {
    json iv = json::array();
    for (const auto& i : c.intervals) iv.push_back({i.lo, i.hi});
    j["intervals"] = iv;
  }
  return j;
}

RunConfig run_config_from_json(const json& src) {
  if (!src.is_object()) throw ConfigError("config: expected a JSON object");
  const json& j = src.contains("config") && src["config"].is_object() ? src["config"] : src;
  RunConfig c;
  if (j.contains("energy")) {
    if (!j["energy"].is_object()) throw ConfigError("config.energy: expected an object");
    c.energy = j["energy"];
  }
  if (j.contains("mu")) c.mu = field<double>(j, "mu", 0.0);
  c.mu_sequence = field<std::vector<double>>(j, "mu_sequence", {});
  if (j.contains("target_mass")) c.target_mass = field<double>(j, "target_mass", 0.0);
  c.ensemble = field<std::string>(j, "ensemble", c.ensemble);
  c.strategy = field<std::string>(j, "strategy", c.strategy);
  c.max_attempts = field<std::uint64_t>(j, "max_attempts", c.max_attempts);
  c.samples = field<std::uint64_t>(j, "samples", c.samples);
  c.seed = field<std::uint64_t>(j, "seed", c.seed);
  c.tol = field<double>(j, "tol", c.tol);
  c.series_tol = field<double>(j, "series_tol", c.series_tol);
  c.grid = field<std::string>(j, "grid", c.grid);
  c.y = field<double>(j, "y", c.y);
  c.epsilon = field<double>(j, "epsilon", c.epsilon);
  c.points = field<std::vector<double>>(j, "points", {});
  c.masses = field<std::vector<double>>(j, "masses", {});
  c.formal = field<bool>(j, "formal", c.formal);
  c.threads = field<unsigned>(j, "threads", c.threads);
  for (const auto& iv : field<std::vector<std::vector<double>>>(j, "intervals", {})) {
    if (iv.size() != 2) throw ConfigError("config.intervals: each entry must be [lo, hi]");
    c.intervals.push_back({iv[0], iv[1]});
  }
  return c;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random partitions under multiplicative Gibbs measures: limit shapes, sampling, diagnostics",
               "gibbs_partitions"};
  app.set_version_flag("--version", std::string(library_version()));
  app.require_subcommand(1);
  Overrides o;
  std::map<CLI::App*, std::function<int(const RunConfig&, std::ostream&)>> handlers;
  auto sub = [&](const std::string& name, const std::string& help, std::function<int(const RunConfig&, std::ostream&)> fn) {
    CLI::App* s = app.add_subcommand(name, help);
    add_options(s, o);
    handlers[s] = std::move(fn);
  };
  sub("classify", "scenario, regime row, ground state and limit-shape availability", cmd_classify);
  sub("shape", "closed-form limit shape as CSV", cmd_shape);
  sub("expect", "certified series values at mu", cmd_expect);
  sub("sample", "NDJSON dump of random partitions", cmd_sample);
  sub("converge", "Monte Carlo deviation from the limit shape", cmd_converge);
  sub("condense", "condensate statistics of an S2 model", cmd_condense);
  sub("critical", "Poisson-process statistics in the critical regime", cmd_critical);
  sub("bell", "step-shape statistics of classical partitions", cmd_bell);

  try {
    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << library_version() << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    report_error(err, "config", e.what());
    return exit_code("config");
  }
  try {
    for (auto& [s, fn] : handlers)
      if (s->parsed()) return fn(resolve(o), out);
    report_error(err, "config", "no subcommand given");
    return exit_code("config");
  } catch (const Error& e) {
    report_error(err, e.code(), e.what());
    return exit_code(e.code());
  } catch (const std::exception& e) {
    report_error(err, "internal", e.what());
    return exit_code("internal");
  }
}

}  // namespace gibbs
