#include "gibbs/lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>

#include "gibbs/error.hpp"
#include "gibbs/sampler.hpp"
#include "gibbs/special_functions.hpp"
#include "gibbs/stats.hpp"

namespace gibbs {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double bonferroni_z(std::size_t m, double p = 0.01) {
  const boost::math::normal n;
  return boost::math::quantile(boost::math::complement(n, p / (2.0 * static_cast<double>(std::max<std::size_t>(m, 1)))));
}

// Parts of size >= k0.
std::uint64_t parts_from(const Partition& p, std::uint64_t k0) {
  std::uint64_t n = 0;
  for (auto it = p.entries().rbegin(); it != p.entries().rend() && it->first >= k0; ++it) n += it->second;
  return n;
}

std::uint64_t parts_in(const Partition& p, std::uint64_t ka, std::uint64_t kb) {
  std::uint64_t n = 0;
  for (const auto& [k, c] : p.entries())
    if (k >= ka && k < kb) n += c;
  return n;
}

SampleRun quantum_run(const EnergyModel& model, double mu, std::uint64_t samples, const LabRun& run) {
  SamplerConfig cfg;
  cfg.model = model;
  cfg.mu = mu;
  cfg.ensemble = Ensemble::QuantumGC;
  cfg.truncation_tol = run.truncation_tol;
  cfg.seed = run.seed;
  cfg.replicas = samples;
  return sample(cfg, run.threads);
}


}  // namespace

std::vector<double> geometric_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw DomainError("geometric_grid: need 0 < lo < hi and n >= 2");
  std::vector<double> g(n);
  const double r = std::log(hi / lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo * std::exp(r * static_cast<double>(i));
  g.front() = lo;
  g.back() = hi;
  return g;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
  if (!(hi > lo) || n < 2) throw DomainError("linear_grid: need lo < hi and n >= 2");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

double find_x_max(const std::function<double(double)>& F, double threshold) {
  double x = 1.0;
  while (!(F(x) < threshold)) {
    x *= 2.0;
    if (x > 1e6) throw DomainError("find_x_max: F does not decay below the threshold");
  }
  return x;
}

double ScaledCurve::operator()(double at) const {
  const auto it = std::lower_bound(x.begin(), x.end(), at);
  return it == x.end() ? 0.0 : values[static_cast<std::size_t>(it - x.begin())];
}

EmpiricalShape empirical_scaled_F(const std::vector<Partition>& samples, const EnergyModel& model, double mu,
                                  const std::vector<double>& grid) {
  if (samples.empty()) throw DomainError("empirical_scaled_F: empty sample set");
  if (grid.empty() || !std::is_sorted(grid.begin(), grid.end()) || grid.front() < 0.0)
    throw DomainError("empirical_scaled_F: grid must be non-empty, non-negative and increasing");
  EmpiricalShape s;
  s.model = model;
  s.mu = mu;
  s.expected_mass = expected_monomers(model, mu).value;
  s.grid = grid;
  s.replicas = samples.size();
  s.scale_width = mu;
  s.scale_height = 1.0 / (mu * s.expected_mass);

  std::vector<std::uint64_t> k0(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) k0[i] = first_index_at_or_above(grid[i], mu);
  std::vector<Welford> acc(grid.size());
  Welford mass;
  s.curves.reserve(samples.size());
  for (const Partition& p : samples) {
    mass.add(static_cast<double>(p.mass()));
    const auto& e = p.entries();
    ScaledCurve c;
    c.x.resize(e.size());
    c.values.resize(e.size());
    std::uint64_t suffix = 0;
    for (std::size_t i = e.size(); i-- > 0;) {
      suffix += e[i].second;
      c.x[i] = mu * static_cast<double>(e[i].first);
      c.values[i] = static_cast<double>(suffix) * s.scale_height;
    }
    // Grid values by index, consistent with the analytic series cut-off.
    std::size_t j = 0;
    std::uint64_t tail = p.num_parts();
    for (std::size_t g = 0; g < grid.size(); ++g) {
      while (j < e.size() && e[j].first < k0[g]) tail -= e[j++].second;
      acc[g].add(static_cast<double>(tail) * s.scale_height);
    }
    s.curves.push_back(std::move(c));
  }
  s.mean_mass = mass.mean();
  for (const auto& a : acc) {
    s.mean_F.push_back(a.mean());
    s.var_F.push_back(a.variance());
  }
  return s;
}

double sup_deviation(const ScaledCurve& curve, const std::function<double(double)>& F, double y) {
  double sup = 0.0;
  double a = 0.0;
  for (std::size_t i = 0; i < curve.x.size(); ++i) {
    const double b = curve.x[i];
    if (b >= y) {
      const double c = curve.values[i];
      const double left = std::max(a, y);
      sup = std::max({sup, std::abs(c - F(left)), std::abs(c - F(b))});
    }
    a = b;
  }
  return std::max(sup, std::abs(F(std::max(a, y))));
}

DeviationReport deviation_report(const EmpiricalShape& shape, const std::function<double(double)>& F, double y,
                                 double epsilon) {
  if (!(y > 0.0)) throw DomainError("deviation_report: y must be positive");
  if (!(epsilon > 0.0)) throw DomainError("deviation_report: epsilon must be positive");
  if (shape.grid.empty() || shape.grid.front() > y * (1.0 + 1e-12) || shape.grid.back() <= y)
    throw DomainError(fmt::format("deviation_report: grid does not cover [{}, x_max]", y));
  if (shape.curves.empty()) throw DomainError("deviation_report: empty sample set");

  DeviationReport r;
  r.y = y;
  r.epsilon = epsilon;
  std::uint64_t exceed = 0;
  for (const ScaledCurve& c : shape.curves) {
    const double d = sup_deviation(c, F, y);
    r.sup_deviation.push_back(d);
    r.mean_sup += d;
    r.max_sup = std::max(r.max_sup, d);
    if (d >= epsilon) ++exceed;
  }
  const std::uint64_t n = shape.curves.size();
  r.mean_sup /= static_cast<double>(n);
  r.empirical_exceed_prob = static_cast<double>(exceed) / static_cast<double>(n);
  r.exceed_sigma = binomial_sigma(r.empirical_exceed_prob, n);
  r.variance_at_y = variance_F(shape.model, shape.mu, y).value;
  r.kolmogorov_bound = 4.0 * r.variance_at_y / (epsilon * epsilon);

  std::size_t tested = 0;
  for (std::size_t g = 0; g < shape.grid.size(); ++g) {
    const double x = shape.grid[g];
    double ef = kNaN;
    try {
      ef = expected_F(shape.model, shape.mu, x).value;
    } catch (const NonConvergent&) {
    }
    r.expected_F.push_back(ef);
    if (!std::isfinite(ef)) continue;
    if (x >= y) r.bias = std::max(r.bias, std::abs(ef - F(x)));
    if (shape.var_F[g] > 0.0) {
      ++tested;
      const double se = std::sqrt(shape.var_F[g] / static_cast<double>(n));
      r.max_mean_zscore = std::max(r.max_mean_zscore, std::abs(shape.mean_F[g] - ef) / se);
    }
  }
  r.zscore_threshold = bonferroni_z(tested);
  r.bias_below_half_eps = r.bias <= 0.5 * epsilon;
  r.verdict = r.empirical_exceed_prob <= r.kolmogorov_bound + 3.0 * r.exceed_sigma;
  return r;
}

json to_json(const DeviationReport& r, bool include_per_replica) {
  json j{{"y", r.y},
         {"epsilon", r.epsilon},
         {"mean_sup_deviation", r.mean_sup},
         {"max_sup_deviation", r.max_sup},
         {"empirical_exceed_prob", r.empirical_exceed_prob},
         {"exceed_sigma", r.exceed_sigma},
         {"variance_at_y", r.variance_at_y},
         {"kolmogorov_bound", r.kolmogorov_bound},
         {"bias", r.bias},
         {"bias_below_half_epsilon", r.bias_below_half_eps},
         {"max_mean_zscore", r.max_mean_zscore},
         {"zscore_threshold", r.zscore_threshold},
         {"verdict", r.verdict ? "pass" : "fail"}};
  if (include_per_replica) j["sup_deviation"] = r.sup_deviation;
  return j;
}

std::string shape_csv(const EmpiricalShape& shape, const std::function<double(double)>& F) {
  std::string out = "x,mean_F,var_F,F_analytic\n";
  for (std::size_t i = 0; i < shape.grid.size(); ++i)
    out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", shape.grid[i], shape.mean_F[i], shape.var_F[i],
                       F ? F(shape.grid[i]) : kNaN);
  return out;
}

json condensation_report(const EnergyModel& model, const std::vector<double>& mu_sequence,
                         std::uint64_t samples_per_mu, const LabRun& run) {
  const GroundState gs = ground_state(model);
  if (gs.scenario != Scenario::S2 || gs.attained_at.empty())
    throw DomainError("condensation_report: no condensate state found (model is not S2 with a finite ground state)");
  const EnergyModel m = gs.epsilon_star == 0.0 ? model : renormalize(model).model;
  const std::vector<PartSize>& states = gs.attained_at;
  const EnergyModel rest = m.excluding(states);

  json rows = json::array();
  bool all_pass = true;
  for (double mu : mu_sequence) {
    if (!(mu > 0.0)) throw DomainError("condensation_report: mu - mu* must be positive");
    const SampleRun sr = quantum_run(m, mu, samples_per_mu, run);
    const double n = static_cast<double>(sr.samples.size());
    json srows = json::array();
    for (PartSize k0 : states) {
      std::vector<double> scaled;
      std::vector<std::uint64_t> counts;
      Welford w;
      for (const Partition& p : sr.samples) {
        const std::uint64_t c = p.multiplicity(k0);
        counts.push_back(c);
        scaled.push_back(mu * static_cast<double>(c));
        w.add(mu * static_cast<double>(k0) * static_cast<double>(c));
      }
      const double lt = log_theta(m, mu, k0);
      const double th = std::exp(lt);
      const double exact = mu * static_cast<double>(k0) * th / -std::expm1(lt);
      const double rate = static_cast<double>(k0);
      const double ks_exp = ks_distance(scaled, [rate](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-rate * x); });
      const double ks_geo = ks_distance_lattice(
          counts, [lt](std::uint64_t c) { return -std::expm1(lt * static_cast<double>(c + 1)); });
      const double z = w.standard_error() > 0.0 ? (w.mean() - exact) / w.standard_error() : 0.0;
      const bool pass = ks_pvalue(ks_geo, sr.samples.size()) > 0.01 && std::abs(z) <= 3.0;
      all_pass = all_pass && pass;
      srows.push_back({{"k", k0},
                       {"scaled_mean", w.mean()},
                       {"scaled_mean_se", w.standard_error()},
                       {"scaled_mean_exact", exact},
                       {"limit", 1.0},
                       {"zscore", z},
                       {"ks_exponential", ks_exp},
                       {"ks_exponential_p", ks_pvalue(ks_exp, sr.samples.size())},
                       {"ks_geometric", ks_geo},
                       {"ks_geometric_p", ks_pvalue(ks_geo, sr.samples.size())},
                       {"verdict", pass ? "pass" : "fail"}});
    }
    Welford rest_mass;
    for (const Partition& p : sr.samples) {
      double c = static_cast<double>(p.mass());
      for (PartSize k0 : states) c -= static_cast<double>(k0 * p.multiplicity(k0));
      rest_mass.add(c);
    }
    const double analytic = expected_monomers(rest, mu).value;
    const double se = std::max(rest_mass.standard_error(), 1.0 / n);
    const bool rest_pass = std::abs(rest_mass.mean() - analytic) <= 3.0 * se;
    all_pass = all_pass && rest_pass;
    rows.push_back({{"mu", mu},
                    {"samples", sr.samples.size()},
                    {"truncation_index", sr.truncation_index},
                    {"states", srows},
                    {"noncondensate_mass",
                     {{"mean", rest_mass.mean()}, {"se", rest_mass.standard_error()}, {"analytic", analytic},
                      {"verdict", rest_pass ? "pass" : "fail"}}}});
  }
  return {{"report", "condensation"},
          {"epsilon_star", gs.epsilon_star},
          {"mu_star", gs.mu_star},
          {"condensate_states", states},
          {"runs", rows},
          {"verdict", all_pass ? "pass" : "fail"}};
}

json critical_process_report(const std::vector<double>& mu_sequence, std::uint64_t samples_per_mu,
                             const std::vector<Interval>& intervals, const LabRun& run) {
  if (intervals.empty()) throw DomainError("critical_process_report: no intervals");
  for (const Interval& iv : intervals)
    if (!(iv.lo > 0.0) || !(iv.hi > iv.lo))
      throw DomainError(fmt::format("critical_process_report: interval [{}, {}) must satisfy 0 < x < y", iv.lo, iv.hi));
  const EnergyModel full = EnergyModel::log(1.0);
  const EnergyModel model = full.excluding({1});
  const std::size_t m = intervals.size();

  json rows = json::array();
  bool all_pass = true;
  for (double mu : mu_sequence) {
    const SampleRun sr = quantum_run(model, mu, samples_per_mu, run);
    const std::uint64_t n = sr.samples.size();
    const double nn = static_cast<double>(n);
    std::vector<std::vector<double>> counts(m);
    json irows = json::array();
    for (std::size_t j = 0; j < m; ++j) {
      const std::uint64_t ka = first_index_at_or_above(intervals[j].lo, mu);
      const std::uint64_t kb = first_index_at_or_above(intervals[j].hi, mu);
      Welford w;
      std::vector<std::uint64_t> hist;
      for (const Partition& p : sr.samples) {
        const std::uint64_t c = parts_in(p, ka, kb);
        counts[j].push_back(static_cast<double>(c));
        w.add(static_cast<double>(c));
        if (hist.size() <= c) hist.resize(c + 1, 0);
        ++hist[c];
      }
      double exact_mean = 0.0, exact_var = 0.0;
      for (std::uint64_t k = std::max<std::uint64_t>(ka, 2); k < kb; ++k) {
        const double lt = log_theta(model, mu, k);
        const double one_minus = -std::expm1(lt);
        const double th = std::exp(lt);
        exact_mean += th / one_minus;
        exact_var += th / (one_minus * one_minus);
      }
      const double lambda = poisson_process_rate(intervals[j].lo, intervals[j].hi);
      std::vector<double> pmf(hist.size());
      double pk = std::exp(-lambda);
      for (std::size_t c = 0; c < pmf.size(); ++c) {
        pmf[c] = pk;
        pk *= lambda / static_cast<double>(c + 1);
      }
      const ChiSquareResult chi = chi_square_test(hist, pmf, n);
      const double mean_z = (w.mean() - lambda) / std::sqrt(lambda / nn);
      const double var_z = (w.variance() - lambda) / std::sqrt((lambda + 2.0 * lambda * lambda) / nn);
      const bool pass = std::abs(mean_z) <= 3.0 && std::abs(var_z) <= 3.0 && chi.p_value > 0.01 / static_cast<double>(m);
      all_pass = all_pass && pass;
      irows.push_back({{"interval", {intervals[j].lo, intervals[j].hi}},
                       {"k_range", {ka, kb}},
                       {"lambda", lambda},
                       {"exact_mean", exact_mean},
                       {"exact_variance", exact_var},
                       {"mean", w.mean()},
                       {"variance", w.variance()},
                       {"dispersion", w.mean() > 0.0 ? w.variance() / w.mean() : kNaN},
                       {"mean_zscore", mean_z},
                       {"variance_zscore", var_z},
                       {"chi_square", {{"statistic", chi.statistic}, {"dof", chi.dof}, {"p_value", chi.p_value},
                                        {"threshold", 0.01 / static_cast<double>(m)}}},
                       {"verdict", pass ? "pass" : "fail"}});
    }
    json corr = json::array();
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a + 1; b < m; ++b) {
        const bool disjoint = intervals[a].hi <= intervals[b].lo || intervals[b].hi <= intervals[a].lo;
        if (!disjoint) continue;
        const double r = pearson_correlation(counts[a], counts[b]);
        const bool pass = std::abs(r) <= 3.0 / std::sqrt(nn);
        all_pass = all_pass && pass;
        corr.push_back({{"pair", {a, b}}, {"correlation", r}, {"bound", 3.0 / std::sqrt(nn)},
                        {"verdict", pass ? "pass" : "fail"}});
      }
    const double lt1 = log_theta(full, mu, 1);
    rows.push_back({{"mu", mu},
                    {"samples", n},
                    {"truncation_index", sr.truncation_index},
                    {"intervals", irows},
                    {"correlations", corr},
                    {"atomic_component",
                     {{"k", 1}, {"energy", full.base_energy(1)}, {"expected_count", std::exp(lt1) / -std::expm1(lt1)},
                      {"note", "k = 1 excluded from the process; it contributes an atom at x = 0"}}}});
  }
  return {{"report", "critical_process"},
          {"model", "E_k = ln k, beta = 1, k = 1 excluded"},
          {"runs", rows},
          {"verdict", all_pass ? "pass" : "fail"}};
}

double bell_nu(double M) {
  if (!(M > 0.0) || !std::isfinite(M)) throw DomainError("bell_nu: M must be positive and finite");
  double lo = 0.0, hi = 1.0;
  while (hi * std::exp(hi) < M) hi *= 2.0;
  for (int i = 0; i < 2000; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (mid * std::exp(mid) >= M)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

json bell_step_report(const std::vector<double>& mass_targets, std::uint64_t samples_per_mass,
                      const std::vector<double>& points, const LabRun& run) {
  if (points.empty()) throw DomainError("bell_step_report: no evaluation points");
  std::vector<double> targets = mass_targets;
  std::sort(targets.begin(), targets.end());
  const EnergyModel model = EnergyModel::constant(0.0, 0.0);

  json rows = json::array();
  bool consistent = true;
  std::vector<std::vector<double>> gaps(points.size());
  for (double M : targets) {
    const double nu = bell_nu(M);
    const double mu = -std::log(nu);
    SamplerConfig cfg;
    cfg.model = model;
    cfg.mu = mu;
    cfg.ensemble = Ensemble::ClassicalGC;
    cfg.truncation_tol = run.truncation_tol;
    cfg.seed = run.seed;
    cfg.replicas = samples_per_mass;
    const SampleRun sr = sample(cfg, run.threads);
    const double scale = std::exp(-nu);
    Welford mass;
    for (const Partition& p : sr.samples) mass.add(static_cast<double>(p.mass()));
    json prow = json::array();
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double x = points[i];
      const std::uint64_t k0 = first_index_at_or_above(x, 1.0 / nu);
      Welford w;
      for (const Partition& p : sr.samples) w.add(scale * static_cast<double>(parts_from(p, k0)));
      // e^{-nu} sum_{k >= k0} nu^k / k! = P{Poisson(nu) >= k0}.
      const double expected = boost::math::gamma_p(static_cast<double>(k0), nu);
      const double z = w.standard_error() > 0.0 ? (w.mean() - expected) / w.standard_error() : 0.0;
      consistent = consistent && std::abs(z) <= bonferroni_z(points.size() * targets.size());
      const double step = x <= 1.0 ? 1.0 : 0.0;
      gaps[i].push_back(std::abs(w.mean() - step));
      prow.push_back({{"x", x},
                      {"mean", w.mean()},
                      {"se", w.standard_error()},
                      {"expected", expected},
                      {"zscore", z},
                      {"step", step},
                      {"gap", std::abs(w.mean() - step)}});
    }
    rows.push_back({{"M", M},
                    {"nu", nu},
                    {"mu", mu},
                    {"samples", sr.samples.size()},
                    {"truncation_index", sr.truncation_index},
                    {"mean_mass", mass.mean()},
                    {"mean_mass_se", mass.standard_error()},
                    {"points", prow}});
  }
  bool trend = true;
  for (const auto& g : gaps)
    for (std::size_t i = 1; i < g.size(); ++i) trend = trend && g[i] <= g[i - 1];
  return {{"report", "bell_step"},
          {"runs", rows},
          {"monte_carlo_consistent", consistent},
          {"gap_non_increasing", trend},
          {"verdict", consistent && trend ? "pass" : "fail"}};
}

}  // namespace gibbs
