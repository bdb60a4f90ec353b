#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gibbs/analytics.hpp"
#include "gibbs/energy_model.hpp"
#include "gibbs/partition.hpp"

namespace gibbs {

std::vector<double> geometric_grid(double lo, double hi, std::size_t n);
std::vector<double> linear_grid(double lo, double hi, std::size_t n);
/// Smallest x = 2^j with F(x) < threshold (F non-increasing).
double find_x_max(const std::function<double(double)>& F, double threshold = 1e-6);

inline constexpr std::size_t kDefaultGridPoints = 256;

/// F_mu(x; p) = f(x/mu; p) / (mu E Mon) of one sample, stored exactly: value
/// `values[i]` on (x[i-1], x[i]] with x[-1] = 0, and 0 beyond x.back().
struct ScaledCurve {
  std::vector<double> x;
  std::vector<double> values;
  double operator()(double at) const;
};

struct EmpiricalShape {
  EnergyModel model;
  double mu = 0.0;
  double expected_mass = 0.0;  // analytic E Mon, used in the scaling
  std::vector<double> grid;
  std::vector<double> mean_F;
  std::vector<double> var_F;
  std::uint64_t replicas = 0;
  double scale_width = 0.0;   // mu
  double scale_height = 0.0;  // 1 / (mu E Mon)
  double mean_mass = 0.0;     // sample mean of Mon
  std::vector<ScaledCurve> curves;
};

/// Throws DomainError for an empty sample set or an unsorted grid.
EmpiricalShape empirical_scaled_F(const std::vector<Partition>& samples, const EnergyModel& model, double mu,
                                  const std::vector<double>& grid);

/// sup_{x >= y} |curve(x) - F(x)| for a non-increasing continuous F, exact:
/// on every constant piece the largest gap sits at an end point.
double sup_deviation(const ScaledCurve& curve, const std::function<double(double)>& F, double y);

struct DeviationReport {
  double y = 0.0;
  double epsilon = 0.0;
  std::vector<double> sup_deviation;  // per replica
  double mean_sup = 0.0;
  double max_sup = 0.0;
  double empirical_exceed_prob = 0.0;
  double exceed_sigma = 0.0;     // binomial standard error
  double variance_at_y = 0.0;    // analytic Var F_mu(y)
  double kolmogorov_bound = 0.0; // 4 Var F_mu(y) / eps^2
  double bias = 0.0;             // max over grid points >= y of |E F_mu - F|
  bool bias_below_half_eps = false;
  double max_mean_zscore = 0.0;  // mean_F against analytic E F_mu
  double zscore_threshold = 0.0; // Bonferroni, p = 0.01 over the grid
  std::vector<double> expected_F; // analytic E F_mu on the grid
  bool verdict = false;          // exceed prob <= bound + 3 sigma
};

/// Throws DomainError if y <= 0 or the grid does not start at or below y.
DeviationReport deviation_report(const EmpiricalShape& shape, const std::function<double(double)>& F, double y,
                                 double epsilon);

nlohmann::json to_json(const DeviationReport& r, bool include_per_replica = false);

/// Rows "x,mean_F,var_F,F_analytic".
std::string shape_csv(const EmpiricalShape& shape, const std::function<double(double)>& F);

struct LabRun {
  std::uint64_t seed = 0;
  unsigned threads = 0;
  double truncation_tol = 1e-6;
};

/// Condensate statistics of an S2 model. mu values are measured from mu*.
nlohmann::json condensation_report(const EnergyModel& model, const std::vector<double>& mu_sequence,
                                   std::uint64_t samples_per_mu, const LabRun& run);

struct Interval {
  double lo;
  double hi;
};

/// Counts of parts in [x/mu, y/mu) for the critical model (E_k = ln k, beta = 1,
/// k = 1 excluded) against Poisson(E1(x) - E1(y)).
nlohmann::json critical_process_report(const std::vector<double>& mu_sequence, std::uint64_t samples_per_mu,
                                       const std::vector<Interval>& intervals, const LabRun& run);

/// nu with nu e^nu = M, by bisection.
double bell_nu(double M);

/// e^{-nu} f(nu x) under classical draws at beta = 0, mu = -ln nu.
nlohmann::json bell_step_report(const std::vector<double>& mass_targets, std::uint64_t samples_per_mass,
                                const std::vector<double>& points, const LabRun& run);

}  // namespace gibbs
