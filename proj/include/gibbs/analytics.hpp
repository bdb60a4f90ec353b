#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include <json.hpp>

#include "gibbs/energy_model.hpp"

namespace gibbs {

/// A truncated infinite series with a certificate: the exact value lies
/// within `tail_bound` of `value`, and `tail_bound <= requested_tol`.
struct TruncatedSeriesValue {
  double value = 0.0;
  std::uint64_t truncation_index = 1;  // K: terms k <= K were summed
  double tail_bound = 0.0;
  double requested_tol = 0.0;
};

nlohmann::json to_json(const TruncatedSeriesValue& v);

inline constexpr double kDefaultSeriesTol = 1e-10;

/// Smallest integer k with k >= x / mu, tolerant to round-off in the ratio.
std::uint64_t first_index_at_or_above(double x, double mu);

/// ln Xi = -sum_k ln(1 - theta_k). Throws NonConvergent unless mu > mu*.
TruncatedSeriesValue grand_potential_log(const EnergyModel& model, double mu, double tol = kDefaultSeriesTol);

/// E Mon = sum_k k / (e^{beta E_k + mu k} - 1).
TruncatedSeriesValue expected_monomers(const EnergyModel& model, double mu, double tol = kDefaultSeriesTol);

/// sum_{k >= k0} E p_k, the expected number of parts of size at least k0.
TruncatedSeriesValue expected_parts_from(const EnergyModel& model, double mu, std::uint64_t k0,
                                         double tol = kDefaultSeriesTol);

/// E F_mu(x) = sum_{k >= x/mu} E p_k / (mu E Mon).
TruncatedSeriesValue expected_F(const EnergyModel& model, double mu, double x, double tol = kDefaultSeriesTol);

/// Var F_mu(x) = sum_{k >= x/mu} theta_k/(1-theta_k)^2 / (mu E Mon)^2.
TruncatedSeriesValue variance_F(const EnergyModel& model, double mu, double x, double tol = kDefaultSeriesTol);

/// mu^2 e^{beta u(-ln mu)} E Mon, whose mu -> 0 limit is the lambda constant
/// of the model's growth row.
double scaled_expected_monomers(const EnergyModel& model, double mu, double tol = kDefaultSeriesTol);

/// Z_M = sum over partitions of M of exp(-beta H), by enumeration.
double canonical_sum(const EnergyModel& model, std::uint64_t M, std::uint64_t cap = kDefaultEnumerationCap);

struct GeneratingFunctionCheck {
  TruncatedSeriesValue log_xi;
  double partial_sum = 0.0;     // sum_{M <= M_max} Z_M e^{-mu M}
  double remainder_bound = 0.0; // certified bound on sum_{M > M_max} Z_M e^{-mu M}
  double log_gap = 0.0;         // ln Xi - ln partial_sum
  double allowed = 0.0;         // ln(1 + remainder/partial) + truncation bound of ln Xi
  bool pass = false;
};

/// Compares the product formula for Xi with the canonical generating series,
/// bounding the omitted canonical terms by Z_M <= Q_M e^{mu* M}.
GeneratingFunctionCheck check_generating_function(const EnergyModel& model, double mu, std::uint64_t M_max = 20);

/// Row of the limit-shape classification, keyed by growth class.
enum class ShapeStatus { Available, NoLimitShape, NoThermodynamicLimit, Indeterminate };
std::string to_string(ShapeStatus s);

/// Closed-form limit shape F with its Young-diagram cell scalings.
struct LimitShape {
  GrowthClass regime = GrowthClass::Undefined;
  double beta = 0.0;
  double lambda = 0.0;              // int_0^inf x Phi(x) dx
  std::string family;               // "classical", "dilog", "exponential", "incomplete_gamma"
  std::function<double(double)> F;        // limit shape, x > 0
  std::function<double(double)> density;  // -F'(x)
  std::function<double(double)> cell_height;  // as a function of mu
  double cell_width(double mu) const { return mu; }
};

struct LimitShapeResult {
  ShapeStatus status = ShapeStatus::Available;
  std::optional<LimitShape> shape;
  std::string reason;
};

LimitShapeResult limit_shape(const EnergyModel& model);

/// Phi(x) of the growth row (formal expression, also outside the range where
/// a limit shape exists) and lambda = int x Phi.
double phi_function(GrowthClass regime, double beta, double x);
double lambda_constant(GrowthClass regime, double beta);

/// (1/lambda) int_x^inf Phi(y) dy, evaluated in closed form. For the critical
/// row with beta >= 1 this is the formal curve; it exists for x > 0 when beta < 2.
double formal_shape(GrowthClass regime, double beta, double x);

/// -(sqrt 6 / pi) ln(1 - e^{-pi x / sqrt 6}), the uniform-measure shape in
/// sqrt(M) coordinates.
double classical_shape(double x);

/// mu with |E Mon(mu) - M_target| <= tol M_target, by bisection.
double mu_for_target_mass(const EnergyModel& model, double M_target, double tol = 1e-6);

}  // namespace gibbs
