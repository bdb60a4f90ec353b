#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gibbs/partition.hpp"

namespace gibbs {

/// Functional form of the internal energies E_k for large k.
enum class EnergyKind {
  Decay,     // E_k = c k^{-alpha}
  Constant,  // E_k = c
  LogLog,    // E_k = ln ln k (k >= 3)
  Log,       // E_k = c ln k
  Power,     // E_k = c k^{p}; used for super-logarithmic and linear tails
};

struct TailShape {
  EnergyKind kind = EnergyKind::Constant;
  double c = 1.0;
  double alpha = 1.0;  // Decay exponent
  double power = 1.0;  // Power exponent

  /// Energy of the tail form at integer k >= 1.
  double at(std::uint64_t k) const;
  /// u(t) with E_k = u(ln k), continuous argument.
  double u(double t) const;

  friend bool operator==(const TailShape&, const TailShape&) = default;
};

/// Internal energies E_k of a polymer of size k together with the inverse
/// temperature. The first entries may be pinned explicitly (`table`), all
/// further k follow `tail`. A linear term `shift * k` is added to every E_k,
/// and states listed in `excluded` are removed from the system (p_k = 0).
class EnergyModel {
 public:
  EnergyModel() = default;
  EnergyModel(TailShape tail, std::vector<double> table, double beta);

  static EnergyModel decay(double alpha, double beta, double c = 1.0);
  static EnergyModel constant(double c, double beta);
  /// ln ln k for k >= 3; E_1 = E_2 = ln ln 3.
  static EnergyModel loglog(double beta);
  /// c ln k; E_1 = ln 2 unless `e1` is given (0 selects the condensation variant).
  static EnergyModel log(double beta, std::optional<double> e1 = std::nullopt, double c = 1.0);
  static EnergyModel power(double c, double p, double beta);
  static EnergyModel table(std::vector<double> values, TailShape tail, double beta);

  const TailShape& tail() const noexcept { return tail_; }
  const std::vector<double>& table_values() const noexcept { return table_; }
  double beta() const noexcept { return beta_; }
  double shift() const noexcept { return shift_; }
  const std::vector<PartSize>& excluded() const noexcept { return excluded_; }
  bool is_excluded(PartSize k) const noexcept;

  EnergyModel with_beta(double beta) const;
  EnergyModel with_shift(double shift) const;
  EnergyModel excluding(std::vector<PartSize> states) const;

  /// E_k without the linear shift.
  double base_energy(PartSize k) const;

  friend bool operator==(const EnergyModel&, const EnergyModel&) = default;

 private:
  TailShape tail_;
  std::vector<double> table_;
  double shift_ = 0.0;
  std::vector<PartSize> excluded_;
  double beta_ = 1.0;
};

/// E_k, including the linear shift. Throws DomainError for k = 0.
double energy(const EnergyModel& model, PartSize k);
/// u(t) such that E_k = u(ln k) asymptotically (tail form plus shift e^t).
double energy_u(const EnergyModel& model, double t);

enum class Scenario { S1, S2, S3 };

struct GroundState {
  double epsilon_star = 0.0;  // inf_k E_k / k; -inf in scenario S1
  double mu_star = 0.0;       // -beta * epsilon_star
  std::vector<PartSize> attained_at;  // finite k attaining the infimum
  bool attained_on_whole_tail = false;  // E_k = k eps* for every tail k
  bool attained_at_infinity = false;
  Scenario scenario = Scenario::S3;
};

GroundState ground_state(const EnergyModel& model);

/// Rows of the asymptotic classification by (lim u, lim u').
enum class GrowthClass { Decay, Constant, Subcritical, Critical, Supercritical, Undefined };

struct RegimeTag {
  Scenario scenario = Scenario::S3;
  GrowthClass growth = GrowthClass::Undefined;
  bool rows_apply = false;      // the model is S3, so the Table rows describe it
  bool thermo_limit = false;    // E Mon -> infinity as mu -> mu*
  bool indeterminate = false;   // borderline beta (critical row, beta = 2)
  std::string note;
};

/// Classification is declared by the tail kind, not inferred from values.
/// Throws DomainError when the critical slope differs from 1 and the model was
/// not rescaled with `rescale_to_unit_slope`.
RegimeTag classify_regime(const EnergyModel& model);

std::string to_string(Scenario s);
/// "i".."iv", "supercritical", "undefined".
std::string to_string(GrowthClass g);

/// For a Log tail c ln k with c > 0: E_k -> E_k / c and beta -> c beta, which
/// leaves every theta_k unchanged.
EnergyModel rescale_to_unit_slope(const EnergyModel& model);

struct Renormalized {
  EnergyModel model;  // energies E_k - eps* k
  double mu_offset;   // add to mu: beta * eps*
};
/// Shifts eps* to zero. Requires a finite ground state.
Renormalized renormalize(const EnergyModel& model);

/// Lower bound E_k >= level + rate * k for all k > K (shift included in rate).
struct EnergyTailBound {
  double level;
  double rate;
};
EnergyTailBound energy_tail_bound(const EnergyModel& model, PartSize K);

/// ln theta_k = -beta E_k - mu k; -inf for excluded states.
double log_theta(const EnergyModel& model, double mu, PartSize k);
/// theta_k = exp(-beta E_k - mu k). Throws DomainError if theta_k >= 1.
double theta(const EnergyModel& model, double mu, PartSize k);
/// ln alpha_k = -beta E_k - mu k - ln k!.
double log_alpha(const EnergyModel& model, double mu, PartSize k);
double alpha(const EnergyModel& model, double mu, PartSize k);

}  // namespace gibbs
