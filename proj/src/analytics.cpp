#include "gibbs/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "gibbs/error.hpp"
#include "gibbs/special_functions.hpp"

namespace gibbs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDropBelow = 1e-300;
constexpr std::uint64_t kMaxTerms = std::uint64_t{1} << 36;

// Neumaier's variant of compensated summation.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

enum class Term { LogXi, Count, Mass, Variance };

struct RawSeries {
  double sum = 0.0;
  std::uint64_t K = 0;
  double tail = 0.0;
};

double term_value(Term term, double log_th, std::uint64_t k) {
  if (log_th == -kInf) return 0.0;
  const double x = -log_th;  // beta E_k + mu k > 0
  switch (term) {
    case Term::LogXi:
      return -std::log(-std::expm1(log_th));
    case Term::Count:
      return 1.0 / std::expm1(x);
    case Term::Mass:
      return static_cast<double>(k) / std::expm1(x);
    case Term::Variance: {
      const double n = 1.0 / std::expm1(x);
      return n * (1.0 + n);
    }
  }
  return 0.0;
}

// Certified bound on sum_{k >= n} term_k using theta_k <= B q^k.
double tail_bound(const EnergyModel& model, double mu, Term term, std::uint64_t K, std::uint64_t n) {
  const EnergyTailBound eb = energy_tail_bound(model, K);
  if (eb.level == -kInf) return kInf;
  const double beta = model.beta();
  const double delta = mu + beta * eb.rate;
  if (!(delta > 0.0)) return kInf;
  const double log_B = -beta * eb.level;
  const double nn = static_cast<double>(n);
  const double log_first = log_B - delta * nn;  // ln(B q^n)
  if (log_first >= 0.0) return kInf;
  const double one_minus_q = -std::expm1(-delta);
  const double first = std::exp(log_first);
  const double shrink = -std::expm1(log_first);  // 1 - B q^n
  switch (term) {
    case Term::LogXi:
    case Term::Count:
      return first / (one_minus_q * shrink);
    case Term::Mass:
      return first * (nn * one_minus_q + std::exp(-delta)) / (one_minus_q * one_minus_q * shrink);
    case Term::Variance:
      return first / (one_minus_q * shrink * shrink);
  }
  return kInf;
}

void require_convergent(const EnergyModel& model, double mu, const GroundState& gs) {
  if (gs.scenario == Scenario::S1)
    throw NonConvergent("series diverge: ground state energy is -infinity (no grand canonical measure)");
  if (!(mu > gs.mu_star))
    throw NonConvergent(fmt::format("series diverge: mu = {} must exceed mu* = {}", mu, gs.mu_star));
  (void)model;
}

RawSeries sum_series(const EnergyModel& model, double mu, std::uint64_t k0, Term term, double tol) {
  if (!(tol > 0.0)) throw DomainError("series tolerance must be positive");
  const GroundState gs = ground_state(model);
  require_convergent(model, mu, gs);
  const double delta0 = mu - gs.mu_star;
  const double log_inv_delta = std::max(0.0, std::log(1.0 / delta0));
  const double initial = std::ceil(std::max(2.0 / delta0, (std::log(1.0 / tol) + 2.0 * log_inv_delta) / delta0));
  std::uint64_t K = static_cast<std::uint64_t>(std::clamp(initial, 1.0, static_cast<double>(kMaxTerms)));
  k0 = std::max<std::uint64_t>(k0, 1);

  CompensatedSum acc;
  std::uint64_t next = k0;
  for (;;) {
    for (; next <= K; ++next) {
      const double t = term_value(term, log_theta(model, mu, next), next);
      if (t > kDropBelow) acc.add(t);
    }
    const double tail = tail_bound(model, mu, term, K, std::max(K + 1, k0));
    if (tail <= tol) return {acc.value(), K, tail};
    if (K >= kMaxTerms)
      throw NonConvergent(fmt::format("series did not reach tolerance {} within {} terms", tol, K));
    K = std::min(2 * K, kMaxTerms);
  }
}

TruncatedSeriesValue make_value(const RawSeries& r, double tol) { return {r.sum, std::max<std::uint64_t>(r.K, 1), r.tail, tol}; }

void check_x(double x) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError(fmt::format("x = {} must be finite and non-negative", x));
}

void reject_divergent_origin(const EnergyModel& model, double x) {
  if (x > 0.0) return;
  RegimeTag tag;
  try {
    tag = classify_regime(model);
  } catch (const Error&) {
    return;
  }
  if (tag.growth == GrowthClass::Decay || (tag.growth == GrowthClass::Critical && model.beta() >= 1.0))
    throw NonConvergent("F_mu(0) diverges as mu -> 0 for this growth row; use x > 0");
}

}  // namespace

nlohmann::json to_json(const TruncatedSeriesValue& v) {
  return {{"value", v.value}, {"K", v.truncation_index}, {"tail_bound", v.tail_bound}, {"tol", v.requested_tol}};
}

std::uint64_t first_index_at_or_above(double x, double mu) {
  if (!(mu > 0.0)) throw DomainError("first_index_at_or_above: mu must be positive");
  const double r = x / mu;
  if (r <= 1.0) return 1;
  const double nearest = std::nearbyint(r);
  const double k = std::abs(r - nearest) <= 1e-9 * r ? nearest : std::ceil(r);
  if (k >= 1.8e19) throw DomainError("first_index_at_or_above: index overflows");
  return static_cast<std::uint64_t>(k);
}

TruncatedSeriesValue grand_potential_log(const EnergyModel& model, double mu, double tol) {
  return make_value(sum_series(model, mu, 1, Term::LogXi, tol), tol);
}

TruncatedSeriesValue expected_monomers(const EnergyModel& model, double mu, double tol) {
  return make_value(sum_series(model, mu, 1, Term::Mass, tol), tol);
}

TruncatedSeriesValue expected_parts_from(const EnergyModel& model, double mu, std::uint64_t k0, double tol) {
  return make_value(sum_series(model, mu, k0, Term::Count, tol), tol);
}

TruncatedSeriesValue expected_F(const EnergyModel& model, double mu, double x, double tol) {
  check_x(x);
  reject_divergent_origin(model, x);
  const std::uint64_t k0 = first_index_at_or_above(x, mu);
  double sub = tol;
  for (int iter = 0; iter < 12; ++iter) {
    const RawSeries mass = sum_series(model, mu, 1, Term::Mass, sub);
    const RawSeries count = sum_series(model, mu, k0, Term::Count, sub);
    if (!(mass.sum > 0.0)) throw NonConvergent("expected_F: E Mon vanishes");
    const double denom = mu * mass.sum;
    const double bound = (count.tail + count.sum * mass.tail / mass.sum) / denom;
    if (bound <= tol) return {count.sum / denom, std::max(mass.K, count.K), bound, tol};
    sub *= std::min(0.1, 0.5 * tol / bound);
  }
  throw NonConvergent("expected_F: tolerance not reached");
}

TruncatedSeriesValue variance_F(const EnergyModel& model, double mu, double x, double tol) {
  check_x(x);
  reject_divergent_origin(model, x);
  const std::uint64_t k0 = first_index_at_or_above(x, mu);
  double sub = tol;
  for (int iter = 0; iter < 12; ++iter) {
    const RawSeries mass = sum_series(model, mu, 1, Term::Mass, sub);
    const RawSeries var = sum_series(model, mu, k0, Term::Variance, sub);
    if (!(mass.sum > 0.0)) throw NonConvergent("variance_F: E Mon vanishes");
    const double denom = (mu * mass.sum) * (mu * mass.sum);
    const double bound = (var.tail + 2.0 * var.sum * mass.tail / mass.sum) / denom;
    if (bound <= tol) return {var.sum / denom, std::max(mass.K, var.K), bound, tol};
    sub *= std::min(0.1, 0.5 * tol / bound);
  }
  throw NonConvergent("variance_F: tolerance not reached");
}

double scaled_expected_monomers(const EnergyModel& model, double mu, double tol) {
  const double em = expected_monomers(model, mu, tol).value;
  return mu * mu * std::exp(model.beta() * energy_u(model, -std::log(mu))) * em;
}

double canonical_sum(const EnergyModel& model, std::uint64_t M, std::uint64_t cap) {
  CompensatedSum z;
  const double beta = model.beta();
  for_each_partition(
      M,
      [&](const Partition& p) {
        double h = 0.0;
        for (const auto& [k, n] : p.entries()) {
          if (model.is_excluded(k)) return;
          h += energy(model, k) * static_cast<double>(n);
        }
        z.add(std::exp(-beta * h));
      },
      cap);
  return z.value();
}

GeneratingFunctionCheck check_generating_function(const EnergyModel& model, double mu, std::uint64_t M_max) {
  const GroundState gs = ground_state(model);
  require_convergent(model, mu, gs);
  const double delta = mu - gs.mu_star;

  GeneratingFunctionCheck out;
  out.log_xi = grand_potential_log(model, mu, 1e-14);

  CompensatedSum partial;
  for (std::uint64_t M = 0; M <= M_max; ++M)
    partial.add(canonical_sum(model, M) * std::exp(-mu * static_cast<double>(M)));
  out.partial_sum = partial.value();

  // Z_M e^{-mu M} <= Q_M e^{-delta M}. Exact Q_M up to N-1, then
  // Q_M < exp(pi sqrt(2M/3)) with a geometric majorant once the exponent
  // g(M) = pi sqrt(2M/3) - delta M has slope below -delta/2.
  const double n_slope = 4.0 * std::numbers::pi * std::numbers::pi / (6.0 * delta * delta);
  const std::uint64_t N = std::max<std::uint64_t>(M_max + 1, static_cast<std::uint64_t>(std::ceil(n_slope)) + 1);
  if (N > 20000) throw DomainError("check_generating_function: mu too close to mu* for the remainder certificate");
  const std::vector<BigInt> q = partition_numbers(N);
  CompensatedSum remainder;
  for (std::uint64_t M = M_max + 1; M < N; ++M)
    remainder.add(std::exp(log_big(q[M]) - delta * static_cast<double>(M)));
  const double nd = static_cast<double>(N);
  const double g = std::numbers::pi * std::sqrt(2.0 * nd / 3.0) - delta * nd;
  const double slope = std::numbers::pi / std::sqrt(6.0 * nd) - delta;
  remainder.add(std::exp(g) / (-std::expm1(slope)));
  out.remainder_bound = remainder.value();

  out.log_gap = out.log_xi.value - std::log(out.partial_sum);
  const double rounding = 1e-13 * std::max(1.0, std::abs(out.log_xi.value));
  out.allowed = std::log1p(out.remainder_bound / out.partial_sum) + out.log_xi.tail_bound + rounding;
  out.pass = out.log_gap >= -(out.log_xi.tail_bound + rounding) && out.log_gap <= out.allowed;
  return out;
}

std::string to_string(ShapeStatus s) {
  switch (s) {
    case ShapeStatus::Available:
      return "available";
    case ShapeStatus::NoLimitShape:
      return "none";
    case ShapeStatus::NoThermodynamicLimit:
      return "no_thermodynamic_limit";
    case ShapeStatus::Indeterminate:
      return "indeterminate";
  }
  return "?";
}

double phi_function(GrowthClass regime, double beta, double x) {
  switch (regime) {
    case GrowthClass::Decay:
      return 1.0 / std::expm1(x);
    case GrowthClass::Constant:
      return 1.0 / (std::exp(x) - std::exp(-beta));
    case GrowthClass::Subcritical:
      return std::exp(-x);
    case GrowthClass::Critical:
      return std::pow(x, -beta) * std::exp(-x);
    default:
      throw DomainError("phi_function: no Phi for regime " + to_string(regime));
  }
}

double lambda_constant(GrowthClass regime, double beta) {
  switch (regime) {
    case GrowthClass::Decay:
      return std::numbers::pi * std::numbers::pi / 6.0;
    case GrowthClass::Constant:
      return std::exp(beta) * dilog(std::exp(-beta));
    case GrowthClass::Subcritical:
      return 1.0;
    case GrowthClass::Critical:
      if (!(beta < 2.0)) throw DomainError("lambda_constant: critical row needs beta < 2");
      return std::tgamma(2.0 - beta);
    default:
      throw DomainError("lambda_constant: no lambda for regime " + to_string(regime));
  }
}

double formal_shape(GrowthClass regime, double beta, double x) {
  if (!(x >= 0.0)) throw DomainError("formal_shape: x must be non-negative");
  switch (regime) {
    case GrowthClass::Decay:
      return -std::log(-std::expm1(-x)) / lambda_constant(regime, beta);
    case GrowthClass::Constant:
      return -std::log(-std::expm1(-beta - x)) / dilog(std::exp(-beta));
    case GrowthClass::Subcritical:
      return std::exp(-x);
    case GrowthClass::Critical:
      if (x == 0.0) {
        if (beta < 1.0) return 1.0 / (1.0 - beta);
        return kInf;
      }
      return upper_incomplete_gamma(1.0 - beta, x) / lambda_constant(regime, beta);
    default:
      throw DomainError("formal_shape: no shape for regime " + to_string(regime));
  }
}

double classical_shape(double x) {
  const double c = std::numbers::pi / std::sqrt(6.0);
  return -std::log(-std::expm1(-c * x)) / c;
}

LimitShapeResult limit_shape(const EnergyModel& model) {
  const RegimeTag tag = classify_regime(model);
  LimitShapeResult out;
  if (tag.scenario == Scenario::S1) {
    out.status = ShapeStatus::NoThermodynamicLimit;
    out.reason = "ground state is -infinity";
    return out;
  }
  if (tag.scenario == Scenario::S2) {
    out.status = ShapeStatus::NoLimitShape;
    out.reason = "condensation: " + tag.note;
    return out;
  }
  const double beta = model.beta();
  switch (tag.growth) {
    case GrowthClass::Supercritical:
      out.status = ShapeStatus::NoThermodynamicLimit;
      out.reason = "E Mon is bounded";
      return out;
    case GrowthClass::Undefined:
      out.status = ShapeStatus::NoLimitShape;
      out.reason = "energies outside the classified growth rows";
      return out;
    case GrowthClass::Critical:
      if (beta == 1.0) {
        out.status = ShapeStatus::Indeterminate;
        out.reason = "beta=1: scaled distributions stay random (Poisson process limit)";
        return out;
      }
      if (beta > 1.0) {
        out.status = ShapeStatus::NoLimitShape;
        out.reason = "beta>1";
        return out;
      }
      break;
    default:
      break;
  }

  LimitShape s;
  s.regime = tag.growth;
  s.beta = beta;
  s.lambda = lambda_constant(tag.growth, beta);
  const double lambda = s.lambda;
  switch (tag.growth) {
    case GrowthClass::Decay:
      s.family = "classical";
      s.F = [lambda](double x) { return -std::log(-std::expm1(-x)) / lambda; };
      s.density = [lambda](double x) { return 1.0 / (lambda * std::expm1(x)); };
      s.cell_height = [lambda](double mu) { return mu / lambda; };
      break;
    case GrowthClass::Constant: {
      s.family = "dilog";
      const double li = dilog(std::exp(-beta));
      s.F = [li, beta](double x) { return -std::log(-std::expm1(-beta - x)) / li; };
      s.density = [li, beta](double x) { return 1.0 / (li * std::expm1(beta + x)); };
      s.cell_height = [lambda](double mu) { return mu / lambda; };
      break;
    }
    case GrowthClass::Subcritical:
      s.family = "exponential";
      s.F = [](double x) { return std::exp(-x); };
      s.density = [](double x) { return std::exp(-x); };
      s.cell_height = [model, beta](double mu) { return mu * std::exp(beta * energy_u(model, -std::log(mu))); };
      break;
    case GrowthClass::Critical:
      s.family = "incomplete_gamma";
      s.F = [beta](double x) { return formal_shape(GrowthClass::Critical, beta, x); };
      s.density = [beta, lambda](double x) { return std::pow(x, -beta) * std::exp(-x) / lambda; };
      s.cell_height = [beta, lambda](double mu) { return std::pow(mu, 1.0 - beta) / lambda; };
      break;
    default:
      break;
  }
  out.shape = std::move(s);
  return out;
}

double mu_for_target_mass(const EnergyModel& model, double M_target, double tol) {
  if (!(M_target > 0.0) || !std::isfinite(M_target))
    throw Unreachable(fmt::format("mu_for_target_mass: target mass {} is not reachable", M_target));
  if (!(tol > 0.0)) throw DomainError("mu_for_target_mass: tol must be positive");
  const GroundState gs = ground_state(model);
  if (gs.scenario == Scenario::S1) throw Unreachable("mu_for_target_mass: no grand canonical measure");
  const double series_tol = std::max(1e-12, 1e-3 * tol * M_target);
  auto mass_at = [&](double delta) { return expected_monomers(model, gs.mu_star + delta, series_tol).value; };

  double hi = 1.0;
  while (mass_at(hi) > M_target) {
    hi *= 2.0;
    if (hi > 1e3) throw Unreachable("mu_for_target_mass: target below the reachable mass range");
  }
  double lo = hi;
  while (mass_at(lo) < M_target) {
    lo *= 0.5;
    if (lo < 1e-6)
      throw Unreachable(fmt::format("mu_for_target_mass: E Mon stays below {} (no thermodynamic limit?)", M_target));
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = std::sqrt(lo * hi);
    const double m = mass_at(mid);
    if (std::abs(m - M_target) <= tol * M_target) return gs.mu_star + mid;
    if (m > M_target)
      lo = mid;
    else
      hi = mid;
  }
  throw NonConvergent("mu_for_target_mass: bisection did not converge");
}

}  // namespace gibbs
