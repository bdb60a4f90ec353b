#include "gibbs/energy_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "gibbs/error.hpp"

namespace gibbs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLogLogFloor = std::log(std::log(3.0));

}  // namespace

double TailShape::at(std::uint64_t k) const {
  const double kk = static_cast<double>(k);
  switch (kind) {
    case EnergyKind::Decay:
      return c * std::pow(kk, -alpha);
    case EnergyKind::Constant:
      return c;
    case EnergyKind::LogLog:
      return k >= 3 ? std::log(std::log(kk)) : kLogLogFloor;
    case EnergyKind::Log:
      return c * std::log(kk);
    case EnergyKind::Power:
      return c * std::pow(kk, power);
  }
  return 0.0;
}

double TailShape::u(double t) const {
  switch (kind) {
    case EnergyKind::Decay:
      return c * std::exp(-alpha * t);
    case EnergyKind::Constant:
      return c;
    case EnergyKind::LogLog:
      return t >= std::log(3.0) ? std::log(t) : kLogLogFloor;
    case EnergyKind::Log:
      return c * t;
    case EnergyKind::Power:
      return c * std::exp(power * t);
  }
  return 0.0;
}

EnergyModel::EnergyModel(TailShape tail, std::vector<double> table, double beta)
    : tail_(tail), table_(std::move(table)), beta_(beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("beta must be finite and non-negative");
  for (double e : table_)
    if (!std::isfinite(e)) throw DomainError("energy table entries must be finite");
}

EnergyModel EnergyModel::decay(double alpha, double beta, double c) {
  if (!(alpha > 0.0)) throw DomainError("decay exponent alpha must be positive");
  return EnergyModel({EnergyKind::Decay, c, alpha, 1.0}, {}, beta);
}

EnergyModel EnergyModel::constant(double c, double beta) {
  return EnergyModel({EnergyKind::Constant, c, 1.0, 1.0}, {}, beta);
}

EnergyModel EnergyModel::loglog(double beta) {
  return EnergyModel({EnergyKind::LogLog, 1.0, 1.0, 1.0}, {kLogLogFloor, kLogLogFloor}, beta);
}

EnergyModel EnergyModel::log(double beta, std::optional<double> e1, double c) {
  return EnergyModel({EnergyKind::Log, c, 1.0, 1.0}, {e1.value_or(std::log(2.0))}, beta);
}

EnergyModel EnergyModel::power(double c, double p, double beta) {
  return EnergyModel({EnergyKind::Power, c, 1.0, p}, {}, beta);
}

EnergyModel EnergyModel::table(std::vector<double> values, TailShape tail, double beta) {
  return EnergyModel(tail, std::move(values), beta);
}

bool EnergyModel::is_excluded(PartSize k) const noexcept {
  return std::binary_search(excluded_.begin(), excluded_.end(), k);
}

EnergyModel EnergyModel::with_beta(double beta) const {
  EnergyModel m = *this;
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("beta must be finite and non-negative");
  m.beta_ = beta;
  return m;
}

EnergyModel EnergyModel::with_shift(double shift) const {
  EnergyModel m = *this;
  m.shift_ = shift;
  return m;
}

EnergyModel EnergyModel::excluding(std::vector<PartSize> states) const {
  EnergyModel m = *this;
  for (PartSize k : states) {
    if (k == 0) throw DomainError("excluded state must be >= 1");
    m.excluded_.push_back(k);
  }
  std::sort(m.excluded_.begin(), m.excluded_.end());
  m.excluded_.erase(std::unique(m.excluded_.begin(), m.excluded_.end()), m.excluded_.end());
  return m;
}

double EnergyModel::base_energy(PartSize k) const {
  if (k == 0) throw DomainError("energy: k must be >= 1");
  return k <= table_.size() ? table_[k - 1] : tail_.at(k);
}

double energy(const EnergyModel& model, PartSize k) {
  return model.base_energy(k) + model.shift() * static_cast<double>(k);
}

double energy_u(const EnergyModel& model, double t) {
  return model.tail().u(t) + model.shift() * std::exp(t);
}

namespace {

// lim_{k->inf} E_k / k of the tail form (shift excluded).
double tail_epsilon_limit(const TailShape& t) {
  if (t.kind != EnergyKind::Power || t.power < 1.0) return 0.0;
  if (t.power == 1.0) return t.c;
  return t.c > 0 ? kInf : (t.c < 0 ? -kInf : 0.0);
}

bool linear_tail(const TailShape& t) { return t.kind == EnergyKind::Power && t.power == 1.0; }

}  // namespace

GroundState ground_state(const EnergyModel& model) {
  GroundState gs;
  // Below the scan limit every tail form has already passed its finite
  // minimum of E_k / k (the forms are monotone in k beyond k = 3).
  const PartSize scan = model.table_values().size() + 64;
  double best = kInf;
  std::vector<std::pair<PartSize, double>> eps;
  eps.reserve(scan);
  for (PartSize k = 1; k <= scan; ++k) {
    if (model.is_excluded(k)) continue;
    const double e = energy(model, k) / static_cast<double>(k);
    eps.emplace_back(k, e);
    best = std::min(best, e);
  }
  const double at_infinity = tail_epsilon_limit(model.tail()) + model.shift();
  gs.epsilon_star = std::min(best, at_infinity);
  if (gs.epsilon_star == -kInf) {
    gs.epsilon_star = -kInf;
    gs.mu_star = kInf;
    gs.attained_at_infinity = true;
    gs.scenario = Scenario::S1;
    return gs;
  }
  const double slack = 1e-12 * std::max(1.0, std::abs(gs.epsilon_star));
  const bool linear = linear_tail(model.tail());
  for (const auto& [k, e] : eps) {
    if (e <= gs.epsilon_star + slack) {
      if (linear && k > model.table_values().size()) continue;  // reported via attained_on_whole_tail
      gs.attained_at.push_back(k);
    }
  }
  if (std::abs(at_infinity - gs.epsilon_star) <= slack) {
    if (linear)
      gs.attained_on_whole_tail = true;
    else
      gs.attained_at_infinity = true;
  }
  gs.mu_star = -model.beta() * gs.epsilon_star;
  if (gs.mu_star == 0.0) gs.mu_star = 0.0;  // no negative zero in reports
  gs.scenario = (gs.attained_at.empty() && !gs.attained_on_whole_tail) ? Scenario::S3 : Scenario::S2;
  return gs;
}

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::S1:
      return "S1";
    case Scenario::S2:
      return "S2";
    case Scenario::S3:
      return "S3";
  }
  return "?";
}

std::string to_string(GrowthClass g) {
  switch (g) {
    case GrowthClass::Decay:
      return "i";
    case GrowthClass::Constant:
      return "ii";
    case GrowthClass::Subcritical:
      return "iii";
    case GrowthClass::Critical:
      return "iv";
    case GrowthClass::Supercritical:
      return "supercritical";
    case GrowthClass::Undefined:
      return "undefined";
  }
  return "?";
}

RegimeTag classify_regime(const EnergyModel& model) {
  RegimeTag tag;
  const GroundState gs = ground_state(model);
  tag.scenario = gs.scenario;
  if (gs.scenario == Scenario::S1) {
    tag.note = "ground state is -infinity: grand canonical measures do not exist";
    return tag;
  }
  const TailShape& t = model.tail();
  const double beta = model.beta();
  if (beta == 0.0) {
    tag.growth = GrowthClass::Decay;
    tag.note = "beta=0: uniform measure, energies play no role";
  } else {
    switch (t.kind) {
      case EnergyKind::Decay:
        tag.growth = t.c > 0 ? GrowthClass::Decay : GrowthClass::Undefined;
        break;
      case EnergyKind::Constant:
        tag.growth = t.c > 0 ? GrowthClass::Constant : GrowthClass::Undefined;
        break;
      case EnergyKind::LogLog:
        tag.growth = GrowthClass::Subcritical;
        break;
      case EnergyKind::Log:
        if (t.c <= 0) {
          tag.growth = GrowthClass::Undefined;
        } else if (t.c != 1.0) {
          throw DomainError(fmt::format(
              "critical tail has slope lim u' = {}; enable slope rescaling (beta -> {} beta) explicitly",
              t.c, t.c));
        } else {
          tag.growth = GrowthClass::Critical;
        }
        break;
      case EnergyKind::Power:
        if (t.c <= 0)
          tag.growth = GrowthClass::Undefined;
        else if (t.power < 0)
          tag.growth = GrowthClass::Decay;
        else if (t.power == 0)
          tag.growth = GrowthClass::Constant;
        else
          tag.growth = GrowthClass::Supercritical;
        break;
    }
  }
  switch (tag.growth) {
    case GrowthClass::Decay:
    case GrowthClass::Constant:
    case GrowthClass::Subcritical:
      tag.thermo_limit = true;
      break;
    case GrowthClass::Critical:
      if (beta == 2.0) {
        tag.indeterminate = true;
        tag.note = "beta=2 on the critical row: behaviour depends on lower-order terms of E_k";
      }
      tag.thermo_limit = beta < 2.0;
      break;
    case GrowthClass::Supercritical:
      tag.thermo_limit = false;
      tag.note = "E Mon stays bounded as mu decreases: no thermodynamic limit";
      break;
    case GrowthClass::Undefined:
      break;
  }
  tag.rows_apply = gs.scenario == Scenario::S3 && tag.growth != GrowthClass::Supercritical &&
                   tag.growth != GrowthClass::Undefined;
  if (gs.scenario == Scenario::S2) {
    std::string states;
    for (PartSize k : gs.attained_at) states += (states.empty() ? "" : ",") + std::to_string(k);
    if (gs.attained_on_whole_tail) states += states.empty() ? "all tail states" : ",all tail states";
    tag.note = "condensation at k=" + states + (tag.note.empty() ? "" : "; " + tag.note);
  }
  return tag;
}

EnergyModel rescale_to_unit_slope(const EnergyModel& model) {
  const TailShape& t = model.tail();
  if (t.kind != EnergyKind::Log || !(t.c > 0.0))
    throw DomainError("slope rescaling applies to logarithmic tails with positive slope");
  std::vector<double> table = model.table_values();
  for (double& e : table) e /= t.c;
  TailShape unit = t;
  unit.c = 1.0;
  EnergyModel out = EnergyModel::table(std::move(table), unit, model.beta() * t.c)
                        .with_shift(model.shift() / t.c)
                        .excluding(model.excluded());
  return out;
}

Renormalized renormalize(const EnergyModel& model) {
  const GroundState gs = ground_state(model);
  if (!std::isfinite(gs.epsilon_star)) throw DomainError("renormalize: ground state energy is not finite");
  return {model.with_shift(model.shift() - gs.epsilon_star), model.beta() * gs.epsilon_star};
}

EnergyTailBound energy_tail_bound(const EnergyModel& model, PartSize K) {
  const TailShape& t = model.tail();
  const PartSize n = model.table_values().size();
  const PartSize first = std::max<PartSize>(K, n) + 1;
  EnergyTailBound b{0.0, 0.0};
  switch (t.kind) {
    case EnergyKind::Decay:
      b.level = t.c >= 0 ? 0.0 : t.at(first);
      break;
    case EnergyKind::Constant:
      b.level = t.c;
      break;
    case EnergyKind::LogLog:
      b.level = t.at(first);
      break;
    case EnergyKind::Log:
      if (t.c >= 0)
        b.level = t.at(first);
      else
        b.rate = t.c;  // c ln k >= c k
      break;
    case EnergyKind::Power:
      if (t.c >= 0) {
        if (t.power >= 1.0)
          b.rate = t.c;
        else if (t.power >= 0.0)
          b.level = t.at(first);
      } else {
        if (t.power <= 0.0)
          b.level = t.at(first);
        else if (t.power <= 1.0)
          b.rate = t.c;
        else
          b.level = -kInf;
      }
      break;
  }
  // Table entries beyond K that are not covered by the tail form.
  for (PartSize k = K + 1; k <= n; ++k)
    b.level = std::min(b.level, model.table_values()[k - 1] - b.rate * static_cast<double>(k));
  b.rate += model.shift();
  return b;
}

double log_theta(const EnergyModel& model, double mu, PartSize k) {
  if (k == 0) throw DomainError("theta: k must be >= 1");
  if (model.is_excluded(k)) return -kInf;
  // The shift is folded into the chemical potential so that renormalizing
  // (shift -> shift - eps*, mu -> mu + beta eps*) reproduces identical values.
  const double mu_eff = mu + model.beta() * model.shift();
  return -model.beta() * model.base_energy(k) - mu_eff * static_cast<double>(k);
}

double theta(const EnergyModel& model, double mu, PartSize k) {
  const double lt = log_theta(model, mu, k);
  if (lt >= 0.0)
    throw DomainError(fmt::format("theta_{} = exp({}) >= 1: mu = {} does not exceed mu*", k, lt, mu));
  return std::exp(lt);
}

double log_alpha(const EnergyModel& model, double mu, PartSize k) {
  return log_theta(model, mu, k) - std::lgamma(static_cast<double>(k) + 1.0);
}

double alpha(const EnergyModel& model, double mu, PartSize k) { return std::exp(log_alpha(model, mu, k)); }

}  // namespace gibbs
