#include "gibbs/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <istream>
#include <limits>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "gibbs/analytics.hpp"
#include "gibbs/config.hpp"
#include "gibbs/error.hpp"
#include "gibbs/rng.hpp"

namespace gibbs {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kBlock = 64;
constexpr double kDenseThreshold = 0.25;
constexpr std::uint64_t kMaxTruncation = std::uint64_t{1} << 36;
// Canonical rejection draws use their own key so they never share a stream
// with a plain grand-canonical run of the same seed.
constexpr std::uint64_t kRejectionKey = 0xD1B54A32D192ED03ULL;

void require_above_mu_star(const EnergyModel& model, double mu) {
  const GroundState gs = ground_state(model);
  if (!(mu > gs.mu_star))
    throw DomainError(fmt::format("quantum ensemble requires mu > mu* = {}, got mu = {}", gs.mu_star, mu));
}

// Upper bound on sum_{k>K} theta_k from theta_k <= e^{-beta level} q^k.
double quantum_tail_bound(const EnergyModel& model, double mu, std::uint64_t K) {
  const EnergyTailBound eb = energy_tail_bound(model, K);
  const double beta = model.beta();
  const double log_q = -(mu + beta * eb.rate);
  if (!(log_q < 0.0)) return kInf;
  const double log_b = beta == 0.0 ? 0.0 : -beta * eb.level;
  if (std::isnan(log_b) || log_b == kInf) return kInf;
  return std::exp(log_b + log_q * static_cast<double>(K + 1)) / -std::expm1(log_q);
}

// Upper bound on sum_{k>K} alpha_k from alpha_k <= e^{-beta level} t^k / k!.
double classical_tail_bound(const EnergyModel& model, double mu, std::uint64_t K) {
  const EnergyTailBound eb = energy_tail_bound(model, K);
  const double beta = model.beta();
  const double log_t = -(mu + beta * eb.rate);
  const double log_b = beta == 0.0 ? 0.0 : -beta * eb.level;
  if (std::isnan(log_b) || log_b == kInf) return kInf;
  const double ratio = std::exp(log_t) / static_cast<double>(K + 2);
  if (!(ratio < 1.0)) return kInf;
  const double kk = static_cast<double>(K + 1);
  return std::exp(log_b + kk * log_t - std::lgamma(kk + 1.0)) / (1.0 - ratio);
}

std::uint64_t refine_downward(std::uint64_t K_big, double tail, double tol,
                              const std::function<double(std::uint64_t)>& term) {
  std::uint64_t K = K_big;
  double sum = tail;
  while (K > 1) {
    const double next = sum + term(K);
    if (next > tol) break;
    sum = next;
    --K;
  }
  return K;
}

struct BlockLayout {
  std::vector<double> q;
  std::vector<double> log1m_q;
};

// Candidate offsets within a sparse block: geometric skips at rate q.
template <class Visit>
void sparse_block(CounterStream& rng, double log1m_q, Visit&& visit) {
  std::uint64_t pos = 0;
  for (;;) {
    const double skip = std::floor(std::log(rng.uniform()) / log1m_q);
    if (!(skip < static_cast<double>(kBlock - pos))) return;
    pos += static_cast<std::uint64_t>(skip);
    if (!visit(pos)) return;
    if (++pos >= kBlock) return;
  }
}

std::uint64_t padded(std::uint64_t K) { return (K + kBlock - 1) / kBlock * kBlock; }

}  // namespace

std::string to_string(Ensemble e) {
  switch (e) {
    case Ensemble::QuantumGC: return "quantum";
    case Ensemble::ClassicalGC: return "classical";
    case Ensemble::Canonical: return "canonical";
  }
  return "?";
}

Ensemble ensemble_from_string(const std::string& s) {
  if (s == "quantum") return Ensemble::QuantumGC;
  if (s == "classical") return Ensemble::ClassicalGC;
  if (s == "canonical") return Ensemble::Canonical;
  throw ConfigError(fmt::format("ensemble: unknown value '{}' (quantum|classical|canonical)", s));
}

std::string to_string(CanonicalStrategy s) {
  switch (s) {
    case CanonicalStrategy::Auto: return "auto";
    case CanonicalStrategy::Enumeration: return "enumeration";
    case CanonicalStrategy::Rejection: return "rejection";
  }
  return "?";
}

CanonicalStrategy strategy_from_string(const std::string& s) {
  if (s == "auto") return CanonicalStrategy::Auto;
  if (s == "enumeration") return CanonicalStrategy::Enumeration;
  if (s == "rejection") return CanonicalStrategy::Rejection;
  throw ConfigError(fmt::format("strategy: unknown value '{}' (auto|enumeration|rejection)", s));
}

void validate(const SamplerConfig& c) {
  if (!(c.truncation_tol > 0.0)) throw DomainError("truncation_tol must be positive");
  if (c.replicas < 1) throw DomainError("replicas must be >= 1");
  if (c.ensemble != Ensemble::Canonical && !std::isfinite(c.mu)) throw DomainError("mu must be finite");
  if (c.ensemble == Ensemble::QuantumGC) require_above_mu_star(c.model, c.mu);
  if (c.max_attempts < 1 || c.max_attempts > (std::uint64_t{1} << 32))
    throw DomainError("max_attempts must lie in [1, 2^32]");
}

json to_json(const SamplerConfig& c) {
  json j{{"energy", energy_to_json(c.model)},
         {"ensemble", to_string(c.ensemble)},
         {"truncation_tol", c.truncation_tol},
         {"seed", c.seed},
         {"replicas", c.replicas}};
  if (c.ensemble == Ensemble::Canonical) {
    j["M"] = c.M;
    j["strategy"] = to_string(c.strategy);
    j["max_attempts"] = c.max_attempts;
  } else {
    j["mu"] = c.mu;
  }
  return j;
}

SamplerConfig sampler_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("sampler config: expected an object");
  SamplerConfig c;
  try {
    c.model = energy_from_json(j.at("energy"));
    c.ensemble = ensemble_from_string(j.value("ensemble", std::string("quantum")));
    c.truncation_tol = j.value("truncation_tol", c.truncation_tol);
    c.seed = j.value("seed", c.seed);
    c.replicas = j.value("replicas", c.replicas);
    if (c.ensemble == Ensemble::Canonical) {
      c.M = j.at("M").get<std::uint64_t>();
      c.strategy = strategy_from_string(j.value("strategy", std::string("auto")));
      c.max_attempts = j.value("max_attempts", c.max_attempts);
    } else {
      c.mu = j.at("mu").get<double>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("sampler config: {}", e.what()));
  }
  return c;
}

std::uint64_t truncation_index(const EnergyModel& model, double mu, double tol, Ensemble ensemble) {
  if (!(tol > 0.0)) throw DomainError("truncation_index: tol must be positive");
  if (ensemble == Ensemble::Canonical) throw DomainError("truncation_index: canonical draws are not truncated");
  const bool quantum = ensemble == Ensemble::QuantumGC;
  if (quantum) require_above_mu_star(model, mu);
  // Half of the budget for the analytic tail, the other half is spent by the
  // downward refinement with exact terms.
  const auto bound = [&](std::uint64_t K) {
    return quantum ? quantum_tail_bound(model, mu, K) : classical_tail_bound(model, mu, K);
  };
  std::uint64_t K = 1;
  while (!(bound(K) <= 0.5 * tol)) {
    K *= 2;
    if (K > kMaxTruncation)
      throw NonConvergent(fmt::format("truncation_index: no certified K <= 2^36 for tol {}", tol));
  }
  const auto term = [&](std::uint64_t k) {
    return std::exp(quantum ? log_theta(model, mu, k) : log_alpha(model, mu, k));
  };
  return refine_downward(K, bound(K), tol, term);
}

QuantumSampler::QuantumSampler(const EnergyModel& model, double mu, double truncation_tol)
    : K_(gibbs::truncation_index(model, mu, truncation_tol, Ensemble::QuantumGC)) {
  build(model, mu);
}

QuantumSampler::QuantumSampler(const EnergyModel& model, double mu, std::uint64_t K) : K_(K) {
  require_above_mu_star(model, mu);
  build(model, mu);
}

void QuantumSampler::build(const EnergyModel& model, double mu) {
  const std::uint64_t n = padded(K_);
  log_theta_.resize(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    log_theta_[i] = log_theta(model, mu, i + 1);
    if (log_theta_[i] >= 0.0) throw DomainError(fmt::format("theta_{} >= 1 at mu = {}", i + 1, mu));
  }
  const std::uint64_t blocks = n / kBlock;
  block_q_.resize(blocks);
  block_log1m_q_.resize(blocks);
  for (std::uint64_t b = 0; b < blocks; ++b) {
    const auto first = log_theta_.begin() + static_cast<std::ptrdiff_t>(b * kBlock);
    const double q = std::exp(*std::max_element(first, first + kBlock));
    block_q_[b] = q;
    block_log1m_q_[b] = std::log1p(-q);
  }
}

Partition QuantumSampler::draw(std::uint64_t seed, std::uint64_t replica) const {
  std::vector<Partition::Entry> entries;
  for (std::uint64_t b = 0; b < block_q_.size(); ++b) {
    const double q = block_q_[b];
    if (!(q > 0.0)) continue;
    CounterStream rng(seed, replica, static_cast<std::uint32_t>(b));
    const std::uint64_t base = b * kBlock;
    if (q >= kDenseThreshold) {
      for (std::uint64_t i = 0; i < kBlock && base + i < K_; ++i) {
        const std::uint64_t n = geometric_from_uniform(log_theta_[base + i], rng.uniform());
        if (n) entries.emplace_back(base + i + 1, n);
      }
      continue;
    }
    sparse_block(rng, block_log1m_q_[b], [&](std::uint64_t pos) {
      const std::uint64_t idx = base + pos;
      if (idx >= K_) return false;
      const double lt = log_theta_[idx];
      if (rng.uniform() * q < std::exp(lt)) entries.emplace_back(idx + 1, 1 + geometric_from_uniform(lt, rng.uniform()));
      return true;
    });
  }
  return Partition::from_multiplicities(std::move(entries));
}

ClassicalSampler::ClassicalSampler(const EnergyModel& model, double mu, double truncation_tol)
    : K_(gibbs::truncation_index(model, mu, truncation_tol, Ensemble::ClassicalGC)) {
  build(model, mu);
}

ClassicalSampler::ClassicalSampler(const EnergyModel& model, double mu, std::uint64_t K) : K_(K) { build(model, mu); }

void ClassicalSampler::build(const EnergyModel& model, double mu) {
  const std::uint64_t n = padded(K_);
  alpha_.resize(n);
  std::vector<double> hit(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    alpha_[i] = std::exp(log_alpha(model, mu, i + 1));
    if (!std::isfinite(alpha_[i])) throw DomainError(fmt::format("alpha_{} overflows at mu = {}", i + 1, mu));
    hit[i] = -std::expm1(-alpha_[i]);
  }
  const std::uint64_t blocks = n / kBlock;
  block_q_.resize(blocks);
  block_log1m_q_.resize(blocks);
  for (std::uint64_t b = 0; b < blocks; ++b) {
    const auto first = hit.begin() + static_cast<std::ptrdiff_t>(b * kBlock);
    const double q = *std::max_element(first, first + kBlock);
    block_q_[b] = q;
    block_log1m_q_[b] = std::log1p(-q);
  }
}

Partition ClassicalSampler::draw(std::uint64_t seed, std::uint64_t replica) const {
  std::vector<Partition::Entry> entries;
  for (std::uint64_t b = 0; b < block_q_.size(); ++b) {
    const double q = block_q_[b];
    if (!(q > 0.0)) continue;
    CounterStream rng(seed, replica, static_cast<std::uint32_t>(b));
    const std::uint64_t base = b * kBlock;
    if (q >= kDenseThreshold) {
      for (std::uint64_t i = 0; i < kBlock && base + i < K_; ++i) {
        const std::uint64_t n = poisson_variate(alpha_[base + i], rng);
        if (n) entries.emplace_back(base + i + 1, n);
      }
      continue;
    }
    sparse_block(rng, block_log1m_q_[b], [&](std::uint64_t pos) {
      const std::uint64_t idx = base + pos;
      if (idx >= K_) return false;
      const double a = alpha_[idx];
      if (rng.uniform() * q < -std::expm1(-a))
        entries.emplace_back(idx + 1, positive_poisson_from_uniform(a, rng.uniform()));
      return true;
    });
  }
  return Partition::from_multiplicities(std::move(entries));
}

std::vector<std::pair<Partition, double>> canonical_distribution(const EnergyModel& model, std::uint64_t M,
                                                                 std::uint64_t cap) {
  std::vector<std::pair<Partition, double>> out;
  const double beta = model.beta();
  for_each_partition(
      M,
      [&](const Partition& p) {
        double h = 0.0;
        for (const auto& [k, n] : p.entries()) {
          if (model.is_excluded(k)) return;
          h += energy(model, k) * static_cast<double>(n);
        }
        out.emplace_back(p, -beta * h);
      },
      cap);
  if (out.empty()) throw Unreachable(fmt::format("no admissible partition of {}", M));
  double top = -kInf;
  for (const auto& [p, lw] : out) top = std::max(top, lw);
  double z = 0.0;
  for (auto& [p, w] : out) z += (w = std::exp(w - top));
  for (auto& [p, w] : out) w /= z;
  return out;
}

CanonicalSampler::CanonicalSampler(const EnergyModel& model, std::uint64_t M, CanonicalStrategy strategy,
                                   std::uint64_t max_attempts)
    : M_(M),
      enumerate_(strategy == CanonicalStrategy::Enumeration ||
                 (strategy == CanonicalStrategy::Auto && M <= kEnumerationThreshold) || M == 0),
      max_attempts_(max_attempts) {
  if (enumerate_) {
    double acc = 0.0;
    for (auto& [p, w] : canonical_distribution(model, M)) {
      support_.push_back(std::move(p));
      probs_.push_back(w);
      cdf_.push_back(acc += w);
    }
    cdf_.back() = 1.0;
    return;
  }
  mu_ = mu_for_target_mass(model, static_cast<double>(M));
  proposal_.emplace(model, mu_, M);
}

Partition CanonicalSampler::draw(std::uint64_t seed, std::uint64_t replica, AcceptanceStats* stats) const {
  if (enumerate_) {
    CounterStream rng(seed, replica, 0);
    const double u = rng.uniform();
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    return support_[static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cdf_.begin(),
                                                                      static_cast<std::ptrdiff_t>(cdf_.size()) - 1))];
  }
  for (std::uint64_t a = 0; a < max_attempts_; ++a) {
    Partition p = proposal_->draw(seed ^ kRejectionKey, (replica << 32) | a);
    if (stats) ++stats->attempts;
    if (p.mass() == M_) {
      if (stats) ++stats->accepted;
      return p;
    }
  }
  throw CapExceeded(fmt::format("canonical rejection: no partition of {} within {} attempts", M_, max_attempts_));
}

Partition sample_quantum_gc(const SamplerConfig& config, std::uint64_t replica) {
  validate(config);
  return QuantumSampler(config.model, config.mu, config.truncation_tol).draw(config.seed, replica);
}

Partition sample_classical_gc(const SamplerConfig& config, std::uint64_t replica) {
  validate(config);
  return ClassicalSampler(config.model, config.mu, config.truncation_tol).draw(config.seed, replica);
}

Partition sample_canonical(const SamplerConfig& config, std::uint64_t replica) {
  validate(config);
  return CanonicalSampler(config.model, config.M, config.strategy, config.max_attempts).draw(config.seed, replica);
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

template <class Draw>
void run_replicas(std::uint64_t replicas, unsigned threads, Draw&& draw) {
  threads = static_cast<unsigned>(std::min<std::uint64_t>(resolve_threads(threads), replicas));
  if (threads <= 1) {
    for (std::uint64_t r = 0; r < replicas; ++r) draw(r);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::uint64_t r = t; r < replicas; r += threads) draw(r);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

SampleRun sample(const SamplerConfig& config, unsigned threads) {
  validate(config);
  SampleRun run;
  run.samples.resize(config.replicas);
  switch (config.ensemble) {
    case Ensemble::QuantumGC: {
      const QuantumSampler s(config.model, config.mu, config.truncation_tol);
      run.truncation_index = s.truncation_index();
      run.method = "geometric";
      run_replicas(config.replicas, threads, [&](std::uint64_t r) { run.samples[r] = s.draw(config.seed, r); });
      break;
    }
    case Ensemble::ClassicalGC: {
      const ClassicalSampler s(config.model, config.mu, config.truncation_tol);
      run.truncation_index = s.truncation_index();
      run.method = "poisson";
      run_replicas(config.replicas, threads, [&](std::uint64_t r) { run.samples[r] = s.draw(config.seed, r); });
      break;
    }
    case Ensemble::Canonical: {
      const CanonicalSampler s(config.model, config.M, config.strategy, config.max_attempts);
      run.method = s.uses_enumeration() ? "enumeration" : "rejection";
      run.proposal_mu = s.proposal_mu();
      run.truncation_index = config.M;
      std::vector<AcceptanceStats> stats(config.replicas);
      run_replicas(config.replicas, threads,
                   [&](std::uint64_t r) { run.samples[r] = s.draw(config.seed, r, &stats[r]); });
      for (const auto& st : stats) run.acceptance += st;
      break;
    }
  }
  return run;
}

void write_ndjson(std::ostream& out, const SamplerConfig& config, const SampleRun& run, const json& extra_header) {
  json header{{"type", "header"},
              {"version", library_version()},
              {"config", to_json(config)},
              {"seed", config.seed},
              {"method", run.method},
              {"truncation_index", run.truncation_index}};
  if (run.method == "rejection") {
    header["proposal_mu"] = run.proposal_mu;
    header["acceptance"] = {{"attempts", run.acceptance.attempts},
                            {"accepted", run.acceptance.accepted},
                            {"rate", run.acceptance.rate()}};
  }
  for (const auto& [k, v] : extra_header.items()) header[k] = v;
  out << header.dump() << '\n';
  for (std::size_t r = 0; r < run.samples.size(); ++r) {
    json rec = to_json(run.samples[r]);
    rec["replica"] = r;
    out << rec.dump() << '\n';
  }
}

SampleDump read_ndjson(std::istream& in) {
  SampleDump dump;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ConfigError(fmt::format("sample dump line {}: {}", lineno, e.what()));
    }
    if (j.value("type", std::string()) == "header") {
      dump.header = std::move(j);
      continue;
    }
    dump.samples.push_back(partition_from_json(j));
  }
  if (dump.header.is_null()) throw ConfigError("sample dump: missing header record");
  return dump;
}

}  // namespace gibbs
