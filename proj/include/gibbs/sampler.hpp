#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gibbs/energy_model.hpp"
#include "gibbs/partition.hpp"

namespace gibbs {

enum class Ensemble { QuantumGC, ClassicalGC, Canonical };
enum class CanonicalStrategy { Auto, Enumeration, Rejection };

std::string to_string(Ensemble e);
Ensemble ensemble_from_string(const std::string& s);
std::string to_string(CanonicalStrategy s);
CanonicalStrategy strategy_from_string(const std::string& s);

inline constexpr std::uint64_t kEnumerationThreshold = 30;
inline constexpr std::uint64_t kDefaultMaxAttempts = 10'000'000;

struct SamplerConfig {
  EnergyModel model;
  double mu = 1.0;                 // unused by Canonical
  Ensemble ensemble = Ensemble::QuantumGC;
  std::uint64_t M = 0;             // Canonical only
  double truncation_tol = 1e-6;
  std::uint64_t seed = 0;
  std::uint64_t replicas = 1;
  CanonicalStrategy strategy = CanonicalStrategy::Auto;
  std::uint64_t max_attempts = kDefaultMaxAttempts;  // per canonical draw
};

/// Throws DomainError on an invalid configuration.
void validate(const SamplerConfig& config);

nlohmann::json to_json(const SamplerConfig& config);
SamplerConfig sampler_config_from_json(const nlohmann::json& j);

/// Smallest K for which the omitted mass sum_{k>K} theta_k (quantum) or
/// sum_{k>K} alpha_k (classical) is certified to be <= tol. The certificate is
/// an exact partial sum up to a larger index plus an analytic tail bound.
std::uint64_t truncation_index(const EnergyModel& model, double mu, double tol,
                               Ensemble ensemble = Ensemble::QuantumGC);

/// Independent geometric multiplicities, P{p_k = N} = theta_k^N (1 - theta_k).
///
/// States are processed in aligned blocks of 64. A block whose largest theta
/// is below 1/4 is sampled sparsely: candidate positions by geometric skips
/// at the block maximum q, thinned with probability theta_k / q. Block b
/// draws from the stream (seed, replica, b), so a run truncated at K agrees
/// with a run truncated at any K' > K on all states k <= K.
class QuantumSampler {
 public:
  QuantumSampler(const EnergyModel& model, double mu, double truncation_tol);
  /// Explicit truncation index, no certificate.
  QuantumSampler(const EnergyModel& model, double mu, std::uint64_t K);

  Partition draw(std::uint64_t seed, std::uint64_t replica) const;
  std::uint64_t truncation_index() const noexcept { return K_; }

 private:
  void build(const EnergyModel& model, double mu);

  std::uint64_t K_ = 0;
  std::vector<double> log_theta_;   // index k-1, padded to whole blocks
  std::vector<double> block_q_;
  std::vector<double> block_log1m_q_;
};

/// Independent Poisson multiplicities with means alpha_k, same block layout as
/// QuantumSampler with hit probabilities 1 - e^{-alpha_k}.
class ClassicalSampler {
 public:
  ClassicalSampler(const EnergyModel& model, double mu, double truncation_tol);
  ClassicalSampler(const EnergyModel& model, double mu, std::uint64_t K);

  Partition draw(std::uint64_t seed, std::uint64_t replica) const;
  std::uint64_t truncation_index() const noexcept { return K_; }

 private:
  void build(const EnergyModel& model, double mu);

  std::uint64_t K_ = 0;
  std::vector<double> alpha_;
  std::vector<double> block_q_;
  std::vector<double> block_log1m_q_;
};

struct AcceptanceStats {
  std::uint64_t attempts = 0;
  std::uint64_t accepted = 0;
  double rate() const noexcept { return attempts ? static_cast<double>(accepted) / attempts : 0.0; }
  AcceptanceStats& operator+=(const AcceptanceStats& o) noexcept {
    attempts += o.attempts;
    accepted += o.accepted;
    return *this;
  }
};

/// Exact draws from the canonical measure on partitions of M: weights
/// e^{-beta H} over an enumeration, or grand-canonical quantum draws at the
/// mean-matching mu accepted iff Mon = M. Parts larger than M can never be
/// accepted, so the proposal is truncated at K = M without bias.
class CanonicalSampler {
 public:
  CanonicalSampler(const EnergyModel& model, std::uint64_t M,
                   CanonicalStrategy strategy = CanonicalStrategy::Auto,
                   std::uint64_t max_attempts = kDefaultMaxAttempts);

  /// Throws CapExceeded when the attempt budget is exhausted.
  Partition draw(std::uint64_t seed, std::uint64_t replica, AcceptanceStats* stats = nullptr) const;

  bool uses_enumeration() const noexcept { return enumerate_; }
  double proposal_mu() const noexcept { return mu_; }
  /// Exact canonical probabilities, enumeration strategy only.
  const std::vector<Partition>& support() const noexcept { return support_; }
  const std::vector<double>& probabilities() const noexcept { return probs_; }

 private:
  std::uint64_t M_;
  bool enumerate_;
  std::uint64_t max_attempts_;
  double mu_ = 0.0;
  std::vector<Partition> support_;
  std::vector<double> probs_;
  std::vector<double> cdf_;
  std::optional<QuantumSampler> proposal_;
};

/// Exact canonical law e^{-beta H(p)} / Z_M over all partitions of M, in
/// enumeration order.
std::vector<std::pair<Partition, double>> canonical_distribution(const EnergyModel& model, std::uint64_t M,
                                                                 std::uint64_t cap = kDefaultEnumerationCap);

Partition sample_quantum_gc(const SamplerConfig& config, std::uint64_t replica = 0);
Partition sample_classical_gc(const SamplerConfig& config, std::uint64_t replica = 0);
Partition sample_canonical(const SamplerConfig& config, std::uint64_t replica = 0);

struct SampleRun {
  std::vector<Partition> samples;  // index = replica
  std::uint64_t truncation_index = 0;
  AcceptanceStats acceptance;       // canonical rejection only
  std::string method;               // "geometric", "poisson", "enumeration", "rejection"
  double proposal_mu = 0.0;
};

/// Draws config.replicas partitions. Replica r always uses the substreams of
/// (seed, r), so the output does not depend on `threads` (0 = hardware).
SampleRun sample(const SamplerConfig& config, unsigned threads = 0);

/// Newline-delimited JSON: a header {"type":"header", config, ...} followed by
/// one {"replica": r, "parts": {...}} record per line.
void write_ndjson(std::ostream& out, const SamplerConfig& config, const SampleRun& run,
                  const nlohmann::json& extra_header = nlohmann::json::object());

struct SampleDump {
  nlohmann::json header;
  std::vector<Partition> samples;
};
SampleDump read_ndjson(std::istream& in);

unsigned resolve_threads(unsigned requested);

}  // namespace gibbs
