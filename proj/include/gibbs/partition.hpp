#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

namespace gibbs {

using PartSize = std::uint64_t;
using Count = std::uint64_t;
using BigInt = boost::multiprecision::cpp_int;

/// A partition stored as its multiplicity sequence (p_k): for each part size
/// k the number of summands equal to k. Only nonzero counts are stored, in
/// ascending order of k. Immutable after construction.
class Partition {
 public:
  using Entry = std::pair<PartSize, Count>;

  Partition() = default;

  /// From a list of summands in any order, e.g. {1,1,2,2,3,5}.
  static Partition from_parts(std::span<const PartSize> parts);
  /// From (k, p_k) pairs in any order; repeated k are merged, zero counts
  /// dropped. Throws DomainError on k == 0 with a nonzero count.
  static Partition from_multiplicities(std::vector<Entry> entries);

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  Count multiplicity(PartSize k) const noexcept;
  std::uint64_t mass() const noexcept { return mass_; }
  std::uint64_t num_parts() const noexcept { return num_parts_; }
  PartSize largest_part() const noexcept { return entries_.empty() ? 0 : entries_.back().first; }
  bool empty() const noexcept { return entries_.empty(); }

  /// Summands in non-increasing order (rows of the Young diagram).
  std::vector<PartSize> parts_descending() const;

  friend bool operator==(const Partition&, const Partition&) = default;
  friend auto operator<=>(const Partition& a, const Partition& b) { return a.entries_ <=> b.entries_; }

 private:
  explicit Partition(std::vector<Entry> sorted_entries);

  std::vector<Entry> entries_;
  std::uint64_t mass_ = 0;
  std::uint64_t num_parts_ = 0;
};

/// Mon(p) = Σ k p_k.
inline std::uint64_t mass(const Partition& p) noexcept { return p.mass(); }

/// The size distribution function f(x; p) = Σ_{k ≥ x} p_k: the number of
/// summands not smaller than x. It is a non-increasing step function that is
/// constant on (k_{i-1}, k_i] between consecutive distinct part sizes and
/// vanishes beyond the largest part.
class SizeDistribution {
 public:
  struct Step {
    PartSize x;   // right end of the step (a part size)
    Count value;  // f on (previous x, x]
  };

  SizeDistribution() = default;
  explicit SizeDistribution(const Partition& p);

  double operator()(double x) const noexcept;
  const std::vector<Step>& steps() const noexcept { return steps_; }
  /// ∫_0^∞ f(x) dx, exact.
  std::uint64_t total_integral() const noexcept;
  /// Rows "x,f" at every breakpoint.
  std::string to_csv() const;

 private:
  std::vector<Step> steps_;
};

inline SizeDistribution size_distribution(const Partition& p) { return SizeDistribution(p); }

inline constexpr std::uint64_t kDefaultEnumerationCap = 60;

/// Visits every partition of M exactly once, in order of decreasing largest
/// part (recursively, the remainder again by decreasing largest part).
void for_each_partition(std::uint64_t M, const std::function<void(const Partition&)>& visit,
                        std::uint64_t cap = kDefaultEnumerationCap);
std::vector<Partition> enumerate_partitions(std::uint64_t M,
                                            std::uint64_t cap = kDefaultEnumerationCap);

/// Q_0..Q_M by Euler's pentagonal-number recurrence, exact.
std::vector<BigInt> partition_numbers(std::uint64_t M);
BigInt partition_number(std::uint64_t M);

/// Natural logarithm of a positive big integer.
double log_big(const BigInt& v);

/// exp{π √(2M/3)} / (4 M √3).
double hardy_ramanujan_estimate(std::uint64_t M);
/// Q_M / hardy_ramanujan_estimate(M).
double hardy_ramanujan_ratio(std::uint64_t M);

nlohmann::json to_json(const Partition& p);
Partition partition_from_json(const nlohmann::json& j);

}  // namespace gibbs
