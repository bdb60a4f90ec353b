#include "gibbs/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "gibbs/error.hpp"

namespace gibbs {

Partition::Partition(std::vector<Entry> sorted_entries) : entries_(std::move(sorted_entries)) {
  for (const auto& [k, n] : entries_) {
    mass_ += k * n;
    num_parts_ += n;
  }
}

Partition Partition::from_parts(std::span<const PartSize> parts) {
  std::vector<Entry> entries;
  entries.reserve(parts.size());
  for (PartSize k : parts) entries.emplace_back(k, 1);
  return from_multiplicities(std::move(entries));
}

Partition Partition::from_multiplicities(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end());
  std::vector<Entry> merged;
  merged.reserve(entries.size());
  for (const auto& [k, n] : entries) {
    if (n == 0) continue;
    if (k == 0) throw DomainError("partition: part size must be positive");
    if (!merged.empty() && merged.back().first == k)
      merged.back().second += n;
    else
      merged.emplace_back(k, n);
  }
  return Partition(std::move(merged));
}

Count Partition::multiplicity(PartSize k) const noexcept {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), Entry{k, 0});
  return (it != entries_.end() && it->first == k) ? it->second : 0;
}

std::vector<PartSize> Partition::parts_descending() const {
  std::vector<PartSize> out;
  out.reserve(num_parts_);
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
    out.insert(out.end(), it->second, it->first);
  return out;
}

SizeDistribution::SizeDistribution(const Partition& p) {
  const auto& e = p.entries();
  steps_.resize(e.size());
  Count tail = 0;
  for (std::size_t i = e.size(); i-- > 0;) {
    tail += e[i].second;
    steps_[i] = {e[i].first, tail};
  }
}

double SizeDistribution::operator()(double x) const noexcept {
  // First step whose right end is >= x.
  auto it = std::lower_bound(steps_.begin(), steps_.end(), x,
                             [](const Step& s, double v) { return static_cast<double>(s.x) < v; });
  return it == steps_.end() ? 0.0 : static_cast<double>(it->value);
}

std::uint64_t SizeDistribution::total_integral() const noexcept {
  std::uint64_t total = 0;
  PartSize left = 0;
  for (const auto& s : steps_) {
    total += (s.x - left) * s.value;
    left = s.x;
  }
  return total;
}

std::string SizeDistribution::to_csv() const {
  std::string out = "x,f\n";
  for (const auto& s : steps_) out += fmt::format("{},{}\n", s.x, s.value);
  return out;
}

namespace {

void enumerate_rec(std::uint64_t remaining, PartSize max_part, std::vector<Partition::Entry>& stack,
                   const std::function<void(const Partition&)>& visit) {
  if (remaining == 0) {
    visit(Partition::from_multiplicities(stack));
    return;
  }
  for (PartSize k = std::min<PartSize>(max_part, remaining); k >= 1; --k) {
    for (Count n = remaining / k; n >= 1; --n) {
      stack.emplace_back(k, n);
      enumerate_rec(remaining - k * n, k - 1, stack, visit);
      stack.pop_back();
    }
  }
}

}  // namespace

void for_each_partition(std::uint64_t M, const std::function<void(const Partition&)>& visit,
                        std::uint64_t cap) {
  if (M > cap)
    throw CapExceeded(fmt::format("enumerate_partitions: M={} exceeds cap {}", M, cap));
  std::vector<Partition::Entry> stack;
  enumerate_rec(M, M, stack, visit);
}

std::vector<Partition> enumerate_partitions(std::uint64_t M, std::uint64_t cap) {
  std::vector<Partition> out;
  for_each_partition(M, [&](const Partition& p) { out.push_back(p); }, cap);
  return out;
}

std::vector<BigInt> partition_numbers(std::uint64_t M) {
  std::vector<BigInt> q(M + 1);
  q[0] = 1;
  for (std::uint64_t n = 1; n <= M; ++n) {
    BigInt acc = 0;
    for (std::uint64_t j = 1;; ++j) {
      const std::uint64_t g1 = j * (3 * j - 1) / 2;
      if (g1 > n) break;
      const std::uint64_t g2 = j * (3 * j + 1) / 2;
      if (j % 2 == 1) {
        acc += q[n - g1];
        if (g2 <= n) acc += q[n - g2];
      } else {
        acc -= q[n - g1];
        if (g2 <= n) acc -= q[n - g2];
      }
    }
    q[n] = std::move(acc);
  }
  return q;
}

BigInt partition_number(std::uint64_t M) { return partition_numbers(M).back(); }

double hardy_ramanujan_estimate(std::uint64_t M) {
  if (M == 0) throw DomainError("hardy_ramanujan_estimate: M must be >= 1");
  const double m = static_cast<double>(M);
  return std::exp(std::numbers::pi * std::sqrt(2.0 * m / 3.0)) / (4.0 * m * std::sqrt(3.0));
}

double log_big(const BigInt& v) {
  if (v <= 0) throw DomainError("log_big: argument must be positive");
  const std::size_t bits = boost::multiprecision::msb(v) + 1;
  const std::size_t shift = bits > 60 ? bits - 60 : 0;
  const BigInt top = v >> shift;
  return std::log(top.convert_to<double>()) + static_cast<double>(shift) * std::numbers::ln2;
}

double hardy_ramanujan_ratio(std::uint64_t M) {
  if (M == 0) throw DomainError("hardy_ramanujan_ratio: M must be >= 1");
  const double m = static_cast<double>(M);
  const double log_estimate =
      std::numbers::pi * std::sqrt(2.0 * m / 3.0) - std::log(4.0 * m * std::sqrt(3.0));
  return std::exp(log_big(partition_number(M)) - log_estimate);
}

nlohmann::json to_json(const Partition& p) {
  nlohmann::json parts = nlohmann::json::object();
  for (const auto& [k, n] : p.entries()) parts[std::to_string(k)] = n;
  return {{"parts", parts}};
}

Partition partition_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("parts") || !j.at("parts").is_object())
    throw ConfigError("partition JSON must be an object with a \"parts\" object");
  std::vector<Partition::Entry> entries;
  for (const auto& [key, value] : j.at("parts").items()) {
    std::size_t used = 0;
    unsigned long long k = 0;
    try {
      k = std::stoull(key, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != key.size() || k == 0) throw ConfigError("partition JSON: bad part size \"" + key + "\"");
    if (!value.is_number_unsigned()) throw ConfigError("partition JSON: count must be a non-negative integer");
    entries.emplace_back(k, value.get<Count>());
  }
  return Partition::from_multiplicities(std::move(entries));
}

}  // namespace gibbs
