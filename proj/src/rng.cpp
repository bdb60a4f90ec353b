#include "gibbs/rng.hpp"

#include <cmath>

namespace gibbs {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53;
constexpr std::uint32_t kMul1 = 0xCD9E8D57;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox4x32::Block Philox4x32::generate(Block ctr, Key key) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

CounterStream::CounterStream(std::uint64_t seed, std::uint64_t replica, std::uint32_t stream) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      counter_{0, stream, static_cast<std::uint32_t>(replica), static_cast<std::uint32_t>(replica >> 32)} {}

CounterStream::result_type CounterStream::operator()() noexcept {
  if (available_ == 0) {
    const auto b = Philox4x32::generate(counter_, key_);
    ++counter_[0];
    buffer_[0] = (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
    buffer_[1] = (static_cast<std::uint64_t>(b[2]) << 32) | b[3];
    available_ = 2;
  }
  return buffer_[2 - available_--];
}

double CounterStream::uniform() noexcept {
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t geometric_from_uniform(double log_theta, double u) noexcept {
  if (!(log_theta < 0.0) || log_theta == -std::numeric_limits<double>::infinity()) return 0;
  const double n = std::floor(std::log(u) / log_theta);
  constexpr double cap = 9.0e18;
  return n >= cap ? static_cast<std::uint64_t>(cap) : static_cast<std::uint64_t>(n);
}

std::uint64_t positive_poisson_from_uniform(double mean, double u) noexcept {
  // Residual mass above zero, walked term by term to keep relative precision
  // when P{N >= 1} itself is tiny.
  double r = u * -std::expm1(-mean);
  double p = mean * std::exp(-mean);
  std::uint64_t n = 1;
  while (r > p && n < 1000) {
    r -= p;
    ++n;
    p *= mean / static_cast<double>(n);
  }
  return n;
}

std::uint64_t poisson_variate(double mean, CounterStream& rng) noexcept {
  if (!(mean > 0.0)) return 0;
  if (mean < 10.0) {
    const double u = rng.uniform();
    double p = std::exp(-mean);
    double cdf = p;
    std::uint64_t k = 0;
    while (u > cdf && k < 1000) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double U = rng.uniform() - 0.5;
    const double V = rng.uniform();
    const double us = 0.5 - std::abs(U);
    const double k = std::floor((2.0 * a / us + b) * U + mean + 0.43);
    if (us >= 0.07 && V <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && V > us)) continue;
    if (std::log(V) + std::log(invalpha) - std::log(a / (us * us) + b) <= -mean + k * loglam - std::lgamma(k + 1.0))
      return static_cast<std::uint64_t>(k);
  }
}

}  // namespace gibbs
