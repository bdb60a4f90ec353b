#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace gibbs {

/// Philox4x32-10 counter-based bijection (Salmon et al., SC'11).
struct Philox4x32 {
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;
  static Block generate(Block counter, Key key) noexcept;
};

/// A seekable random stream addressed by (seed, replica, stream). Draw j of a
/// stream is a pure function of (seed, replica, stream, j), so results never
/// depend on which thread evaluates them or in which order.
class CounterStream {
 public:
  using result_type = std::uint64_t;

  CounterStream(std::uint64_t seed, std::uint64_t replica, std::uint32_t stream) noexcept;

  result_type operator()() noexcept;
  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

 private:
  Philox4x32::Key key_;
  Philox4x32::Block counter_;
  std::array<std::uint64_t, 2> buffer_{};
  int available_ = 0;
};

/// Number of failures before the first success for P{N = n} = theta^n (1-theta),
/// by inversion: floor(ln u / ln theta).
std::uint64_t geometric_from_uniform(double log_theta, double u) noexcept;

/// Poisson variate conditioned on being positive, by inversion of the
/// conditional CDF with the uniform `u`. Intended for small means.
std::uint64_t positive_poisson_from_uniform(double mean, double u) noexcept;

/// Poisson variate: sequential inversion below mean 10, Hormann's PTRS
/// transformed rejection above.
std::uint64_t poisson_variate(double mean, CounterStream& rng) noexcept;

}  // namespace gibbs
