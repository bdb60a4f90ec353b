#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace gibbs {

/// Running mean and variance; merges are associative.
class Welford {
 public:
  void add(double x) noexcept;
  void merge(const Welford& other) noexcept;
  std::uint64_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  /// Unbiased sample variance (0 for fewer than two observations).
  double variance() const noexcept;
  /// Standard error of the mean.
  double standard_error() const noexcept;

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// sup_x |F_n(x) - F(x)| for a continuous reference CDF. Ties are allowed.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Same for integer data against an integer CDF P{X <= n}; the supremum is
/// taken over all integers.
double ks_distance_lattice(std::vector<std::uint64_t> samples, const std::function<double(std::uint64_t)>& cdf);

/// Asymptotic Kolmogorov tail P{D_n >= d} with the Stephens correction.
double ks_pvalue(double distance, std::uint64_t n);

struct ChiSquareResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  std::size_t bins = 0;  // after pooling
};

/// Pearson goodness of fit of counts[i] against probabilities[i]. Adjacent
/// cells are pooled until each expects at least `min_expected`; the mass
/// 1 - sum(probabilities) forms one extra cell with observed count
/// total - sum(counts).
ChiSquareResult chi_square_test(const std::vector<std::uint64_t>& counts, const std::vector<double>& probabilities,
                                std::uint64_t total, double min_expected = 5.0);

/// (1/2) sum |p_i - q_i|.
double total_variation(const std::vector<double>& p, const std::vector<double>& q);

double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y);

/// sqrt(p (1 - p) / n).
double binomial_sigma(double p, std::uint64_t n);

}  // namespace gibbs
