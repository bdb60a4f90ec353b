#include <doctest.h>

#include <cmath>

#include "gibbs/error.hpp"
#include "gibbs/stats.hpp"

using namespace gibbs;

TEST_CASE("Welford: merge equals one pass") {
  Welford all, a, b;
  for (int i = 0; i < 100; ++i) {
    const double x = std::sin(i * 0.7) * 3 + i * 0.01;
    all.add(x);
    (i < 37 ? a : b).add(x);
  }
  a.merge(b);
  CHECK(a.count() == 100);
  CHECK(a.mean() == doctest::Approx(all.mean()).epsilon(1e-14));
  CHECK(a.variance() == doctest::Approx(all.variance()).epsilon(1e-12));
  Welford one;
  one.add(2.0);
  CHECK(one.variance() == 0.0);
}

TEST_CASE("Kolmogorov distance of a stratified uniform sample") {
  const int n = 1000;
  std::vector<double> u;
  for (int i = 0; i < n; ++i) u.push_back((i + 0.5) / n);
  CHECK(ks_distance(u, [](double x) { return x; }) == doctest::Approx(0.5 / n));
  CHECK(ks_distance({0.5}, [](double x) { return x; }) == doctest::Approx(0.5));
  CHECK_THROWS_AS(ks_distance({}, [](double x) { return x; }), DomainError);
  CHECK(ks_pvalue(0.5 / n, n) == doctest::Approx(1.0));
  CHECK(ks_pvalue(0.1, 1000) < 1e-6);
  // lambda = 1.36 is the 5% point of the Kolmogorov distribution
  CHECK(ks_pvalue(1.358 / (std::sqrt(1e6) + 0.12 + 0.11 / 1e3), 1000000) == doctest::Approx(0.05).epsilon(0.01));
}

TEST_CASE("lattice Kolmogorov distance") {
  // Exactly the Bernoulli(1/2) proportions.
  std::vector<std::uint64_t> s{0, 0, 1, 1};
  CHECK(ks_distance_lattice(s, [](std::uint64_t k) { return k == 0 ? 0.5 : 1.0; }) == 0.0);
  // Gap below the smallest observation is seen.
  std::vector<std::uint64_t> t{3, 3};
  CHECK(ks_distance_lattice(t, [](std::uint64_t k) { return k >= 3 ? 1.0 : 0.25 * (k + 1); }) == doctest::Approx(0.75));
}

TEST_CASE("chi-square with pooling") {
  const auto r = chi_square_test({250, 250, 250, 250}, {0.25, 0.25, 0.25, 0.25}, 1000);
  CHECK(r.statistic == 0.0);
  CHECK(r.dof == 3.0);
  CHECK(r.p_value == doctest::Approx(1.0));
  // The last two cells expect 2 and 1: pooled into their neighbour.
  const auto p = chi_square_test({60, 37, 2, 1}, {0.6, 0.37, 0.02, 0.01}, 100);
  CHECK(p.bins == 2);
  // Missing probability mass becomes an extra cell.
  const auto q = chi_square_test({50, 30}, {0.5, 0.3}, 100);
  CHECK(q.bins == 3);
  CHECK(q.statistic == doctest::Approx(0.0));
  const auto bad = chi_square_test({900, 100}, {0.5, 0.5}, 1000);
  CHECK(bad.p_value < 1e-10);
}

TEST_CASE("total variation and correlation") {
  CHECK(total_variation({0.5, 0.5}, {1.0, 0.0}) == 0.5);
  CHECK(pearson_correlation({1, 2, 3, 4}, {2, 4, 6, 8}) == doctest::Approx(1.0));
  CHECK(pearson_correlation({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(pearson_correlation({1, 2, 3, 4}, {1, 1, 1, 1}) == 0.0);
  CHECK(binomial_sigma(0.5, 100) == doctest::Approx(0.05));
}
