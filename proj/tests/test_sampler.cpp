#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "gibbs/analytics.hpp"
#include "gibbs/error.hpp"
#include "gibbs/sampler.hpp"
#include "gibbs/stats.hpp"

using namespace gibbs;

namespace {

SamplerConfig quantum(const EnergyModel& m, double mu, std::uint64_t replicas, std::uint64_t seed = 1) {
  SamplerConfig c;
  c.model = m;
  c.mu = mu;
  c.replicas = replicas;
  c.seed = seed;
  return c;
}

Partition restrict_to(const Partition& p, std::uint64_t K) {
  std::vector<Partition::Entry> e;
  for (const auto& x : p.entries())
    if (x.first <= K) e.push_back(x);
  return Partition::from_multiplicities(e);
}

}  // namespace

TEST_CASE("truncation index, geometric tail") {
  const EnergyModel flat = EnergyModel::constant(1.0, 0.0);
  const double tol = 1e-9;
  const std::uint64_t K = truncation_index(flat, 0.1, tol);
  const double closed = std::ceil(std::log(1e9 / (1 - std::exp(-0.1))) / 0.1);
  CHECK(std::abs(static_cast<double>(K) - closed) <= 1.0);
  // Certificate and minimality against the exact geometric tail.
  const auto tail = [](std::uint64_t k) { return std::exp(-0.1 * (k + 1)) / (1 - std::exp(-0.1)); };
  CHECK(tail(K) <= tol);
  CHECK(tail(K - 1) > tol);

  CHECK(truncation_index(flat, 20.0, 0.5) == 1);
  std::uint64_t prev = UINT64_MAX;
  for (double mu : {0.005, 0.01, 0.05, 0.1, 0.5, 1.0, 3.0}) {
    const std::uint64_t k = truncation_index(EnergyModel::constant(1.0, 1.0), mu, 1e-6);
    CHECK(k <= prev);
    prev = k;
  }
  CHECK_THROWS_AS(truncation_index(flat, 0.0, 1e-6), DomainError);
}

TEST_CASE("truncation index, Poisson tail") {
  const double nu = 5.0;
  const EnergyModel flat = EnergyModel::constant(0.0, 0.0);
  const double tol = 1e-8;
  const std::uint64_t K = truncation_index(flat, -std::log(nu), tol, Ensemble::ClassicalGC);
  // sum_{k > K} nu^k / k! = e^nu P{Poisson(nu) > K}
  const auto tail = [nu](std::uint64_t k) { return std::exp(nu) * boost::math::gamma_p(static_cast<double>(k + 1), nu); };
  CHECK(tail(K) <= tol);
  CHECK(tail(K - 1) > tol);
}

TEST_CASE("huge mu gives the empty partition") {
  const SampleRun run = sample(quantum(EnergyModel::constant(1.0, 1.0), 50.0, 1000));
  for (const auto& p : run.samples) CHECK(p.empty());
}

TEST_CASE("geometric marginal of p_1 at beta = 0, mu = 0.1") {
  const double mu = 0.1;
  const SampleRun run = sample(quantum(EnergyModel::constant(1.0, 0.0), mu, 100000, 3));
  const double th = std::exp(-mu);
  Welford w;
  std::vector<std::uint64_t> counts(6, 0);
  for (const auto& p : run.samples) {
    const auto n = p.multiplicity(1);
    w.add(static_cast<double>(n));
    if (n < counts.size()) ++counts[n];
  }
  const double mean = th / (1 - th);
  CHECK(std::abs(w.mean() - mean) <= 3 * std::sqrt(th / ((1 - th) * (1 - th)) / 100000));
  std::vector<double> pmf(6);
  for (std::size_t n = 0; n < 6; ++n) pmf[n] = std::pow(th, n) * (1 - th);
  CHECK(chi_square_test(counts, pmf, 100000).p_value > 0.01);
}

TEST_CASE("sparse blocks reproduce the geometric law per state") {
  const EnergyModel m = EnergyModel::constant(2.0, 1.0);
  const double mu = 0.01;
  const std::uint64_t n = 200000;
  const SampleRun run = sample(quantum(m, mu, n, 11));
  for (PartSize k : {1u, 30u, 64u, 65u, 200u}) {
    const double th = theta(m, mu, k);
    std::uint64_t ge1 = 0, ge2 = 0;
    for (const auto& p : run.samples) {
      const auto c = p.multiplicity(k);
      ge1 += c >= 1;
      ge2 += c >= 2;
    }
    const double f1 = static_cast<double>(ge1) / n;
    CHECK(std::abs(f1 - th) <= 4 * binomial_sigma(th, n));
    const double f2 = static_cast<double>(ge2) / n;
    CHECK(std::abs(f2 - th * th) <= 4 * binomial_sigma(th * th, n) + 1e-6);
  }
}

TEST_CASE("mean mass matches the analytic series") {
  for (auto [m, mu] : {std::pair{EnergyModel::constant(1.0, 1.0), 0.02}, std::pair{EnergyModel::log(0.5), 0.01},
                       std::pair{EnergyModel::loglog(1.0), 0.05}}) {
    const SampleRun run = sample(quantum(m, mu, 20000, 5));
    Welford w;
    for (const auto& p : run.samples) w.add(static_cast<double>(p.mass()));
    CHECK(std::abs(w.mean() - expected_monomers(m, mu).value) <= 3.5 * w.standard_error());
  }
}

TEST_CASE("truncation honesty: K and 2K runs agree except with probability ~tol") {
  const EnergyModel m = EnergyModel::constant(1.0, 1.0);
  const double mu = 0.05, tol = 1e-6;
  const QuantumSampler a(m, mu, tol);
  const QuantumSampler b(m, mu, 2 * a.truncation_index());
  const std::uint64_t n = 1000000;
  std::uint64_t differ = 0;
  for (std::uint64_t r = 0; r < n; ++r) {
    const Partition pa = a.draw(17, r);
    const Partition pb = b.draw(17, r);
    if (pa != pb) {
      ++differ;
      CHECK(restrict_to(pb, a.truncation_index()) == pa);
    }
  }
  CHECK(static_cast<double>(differ) / n <= 10 * tol);
}

TEST_CASE("classical marginals are Poisson") {
  const double nu = 3.0;
  SamplerConfig c = quantum(EnergyModel::constant(0.0, 0.0), -std::log(nu), 100000, 8);
  c.ensemble = Ensemble::ClassicalGC;
  const SampleRun run = sample(c);
  Welford mass;
  for (const auto& p : run.samples) mass.add(static_cast<double>(p.mass()));
  CHECK(std::abs(mass.mean() - nu * std::exp(nu)) <= 3 * mass.standard_error());
  for (PartSize k : {1u, 2u, 5u, 9u}) {
    const double a = std::exp(k * std::log(nu) - std::lgamma(k + 1.0));
    Welford w;
    for (const auto& p : run.samples) w.add(static_cast<double>(p.multiplicity(k)));
    CHECK(std::abs(w.mean() - a) <= 3.5 * std::sqrt(a / 100000));
    CHECK(std::abs(w.variance() - a) <= 3.5 * std::sqrt((a + 2 * a * a) / 100000));
  }
}

TEST_CASE("classical sampling admits negative mu and tiny alphas") {
  SamplerConfig c = quantum(EnergyModel::constant(1.0, 1.0), 12.0, 20000, 2);
  c.ensemble = Ensemble::ClassicalGC;
  c.truncation_tol = 1e-3;
  const SampleRun run = sample(c);
  CHECK(run.truncation_index >= 1);
  for (const auto& p : run.samples) CHECK(p.largest_part() <= run.truncation_index);
}

TEST_CASE("canonical enumeration: uniform at beta = 0, M = 4") {
  SamplerConfig c;
  c.model = EnergyModel::constant(1.0, 0.0);
  c.ensemble = Ensemble::Canonical;
  c.M = 4;
  c.replicas = 100000;
  c.seed = 4;
  const SampleRun run = sample(c);
  CHECK(run.method == "enumeration");
  const auto all = enumerate_partitions(4);
  std::map<Partition, std::uint64_t> freq;
  for (const auto& p : run.samples) ++freq[p];
  std::vector<std::uint64_t> counts;
  for (const auto& p : all) counts.push_back(freq[p]);
  CHECK(chi_square_test(counts, std::vector<double>(5, 0.2), 100000).p_value > 0.01);
}

TEST_CASE("canonical weights: M = 2, Constant(1), beta = 1") {
  const auto dist = canonical_distribution(EnergyModel::constant(1.0, 1.0), 2);
  REQUIRE(dist.size() == 2);
  CHECK(dist[0].first.parts_descending() == std::vector<PartSize>{2});
  CHECK(dist[0].second / dist[1].second == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
}

TEST_CASE("canonical rejection matches enumeration (M = 6)") {
  const EnergyModel m = EnergyModel::constant(1.0, 1.0);
  SamplerConfig c;
  c.model = m;
  c.ensemble = Ensemble::Canonical;
  c.M = 6;
  c.strategy = CanonicalStrategy::Rejection;
  c.replicas = 20000;
  c.seed = 6;
  const SampleRun run = sample(c);
  CHECK(run.method == "rejection");
  CHECK(run.acceptance.accepted == 20000);
  CHECK(run.acceptance.rate() > 0.05);
  std::map<Partition, double> freq;
  for (const auto& p : run.samples) {
    CHECK(p.mass() == 6);
    freq[p] += 1.0 / 20000;
  }
  std::vector<double> emp, exact;
  for (const auto& [p, w] : canonical_distribution(m, 6)) {
    emp.push_back(freq[p]);
    exact.push_back(w);
  }
  CHECK(total_variation(emp, exact) < 0.03);
}

TEST_CASE("canonical rejection budget") {
  CanonicalSampler s(EnergyModel::constant(1.0, 1.0), 40, CanonicalStrategy::Rejection, 1);
  AcceptanceStats st;
  int thrown = 0;
  for (std::uint64_t r = 0; r < 50; ++r) {
    try {
      s.draw(1, r, &st);
    } catch (const CapExceeded&) {
      ++thrown;
    }
  }
  CHECK(thrown > 0);
  CHECK(st.attempts == 50);
}

TEST_CASE("results do not depend on the thread count") {
  const SamplerConfig c = quantum(EnergyModel::log(0.5), 0.01, 500, 1234);
  const SampleRun one = sample(c, 1);
  const SampleRun three = sample(c, 3);
  CHECK(one.samples == three.samples);
  SamplerConfig other = c;
  other.seed = 1235;
  CHECK(sample(other, 1).samples != one.samples);
  CHECK(sample_quantum_gc(c, 7) == one.samples[7]);
}

TEST_CASE("NDJSON dump round trip") {
  SamplerConfig c = quantum(EnergyModel::constant(1.0, 1.0), 0.1, 25, 9);
  const SampleRun run = sample(c);
  std::ostringstream out;
  write_ndjson(out, c, run);
  std::istringstream in(out.str());
  const SampleDump dump = read_ndjson(in);
  CHECK(dump.samples == run.samples);
  const SamplerConfig back = sampler_config_from_json(dump.header.at("config"));
  CHECK(back.model == c.model);
  CHECK(back.mu == c.mu);
  CHECK(back.seed == c.seed);
  CHECK(sample(back).samples == run.samples);
}

TEST_CASE("invalid configurations") {
  SamplerConfig c = quantum(EnergyModel::constant(1.0, 1.0), -0.1, 10);
  CHECK_THROWS_AS(validate(c), DomainError);
  c.mu = 0.1;
  c.replicas = 0;
  CHECK_THROWS_AS(validate(c), DomainError);
  c.replicas = 1;
  c.truncation_tol = 0.0;
  CHECK_THROWS_AS(validate(c), DomainError);
}
