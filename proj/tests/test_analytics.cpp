#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "gibbs/analytics.hpp"
#include "gibbs/error.hpp"
#include "gibbs/special_functions.hpp"

using namespace gibbs;
namespace quad = boost::math::quadrature;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// beta = 0: sum_k k/(e^{mu k}-1) = sum_j q^j/(1-q^j)^2 with q = e^{-mu}
// (expand each term geometrically and swap the order of summation).
double lambert_mass(double mu) {
  double s = 0.0;
  for (int j = 1; j < 100000; ++j) {
    const double qj = std::exp(-mu * j);
    const double t = qj / ((1 - qj) * (1 - qj));
    s += t;
    if (t < 1e-18 * s) break;
  }
  return s;
}

// -sum_k ln(1 - q^k) = sum_j (1/j) q^j / (1 - q^j).
double lambert_log_xi(double mu) {
  double s = 0.0;
  for (int j = 1; j < 100000; ++j) {
    const double qj = std::exp(-mu * j);
    const double t = qj / (j * (1 - qj));
    s += t;
    if (t < 1e-18 * s) break;
  }
  return s;
}

double integral_0_inf(const std::function<double(double)>& f) {
  quad::tanh_sinh<double> a;
  quad::exp_sinh<double> b;
  return a.integrate(f, 0.0, 1.0) + b.integrate(f, 1.0, kInf);
}

}  // namespace

TEST_CASE("first index at or above x / mu") {
  CHECK(first_index_at_or_above(1.0, 1e-4) == 10000);
  CHECK(first_index_at_or_above(0.3, 0.1) == 3);
  CHECK(first_index_at_or_above(0.31, 0.1) == 4);
  CHECK(first_index_at_or_above(0.0, 0.1) == 1);
}

TEST_CASE("certified series match Lambert-series oracles") {
  const EnergyModel m = EnergyModel::constant(1.0, 0.0);
  for (double mu : {1.0, 0.1, 0.01, 1e-3}) {
    const auto mass = expected_monomers(m, mu, 1e-9);
    CHECK(mass.tail_bound <= 1e-9);
    CHECK(std::abs(mass.value - lambert_mass(mu)) <= mass.tail_bound + 1e-13 * mass.value);
    const auto lx = grand_potential_log(m, mu, 1e-9);
    CHECK(std::abs(lx.value - lambert_log_xi(mu)) <= lx.tail_bound + 1e-13 * lx.value);
  }
}

TEST_CASE("series refuse mu <= mu*") {
  const EnergyModel m = EnergyModel::constant(1.0, 1.0);
  CHECK_THROWS_AS(expected_monomers(m, 0.0), NonConvergent);
  CHECK_THROWS_AS(grand_potential_log(m.with_shift(-1.0), 0.5), NonConvergent);
  CHECK_NOTHROW(expected_monomers(m.with_shift(-1.0), 1.01));
}

TEST_CASE("expected F is a normalized step function") {
  const EnergyModel m = EnergyModel::constant(1.0, 1.0);
  const double mu = 0.05;
  const double mass = expected_monomers(m, mu, 1e-13).value;
  // int_0^inf E F_mu = sum_k mu * E[f(k)] / (mu E Mon) and E f(k) = sum_{j >= k} E p_j.
  double integral = 0.0;
  for (std::uint64_t k = 1; k < 2000; ++k) integral += expected_parts_from(m, mu, k, 1e-14).value;
  CHECK(integral / mass == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(expected_F(m, mu, 0.5).value == doctest::Approx(expected_F(m, mu, 0.5 - 1e-12).value));
  CHECK(expected_F(m, mu, 0.51).value < expected_F(m, mu, 0.5).value);
  CHECK(variance_F(m, mu, 0.5).value > 0.0);
}

TEST_CASE("lambda constants against quadrature") {
  CHECK(lambda_constant(GrowthClass::Decay, 0.0) == doctest::Approx(std::numbers::pi * std::numbers::pi / 6));
  for (double beta : {0.5, 1.0, 2.0}) {
    const double q = integral_0_inf([beta](double x) { return x * phi_function(GrowthClass::Constant, beta, x); });
    CHECK(lambda_constant(GrowthClass::Constant, beta) == doctest::Approx(q).epsilon(1e-10));
  }
  CHECK(lambda_constant(GrowthClass::Constant, 1.0) == doctest::Approx(std::exp(1.0) * dilog(std::exp(-1.0))));
  for (double beta : {0.25, 0.5, 1.0, 1.5}) {
    // x^{-beta} overflows at the smallest abscissas; use x^{1-beta} there.
    const double q = integral_0_inf([beta](double x) {
      return x < 1e-150 ? std::pow(x, 1.0 - beta) : x * phi_function(GrowthClass::Critical, beta, x);
    });
    CHECK(lambda_constant(GrowthClass::Critical, beta) == doctest::Approx(q).epsilon(1e-9));
  }
  CHECK(lambda_constant(GrowthClass::Critical, 0.5) == doctest::Approx(std::sqrt(std::numbers::pi) / 2));
}

TEST_CASE("limit shapes are normalized and F' = -density") {
  const EnergyModel models[] = {EnergyModel::constant(1.0, 0.0), EnergyModel::decay(1.0, 1.0),
                                EnergyModel::constant(1.0, 1.0), EnergyModel::constant(2.0, 0.5),
                                EnergyModel::loglog(1.0), EnergyModel::log(0.5), EnergyModel::log(0.2)};
  for (const auto& m : models) {
    const auto res = limit_shape(m);
    REQUIRE(res.status == ShapeStatus::Available);
    const auto& s = *res.shape;
    CHECK(std::abs(integral_0_inf(s.F) - 1.0) <= 1e-8);
    for (double x : {0.1, 0.5, 1.0, 2.0, 5.0}) {
      const double h = 1e-5;
      const double deriv = (s.F(x - h) - s.F(x + h)) / (2 * h);
      CHECK(std::abs(deriv - s.density(x)) <= 1e-6);
      CHECK(s.F(x) == doctest::Approx(formal_shape(s.regime, s.beta, x)).epsilon(1e-14));
    }
  }
}

TEST_CASE("closed forms of the four rows") {
  const double x = 0.5;
  CHECK(limit_shape(EnergyModel::constant(1.0, 0.0)).shape->F(x) ==
        doctest::Approx(-std::log(1 - std::exp(-x)) * 6 / (std::numbers::pi * std::numbers::pi)));
  CHECK(limit_shape(EnergyModel::constant(1.0, 1.0)).shape->F(x) ==
        doctest::Approx(-std::log(1 - std::exp(-1 - x)) / dilog(std::exp(-1.0))));
  CHECK(limit_shape(EnergyModel::loglog(1.0)).shape->F(x) == doctest::Approx(std::exp(-x)));
  // (1/Gamma(1.5)) int_x^inf y^{-1/2} e^{-y} dy = Q(1/2, x) / (1/2)
  CHECK(limit_shape(EnergyModel::log(0.5)).shape->F(x) ==
        doctest::Approx(upper_incomplete_gamma_regularized(0.5, x) / 0.5).epsilon(1e-13));
  CHECK(classical_shape(1.0) == doctest::Approx(-std::sqrt(6.0) / std::numbers::pi *
                                                std::log(1 - std::exp(-std::numbers::pi / std::sqrt(6.0)))));
}

TEST_CASE("limit shape availability") {
  const auto low_t = limit_shape(EnergyModel::log(1.5));
  CHECK(low_t.status == ShapeStatus::NoLimitShape);
  CHECK(low_t.reason == "beta>1");
  CHECK(limit_shape(EnergyModel::log(1.0)).status == ShapeStatus::Indeterminate);
  CHECK(limit_shape(EnergyModel::power(1.0, 2.0, 1.0)).status == ShapeStatus::NoLimitShape);
  CHECK(limit_shape(EnergyModel::power(1.0, 0.5, 1.0)).status == ShapeStatus::NoThermodynamicLimit);
  CHECK(limit_shape(EnergyModel::power(-1.0, 2.0, 1.0)).status == ShapeStatus::NoThermodynamicLimit);
  CHECK(limit_shape(EnergyModel::constant(1.0, 1.0)).shape->family == "dilog");
}

TEST_CASE("scaled mass approaches lambda") {
  CHECK(scaled_expected_monomers(EnergyModel::constant(1.0, 0.0), 1e-3) ==
        doctest::Approx(std::numbers::pi * std::numbers::pi / 6).epsilon(0.02));
  CHECK(scaled_expected_monomers(EnergyModel::constant(1.0, 1.0), 1e-3) ==
        doctest::Approx(std::exp(1.0) * dilog(std::exp(-1.0))).epsilon(0.02));
}

TEST_CASE("canonical sums") {
  const auto q = partition_numbers(25);
  for (std::uint64_t M = 0; M <= 25; ++M)
    CHECK(canonical_sum(EnergyModel::constant(1.0, 0.0), M) == doctest::Approx(q[M].convert_to<double>()));
  CHECK(canonical_sum(EnergyModel::constant(1.0, 1.0), 2) == doctest::Approx(std::exp(-1.0) + std::exp(-2.0)));
  // Z_M is the coefficient of e^{-mu M} in Xi.
  const EnergyModel m = EnergyModel::log(0.7);
  const double mu = 1.3;
  double partial = 0.0;
  for (std::uint64_t M = 0; M <= 40; ++M) partial += canonical_sum(m, M) * std::exp(-mu * M);
  CHECK(std::log(partial) == doctest::Approx(grand_potential_log(m, mu, 1e-14).value).epsilon(1e-9));
}

TEST_CASE("generating function identity with certified remainder") {
  for (double beta : {0.0, 1.0}) {
    const auto chk = check_generating_function(EnergyModel::constant(1.0, beta), 0.8, 20);
    CHECK(chk.pass);
    CHECK(std::abs(chk.log_gap) <= chk.allowed);
    CHECK(chk.log_gap >= 0.0);
  }
}

TEST_CASE("mu for a target mass") {
  const EnergyModel m = EnergyModel::constant(1.0, 1.0);
  for (double M : {6.0, 100.0, 1e4}) {
    const double mu = mu_for_target_mass(m, M, 1e-8);
    CHECK(expected_monomers(m, mu).value == doctest::Approx(M).epsilon(1e-7));
  }
  CHECK_THROWS_AS(mu_for_target_mass(EnergyModel::power(1.0, 2.0, 1.0), 1e6), Unreachable);
  CHECK_THROWS_AS(mu_for_target_mass(m, -1.0), Unreachable);
}

TEST_CASE("variance of F grows without bound for beta > 1 on the critical row") {
  const EnergyModel m = EnergyModel::log(1.5);
  const double v3 = variance_F(m, 1e-3, 0.5).value;
  const double v4 = variance_F(m, 1e-4, 0.5).value;
  CHECK(v4 >= 2.0 * v3);
  const EnergyModel c = EnergyModel::constant(1.0, 1.0);
  CHECK(variance_F(c, 1e-3, 0.5).value < variance_F(c, 1e-2, 0.5).value);
}

TEST_CASE("truncated series JSON") {
  const auto v = expected_monomers(EnergyModel::constant(1.0, 1.0), 0.1);
  const auto j = to_json(v);
  CHECK(j.at("value").get<double>() == v.value);
  CHECK(j.at("K").get<std::uint64_t>() == v.truncation_index);
}
