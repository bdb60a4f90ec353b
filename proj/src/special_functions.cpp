#include "gibbs/special_functions.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "gibbs/error.hpp"

namespace gibbs {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 10000;

double dilog_series(double x) {
  double sum = 0.0;
  double power = x;
  for (int k = 1; k < kMaxIter; ++k) {
    const double term = power / (static_cast<double>(k) * k);
    sum += term;
    if (term < kEps * 0.25 * sum) break;
    power *= x;
  }
  return sum;
}

}  // namespace

double dilog(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError(fmt::format("dilog: x = {} outside [0, 1]", x));
  constexpr double zeta2 = std::numbers::pi * std::numbers::pi / 6.0;
  if (x == 0.0) return 0.0;
  if (x == 1.0) return zeta2;
  if (x <= 0.5) return dilog_series(x);
  return zeta2 - std::log(x) * std::log1p(-x) - dilog_series(1.0 - x);
}

double upper_incomplete_gamma_regularized(double s, double x) {
  if (!(s > 0.0) || !(x >= 0.0))
    throw DomainError(fmt::format("upper_incomplete_gamma_regularized: need s > 0, x >= 0 (s={}, x={})", s, x));
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  const double log_prefactor = -x + s * std::log(x) - std::lgamma(s);
  if (x < s + 1.0) {
    double term = 1.0 / s;
    double sum = term;
    for (int n = 1; n < kMaxIter; ++n) {
      term *= x / (s + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * kEps) break;
    }
    return 1.0 - sum * std::exp(log_prefactor);
  }
  double b = x + 1.0 - s;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return std::exp(log_prefactor) * h;
}

double exp_integral_E1(double x) {
  if (!(x > 0.0)) throw DomainError(fmt::format("exp_integral_E1: x = {} must be positive", x));
  if (std::isinf(x)) return 0.0;
  if (x <= 1.0) {
    // -gamma - ln x + sum_{n>=1} (-1)^{n+1} x^n / (n n!)
    double sum = 0.0;
    double fact = 1.0;
    for (int n = 1; n < kMaxIter; ++n) {
      fact *= -x / n;
      const double term = -fact / n;
      sum += term;
      if (std::abs(term) < std::abs(sum) * kEps) break;
    }
    return -std::numbers::egamma - std::log(x) + sum;
  }
  double b = x + 1.0;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double a = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h * std::exp(-x);
}

double upper_incomplete_gamma(double s, double x) {
  if (!(x > 0.0)) throw DomainError(fmt::format("upper_incomplete_gamma: x = {} must be positive", x));
  if (s > 0.0) return upper_incomplete_gamma_regularized(s, x) * std::tgamma(s);
  if (s == 0.0) return exp_integral_E1(x);
  // Walk up to s + n in (0, 1] (or exactly 0 for integer s), then back down.
  const int n = static_cast<int>(std::ceil(-s));
  const double top = s + n;
  double value = top == 0.0 ? exp_integral_E1(x) : upper_incomplete_gamma_regularized(top, x) * std::tgamma(top);
  for (int i = n - 1; i >= 0; --i) {
    const double si = s + i;
    value = (value - std::exp(si * std::log(x) - x)) / si;
  }
  return value;
}

double poisson_process_rate(double x, double y) {
  if (!(x > 0.0) || !(y >= x)) throw DomainError(fmt::format("poisson_process_rate: need 0 < x <= y (x={}, y={})", x, y));
  return exp_integral_E1(x) - exp_integral_E1(y);
}

double chi_square_sf(double statistic, double dof) {
  if (!(dof > 0.0)) throw DomainError("chi_square_sf: dof must be positive");
  if (statistic <= 0.0) return 1.0;
  return upper_incomplete_gamma_regularized(0.5 * dof, 0.5 * statistic);
}

}  // namespace gibbs
