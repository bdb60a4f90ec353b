#pragma once

namespace gibbs {

/// Dilogarithm Li_2(x) on [0, 1]. Power series below 1/2, Euler's reflection
/// Li_2(x) = pi^2/6 - ln x ln(1-x) - Li_2(1-x) above.
double dilog(double x);

/// Regularized upper incomplete gamma Q(s, x) = Gamma(s, x) / Gamma(s) for
/// s > 0, x >= 0. Series for x < s + 1, Lentz continued fraction otherwise.
double upper_incomplete_gamma_regularized(double s, double x);

/// Non-regularized Gamma(s, x) for any real s and x > 0. Non-positive s are
/// reached by the recurrence Gamma(s, x) = (Gamma(s+1, x) - x^s e^{-x}) / s.
double upper_incomplete_gamma(double s, double x);

/// Exponential integral E_1(x) = int_x^inf e^{-z}/z dz, x > 0.
double exp_integral_E1(double x);

/// Rate of the limiting backward Poisson process on [x, y):
/// int_x^y e^{-z}/z dz = E_1(x) - E_1(y).
double poisson_process_rate(double x, double y);

/// Upper tail probability of the chi-square distribution.
double chi_square_sf(double statistic, double dof);

}  // namespace gibbs
