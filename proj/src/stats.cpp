#include "gibbs/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gibbs/error.hpp"
#include "gibbs/special_functions.hpp"

namespace gibbs {

void Welford::add(double x) noexcept {
  ++n_;
  const double d = x - mean_;
  mean_ += d / static_cast<double>(n_);
  m2_ += d * (x - mean_);
}

void Welford::merge(const Welford& o) noexcept {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const double n = static_cast<double>(n_ + o.n_);
  const double d = o.mean_ - mean_;
  mean_ += d * static_cast<double>(o.n_) / n;
  m2_ += o.m2_ + d * d * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
  n_ += o.n_;
}

double Welford::variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

double Welford::standard_error() const noexcept {
  return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw DomainError("ks_distance: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_distance_lattice(std::vector<std::uint64_t> samples, const std::function<double(std::uint64_t)>& cdf) {
  if (samples.empty()) throw DomainError("ks_distance_lattice: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double below = 0.0;  // F_n just below the current value
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size();) {
    const std::uint64_t v = samples[i];
    std::size_t j = i;
    while (j < samples.size() && samples[j] == v) ++j;
    if (v > 0) d = std::max(d, std::abs(cdf(v - 1) - below));
    const double at = static_cast<double>(j) / n;
    d = std::max(d, std::abs(at - cdf(v)));
    below = at;
    i = j;
  }
  return d;
}

double ks_pvalue(double distance, std::uint64_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * distance;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

ChiSquareResult chi_square_test(const std::vector<std::uint64_t>& counts, const std::vector<double>& probabilities,
                                std::uint64_t total, double min_expected) {
  if (counts.size() != probabilities.size()) throw DomainError("chi_square_test: size mismatch");
  if (total == 0) throw DomainError("chi_square_test: no observations");
  const double n = static_cast<double>(total);
  std::vector<double> obs(counts.begin(), counts.end());
  std::vector<double> exp;
  double prob_sum = 0.0, count_sum = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    exp.push_back(probabilities[i] * n);
    prob_sum += probabilities[i];
    count_sum += obs[i];
  }
  const double rest = std::max(0.0, 1.0 - prob_sum) * n;
  if (rest > 0.0 || count_sum < n) {
    obs.push_back(n - count_sum);
    exp.push_back(rest);
  }
  std::vector<double> po, pe;
  double o = 0.0, e = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    o += obs[i];
    e += exp[i];
    if (e >= min_expected) {
      po.push_back(o);
      pe.push_back(e);
      o = e = 0.0;
    }
  }
  if (e > 0.0 || o > 0.0) {
    if (pe.empty()) {
      po.push_back(o);
      pe.push_back(e);
    } else {
      po.back() += o;
      pe.back() += e;
    }
  }
  ChiSquareResult r;
  r.bins = pe.size();
  for (std::size_t i = 0; i < pe.size(); ++i) {
    if (pe[i] > 0.0) r.statistic += (po[i] - pe[i]) * (po[i] - pe[i]) / pe[i];
    else if (po[i] > 0.0) r.statistic = std::numeric_limits<double>::infinity();
  }
  r.dof = static_cast<double>(r.bins) - 1.0;
  r.p_value = r.dof > 0.0 ? chi_square_sf(r.statistic, r.dof) : 1.0;
  return r;
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw DomainError("total_variation: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("pearson_correlation: need two equal-length samples");
  Welford wx, wy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    wx.add(x[i]);
    wy.add(y[i]);
  }
  double cov = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) cov += (x[i] - wx.mean()) * (y[i] - wy.mean());
  cov /= static_cast<double>(x.size() - 1);
  const double denom = std::sqrt(wx.variance() * wy.variance());
  return denom > 0.0 ? cov / denom : 0.0;
}

double binomial_sigma(double p, std::uint64_t n) {
  return n ? std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n)) : 0.0;
}

}  // namespace gibbs
