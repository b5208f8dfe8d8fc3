#include "cellopt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cellopt {

double norm_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
}

double norm_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

namespace {

// Acklam's rational approximation to the probit function.
double ppf_estimate(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double q = p - 0.5;
  double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double norm_ppf(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("norm_ppf: p must be in (0, 1)");
  double x = ppf_estimate(p);
  // One Halley step against the erfc-based CDF.
  double e = norm_cdf(x) - p;
  double u = e * std::sqrt(2.0 * kPi) * std::exp(0.5 * x * x);
  x = x - u / (1.0 + 0.5 * x * u);
  return x;
}

double std_normal(Rng& rng) {
  double u = rng.uniform01();
  u = std::min(std::max(u, 1e-12), 1.0 - 1e-12);
  return norm_ppf(u);
}

double TruncatedNormal::normalizer() const {
  return norm_cdf((hi - mean) / sd) - norm_cdf((lo - mean) / sd);
}

double TruncatedNormal::density(double x) const {
  if (x < lo || x > hi) return 0.0;
  return norm_pdf((x - mean) / sd) / (sd * normalizer());
}

double TruncatedNormal::log_density(double x) const {
  if (x < lo || x > hi) return -std::numeric_limits<double>::infinity();
  double z = (x - mean) / sd;
  return -0.5 * z * z - 0.5 * std::log(2.0 * kPi) - std::log(sd) -
         std::log(normalizer());
}

double TruncatedNormal::analytic_mean() const {
  double alpha = (lo - mean) / sd;
  double beta = (hi - mean) / sd;
  double z = normalizer();
  return mean + sd * (norm_pdf(alpha) - norm_pdf(beta)) / z;
}

double TruncatedNormal::analytic_var() const {
  double alpha = (lo - mean) / sd;
  double beta = (hi - mean) / sd;
  double z = normalizer();
  double pa = norm_pdf(alpha), pb = norm_pdf(beta);
  double term = (alpha * pa - beta * pb) / z;
  double shift = (pa - pb) / z;
  return sd * sd * (1.0 + term - shift * shift);
}

double TruncatedNormal::sample(Rng& rng) const {
  double ca = norm_cdf((lo - mean) / sd);
  double cb = norm_cdf((hi - mean) / sd);
  double u = ca + rng.uniform01() * (cb - ca);
  // Guard against u hitting an exact CDF endpoint in floating point.
  u = std::min(std::max(u, std::numeric_limits<double>::min()),
               1.0 - std::numeric_limits<double>::epsilon() / 2);
  double x = mean + sd * norm_ppf(u);
  return std::min(std::max(x, lo), hi);
}

double vec_mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double vec_std_pop(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double m = vec_mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

double vec_std_sample(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double m = vec_mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double percentile(std::vector<double> v, double p) {
  if (v.empty()) throw std::invalid_argument("percentile: empty vector");
  std::sort(v.begin(), v.end());
  double idx = p / 100.0 * static_cast<double>(v.size() - 1);
  std::size_t i = static_cast<std::size_t>(idx);
  if (i + 1 >= v.size()) return v.back();
  double frac = idx - static_cast<double>(i);
  return v[i] * (1.0 - frac) + v[i + 1] * frac;
}

double sign_test_pvalue(std::size_t wins, std::size_t losses) {
  std::size_t n = wins + losses;
  if (n == 0) return 1.0;
  // P[X >= wins], X ~ Binomial(n, 1/2), summed in log space.
  double p = 0.0;
  double log_half = std::log(0.5);
  for (std::size_t k = wins; k <= n; ++k) {
    double log_choose = std::lgamma(static_cast<double>(n) + 1.0) -
                        std::lgamma(static_cast<double>(k) + 1.0) -
                        std::lgamma(static_cast<double>(n - k) + 1.0);
    p += std::exp(log_choose + static_cast<double>(n) * log_half);
  }
  return std::min(p, 1.0);
}

double paired_greater_pvalue(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2)
    throw std::invalid_argument("paired_greater_pvalue: need equal sizes >= 2");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  double m = vec_mean(d);
  double sd = vec_std_sample(d);
  if (sd == 0.0) return m > 0.0 ? 0.0 : 1.0;
  double t = m / (sd / std::sqrt(static_cast<double>(d.size())));
  return 1.0 - norm_cdf(t);
}

}  // namespace cellopt
