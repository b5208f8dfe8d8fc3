#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cellopt/rng.hpp"

namespace cellopt {

inline constexpr double kPi = 3.14159265358979323846;

double norm_pdf(double x);
double norm_cdf(double x);
// Inverse standard-normal CDF, |error| < 1e-13 after one Halley refinement.
double norm_ppf(double p);

// Standard normal draw via the inverse CDF (portable across platforms,
// unlike the <random> distributions).
double std_normal(Rng& rng);

// Gaussian N(mean, sd) restricted to [lo, hi], density renormalized.
struct TruncatedNormal {
  double mean = 0.0;
  double sd = 1.0;
  double lo = 0.0;
  double hi = 1.0;

  double normalizer() const;       // Phi(beta) - Phi(alpha)
  double density(double x) const;  // 0 outside [lo, hi]
  double log_density(double x) const;
  double analytic_mean() const;
  double analytic_var() const;
  double sample(Rng& rng) const;  // inverse-CDF, one uniform per draw
};

double vec_mean(std::span<const double> v);
// Population standard deviation (divide by N).
double vec_std_pop(std::span<const double> v);
// Sample standard deviation (divide by N-1); 0 for N < 2.
double vec_std_sample(std::span<const double> v);

// Linear-interpolation percentile on a copy of v (index p/100*(n-1)).
double percentile(std::vector<double> v, double p);

// One-sided sign test: probability of >= wins successes in wins+losses fair
// coin flips. Ties must already be removed.
double sign_test_pvalue(std::size_t wins, std::size_t losses);

// One-sided paired test that mean(a - b) > 0, normal approximation on the
// t statistic (intended for n in the hundreds or more).
double paired_greater_pvalue(std::span<const double> a, std::span<const double> b);

}  // namespace cellopt
