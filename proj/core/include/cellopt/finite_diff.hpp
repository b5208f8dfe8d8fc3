#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace cellopt {

// Central finite differences, (f(x + h e_i) - f(x - h e_i)) / 2h per
// coordinate. Independent of the tape; used as the gradient oracle.
inline std::vector<double> finite_difference(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_difference: h must be > 0");
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double xi = x[i];
    x[i] = xi + h;
    double fp = f(x);
    x[i] = xi - h;
    double fm = f(x);
    x[i] = xi;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw std::runtime_error("finite_difference: non-finite function value");
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Gradient-check convention shared by the test suites: relative error with an
// absolute fallback for near-zero coordinates (central differences at h=1e-5
// carry ~1e-10 absolute error themselves).
inline bool grad_close(double analytic, double numeric, double rel_tol = 1e-4,
                       double abs_tol = 1e-8) {
  double denom = std::max(std::abs(analytic), std::abs(numeric));
  if (std::abs(analytic - numeric) <= abs_tol) return true;
  return std::abs(analytic - numeric) / denom < rel_tol;
}

}  // namespace cellopt
