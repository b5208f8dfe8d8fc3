#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace cellopt {

// Adam with the bias-corrected update. Fixed beta1/beta2 across the library.
class Adam {
 public:
  explicit Adam(std::size_t n, double lr)
      : lr_(lr), m_(n, 0.0), v_(n, 0.0) {}

  // Gradient-descent step; pass the negated gradient to ascend.
  void step(std::span<double> params, std::span<const double> grad) {
    if (params.size() != m_.size() || grad.size() != m_.size())
      throw std::invalid_argument("Adam::step: size mismatch");
    ++t_;
    double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < m_.size(); ++i) {
      m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * grad[i];
      v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * grad[i] * grad[i];
      double mhat = m_[i] / c1;
      double vhat = v_[i] / c2;
      params[i] -= lr_ * mhat / (std::sqrt(vhat) + kEps);
    }
  }

  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

 private:
  double lr_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace cellopt
