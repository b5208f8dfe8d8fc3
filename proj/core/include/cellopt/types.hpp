#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "cellopt/matrix.hpp"

namespace cellopt {

inline constexpr int kNumCps = 14;          // tunable configuration parameters
inline constexpr int kNumEps = 6;           // static engineering parameters
inline constexpr int kNumTimeFeatures = 4;  // hour sin/cos, day-of-week sin/cos

// Per-dimension allowed range of the configuration parameters. Optimizers
// work in normalized [0,1] coordinates; the box converts to physical units.
struct ActionBox {
  std::array<double, kNumCps> lo;
  std::array<double, kNumCps> hi;

  bool contains(const std::array<double, kNumCps>& cp) const {
    for (int i = 0; i < kNumCps; ++i)
      if (cp[i] < lo[i] || cp[i] > hi[i]) return false;
    return true;
  }
  double normalize(int i, double v) const { return (v - lo[i]) / (hi[i] - lo[i]); }
  double denormalize(int i, double u) const { return lo[i] + u * (hi[i] - lo[i]); }
  double width(int i) const { return hi[i] - lo[i]; }
};

// The 14 CP ranges are generic (the physical meaning of each CP is not part
// of this toolkit); they are deliberately heterogeneous so that unit handling
// is exercised everywhere.
inline const ActionBox& default_box() {
  static const ActionBox box = [] {
    ActionBox b{};
    const double lo[kNumCps] = {0, 0, -10, -10, 0,  0,  0, 0, -6, 1,  0,  0,  5,  0};
    const double hi[kNumCps] = {12, 12, 10, 10, 20, 20, 8, 8, 6,  15, 40, 40, 25, 100};
    for (int i = 0; i < kNumCps; ++i) {
      b.lo[i] = lo[i];
      b.hi[i] = hi[i];
    }
    return b;
  }();
  return box;
}

// 14-dimensional configuration-parameter vector in physical units.
struct Action {
  std::array<double, kNumCps> cp{};

  std::array<double, kNumCps> normalized(const ActionBox& box) const {
    std::array<double, kNumCps> u;
    for (int i = 0; i < kNumCps; ++i) u[i] = box.normalize(i, cp[i]);
    return u;
  }
  static Action from_normalized(const std::array<double, kNumCps>& u,
                                const ActionBox& box) {
    Action a;
    for (int i = 0; i < kNumCps; ++i) a.cp[i] = box.denormalize(i, u[i]);
    return a;
  }
};

struct CellSpec {
  int cell_id = 0;
  std::array<double, kNumEps> ep{};  // tilt/azimuth/height style attributes
  double x_km = 0.0;
  double y_km = 0.0;
};

// One cell's context: time features, engineering parameters and a recent
// window of hourly counter vectors (row 0 oldest, row T-1 the current hour).
struct NetworkState {
  CellSpec cell;
  std::array<double, kNumTimeFeatures> time_features{};
  Matrix counters;  // window x n_counters

  int window() const { return static_cast<int>(counters.rows); }
  int n_counters() const { return static_cast<int>(counters.cols); }
};

inline std::array<double, kNumTimeFeatures> time_features_for(int day, int hour) {
  constexpr double two_pi = 6.28318530717958647692;
  std::array<double, kNumTimeFeatures> t;
  t[0] = std::sin(two_pi * hour / 24.0);
  t[1] = std::cos(two_pi * hour / 24.0);
  t[2] = std::sin(two_pi * (day % 7) / 7.0);
  t[3] = std::cos(two_pi * (day % 7) / 7.0);
  return t;
}

}  // namespace cellopt
