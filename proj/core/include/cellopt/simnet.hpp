#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "cellopt/rng.hpp"
#include "cellopt/types.hpp"

namespace cellopt {

class Dataset;  // dataset.hpp

// Engineering-parameter bounds used by the network generator.
const std::array<double, kNumEps>& ep_lower_bounds();
const std::array<double, kNumEps>& ep_upper_bounds();

struct SimConfig {
  int n_cells = 2945;
  int n_counters = 8;
  int window = 24;   // hours of counter history per state
  int n_days = 9;
  double noise_std = 1.0;       // Gaussian noise on observed throughput
  double logging_offset = 0.25; // logging-policy center offset from the optimum,
                                // fraction of the normalized box width
  double logging_sd = 0.15;     // logging-policy std in normalized coordinates
  std::uint64_t seed = 0;

  void validate() const;
};

// Fixed synthetic throughput function, Mbit/s per user:
//
//   TP(s, a) = base(s)
//            + sum_i w_i(s) * exp(-(u_i - m_i(s))^2 / (2 sigma_i^2))
//            + sum_{(i,j) in pairs} v_ij * u_i * u_j
//
// where u is the action in normalized [0,1] coordinates, m_i(s) in (0,1) is
// the per-state optimum of CP i and w_i(s) > 0 its weight, both smooth in the
// time features and scaled engineering parameters. Nonconvex in a, smooth,
// and for pairs = {} the per-dimension argmax is exactly m_i(s). The default
// coefficient tables below are module constants; tests construct variants.
struct GroundTruth {
  std::array<double, kNumCps> bump_weight;   // w0_i, modulated per state
  std::array<double, kNumCps> bump_sigma;    // sigma_i, normalized units
  struct Interaction {
    int i, j;
    double v;
  };
  std::vector<Interaction> pairs;
  double base_level = 18.0;
  double base_amp = 2.0;

  static GroundTruth defaults();

  // Per-state bump center m_i(s) and weight w_i(s).
  double bump_center(int dim, const NetworkState& s) const;
  double bump_weight_at(int dim, const NetworkState& s) const;
  double base(const NetworkState& s) const;

  // Noiseless TP; throws if the action lies outside the box.
  double throughput(const NetworkState& s, const Action& a,
                    const ActionBox& box = default_box()) const;
};

std::vector<CellSpec> generate_network(const SimConfig& cfg);

// Noiseless TP plus optional Gaussian observation noise drawn from a stream
// derived from noise_seed.
double true_reward(const GroundTruth& gt, const NetworkState& s, const Action& a,
                   double noise_std = 0.0,
                   std::optional<std::uint64_t> noise_seed = std::nullopt);

// Truncated-Gaussian logging policy centered at a deliberately suboptimal
// per-dimension heuristic. Density is reported in normalized action
// coordinates and is strictly positive on the whole box.
std::pair<Action, double> logging_policy(const GroundTruth& gt, const SimConfig& cfg,
                                         const NetworkState& s, Rng& rng);
double logging_density(const GroundTruth& gt, const SimConfig& cfg,
                       const NetworkState& s, const Action& a);

// Logged dataset: one action per cell per day held for 24 hourly rows,
// counters following an autoregressive load process with diurnal shape.
// Bit-identical for equal configs (per-(cell,day) RNG streams).
Dataset generate_dataset(const SimConfig& cfg,
                         const GroundTruth& gt = GroundTruth::defaults());

}  // namespace cellopt
