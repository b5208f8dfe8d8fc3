#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cellopt/dataset.hpp"
#include "cellopt/reward_net.hpp"
#include "cellopt/types.hpp"

namespace cellopt {

// Stochastic policy: tanh trunk over cheap state features (time, EP,
// per-counter window means), a sigmoid mean head mapping into the normalized
// box, and learnable per-dimension log stds. Each dimension is a Gaussian
// truncated to [0,1] with an exact normalizer, so the density is evaluable
// everywhere IPS needs it.
struct PolicyDims {
  int n_counters = 8;
  int hidden = 64;
  int state_dim() const { return kNumTimeFeatures + kNumEps + n_counters; }
  bool operator==(const PolicyDims&) const = default;
};

struct OPPGConfig {
  double truncation = 10.0;  // M, importance-weight cap
  double learning_rate = 0.01;
  int epochs = 30;
  int minibatch = 256;
  bool baseline = false;  // subtract the batch-mean reward
  std::uint64_t seed = 0;
};

struct PolicyParams {
  PolicyDims dims;
  std::vector<double> params;
  std::shared_ptr<const Standardizer> scaler;

  // Layout: trunk_W (hidden x S), trunk_b, mean_W (14 x hidden), mean_b,
  // log_std (14). Also the checkpoint blob order.
  std::size_t param_count() const;
  std::span<double> trunk_w();
  std::span<double> trunk_b();
  std::span<double> mean_w();
  std::span<double> mean_b();
  std::span<double> log_std();
  std::span<const double> trunk_w() const;
  std::span<const double> trunk_b() const;
  std::span<const double> mean_w() const;
  std::span<const double> mean_b() const;
  std::span<const double> log_std() const;

  // Zero mean head (all dimensions start centered in the box), tanh trunk
  // with uniform(+-1/sqrt(S)) weights, stds at 0.2.
  static PolicyParams init(const PolicyDims& dims,
                           std::shared_ptr<const Standardizer> scaler,
                           std::uint64_t seed);
};

inline constexpr double kPolicyMinStd = 1e-3;
inline constexpr double kPolicyMaxStd = 1.0;

// Standardized policy features of a raw state: time, EP, per-counter mean of
// the standardized window.
std::vector<double> policy_state_features(const NetworkState& s,
                                          const Standardizer& scaler);

struct PolicyHeads {
  std::array<double, kNumCps> mean;  // in (0,1)
  std::array<double, kNumCps> sd;    // clamped to [1e-3, 1]
};
PolicyHeads policy_heads(const PolicyParams& p, const NetworkState& s);

Action policy_sample(const PolicyParams& p, const NetworkState& s,
                     std::uint64_t seed);

// Sum of per-dimension truncated-normal log densities in normalized
// coordinates; -inf outside the box.
double policy_log_density(const PolicyParams& p, const NetworkState& s,
                          const Action& a);

// Accumulates weight * d log pi(a|s) / d theta into grad (closed-form
// truncated-normal score chained through the two-layer net).
void policy_score_accumulate(const PolicyParams& p, const NetworkState& s,
                             const Action& a, double weight,
                             std::span<double> grad);

struct IpsEstimate {
  double value = 0.0;
  double term_variance = 0.0;  // empirical variance of the weighted terms
  std::size_t n = 0;
};

// (1/N) sum (pi/pi0) r over factual rows. The generic form takes any
// evaluable target density pi(a_i | s_i) so that evaluating the logging
// policy itself reproduces the sample-mean reward with unit weights.
IpsEstimate ips_estimate(const Dataset& d,
                         const std::function<double(const LoggedInteraction&)>& target_density);
IpsEstimate ips_estimate(const Dataset& d, const PolicyParams& p);

// Truncated off-policy policy gradient over one batch:
// (1/N) sum min{pi/pi0, M} (r - baseline) grad log pi. The capped weight is
// treated as a constant (no gradient through the min).
std::vector<double> oppg_gradient(std::span<const LoggedInteraction> batch,
                                  const PolicyParams& p, double truncation,
                                  bool baseline);

struct OppgTrainLog {
  std::vector<double> ips_per_epoch;  // untruncated estimate, diagnostic
};

// Minibatch ascent of the truncated-IPS objective with Adam; deterministic
// per seed. d must be raw factual rows with positive propensities.
PolicyParams train_oppg(const Dataset& d, const OPPGConfig& cfg,
                        std::shared_ptr<const Standardizer> scaler,
                        OppgTrainLog* log = nullptr);

// Predicted-TP distribution of the evaluation ensemble at the supplied
// actions, one per state.
struct ValueDistribution {
  std::vector<double> values;
  double mean() const;
  double quantile(double p) const;  // linear interpolation
};
ValueDistribution dm_value(EnsembleExec& eval_exec,
                           std::span<const NetworkState> states,
                           std::span<const Action> actions);

void save_policy(const PolicyParams& p, const std::string& dir,
                 const std::string& basename);
PolicyParams load_policy(const std::string& dir, const std::string& basename);

}  // namespace cellopt
