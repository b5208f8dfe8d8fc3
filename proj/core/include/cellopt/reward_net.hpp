#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cellopt/dataset.hpp"
#include "cellopt/tape.hpp"
#include "cellopt/types.hpp"

namespace cellopt {

// Throughput-prediction network with one 50-unit representation per input
// modality: affine heads for time features and engineering parameters, a GRU
// over the counter window (last hidden state), a tanh covariate
// representation merging the three, and CP features joining only after it,
// through the affine+relu output stack.
struct RewardNetDims {
  int n_counters = 8;
  int window = 24;
  int hidden = 50;

  int cov_input() const { return 3 * hidden; }
  int head_input() const { return 2 * hidden; }
  int state_feature_dim() const {
    return kNumTimeFeatures + kNumEps + window * n_counters;
  }
  bool operator==(const RewardNetDims&) const = default;
};

struct TensorSpec {
  std::string name;
  int rows = 0;
  int cols = 0;  // 0 for vectors
  std::size_t offset = 0;
  std::size_t count() const {
    return static_cast<std::size_t>(rows) * (cols == 0 ? 1 : cols);
  }
};

// Declared parameter ordering; also the checkpoint blob layout.
std::vector<TensorSpec> reward_net_layout(const RewardNetDims& dims);
std::size_t reward_net_param_count(const RewardNetDims& dims);

struct TrainConfig {
  double learning_rate = 1e-3;  // Adam, beta1 0.9 / beta2 0.999
  int epochs = 20;
  int minibatch = 64;
  double init_scale = 1.0;  // uniform(+-scale/sqrt(fan_in)) weights, zero biases
  std::uint64_t seed = 0;
};

struct RewardNet {
  RewardNetDims dims;
  std::vector<double> params;
  std::uint64_t init_seed = 0;

  static RewardNet zeros(const RewardNetDims& dims);
  static RewardNet random_init(const RewardNetDims& dims, double init_scale,
                               std::uint64_t seed);
};

// Tape executor for one member. Owns the value/adjoint slots, so use one
// instance per concurrent caller; parameters are bound by copy and never
// mutated through the tapes.
class RewardNetExec {
 public:
  explicit RewardNetExec(const RewardNetDims& dims);

  // Copies net.params into the tapes. Call again after mutating parameters.
  void bind_params(const RewardNet& net);

  // Standardized-space scalar prediction.
  double predict_std(std::span<const double> state_features,
                     const std::array<double, kNumCps>& action_norm);

  // Prediction gradient w.r.t. the normalized action, standardized scale,
  // computed on the full graph.
  double predict_grad_std(std::span<const double> state_features,
                          const std::array<double, kNumCps>& action_norm,
                          std::array<double, kNumCps>& grad_out);

  // Squared-error loss for one sample; accumulates parameter gradients into
  // grad_accum (layout order).
  double loss_accumulate_grad(std::span<const double> state_features,
                              const std::array<double, kNumCps>& action_norm,
                              double target_std, std::span<double> grad_accum);

  // Covariate representation of a state: everything upstream of the action.
  std::vector<double> covariate_rep(std::span<const double> state_features);

  // Last GRU hidden state over the counter window (the counter
  // representation), exposed for recurrence tests.
  std::vector<double> counter_rep(std::span<const double> state_features);

  // Action head on a precomputed covariate representation; the fast path for
  // gradient ascent. Identical to the full graph by construction.
  double head_predict(std::span<const double> cov_rep,
                      const std::array<double, kNumCps>& action_norm);
  double head_predict_grad(std::span<const double> cov_rep,
                           const std::array<double, kNumCps>& action_norm,
                           std::array<double, kNumCps>& grad_out);

  // Structural introspection used by the architecture tests.
  const Tape& full_tape() const { return full_; }
  NodeId cov_node() const { return full_cov_; }
  NodeId cp_leaf() const { return full_cp_; }
  NodeId pred_node() const { return full_pred_; }

 private:
  RewardNetDims dims_;
  std::vector<TensorSpec> layout_;

  Tape train_, full_, cov_, head_;
  NodeId full_cov_ = -1, full_cp_ = -1, full_pred_ = -1;
  bool params_bound_ = false;
};

struct MuSigma {
  double mu;
  double sigma;
};

// K independently trained members plus the standardizer they were trained
// under. Predictions are de-standardized, so mu/sigma are in raw TP units.
// The query counter instruments every predict/gradient call for the
// two-ensemble protocol audit.
struct RewardEnsemble {
  RewardNetDims dims;
  std::vector<RewardNet> members;
  std::vector<std::uint64_t> member_seeds;
  std::shared_ptr<const Standardizer> scaler;
  std::string name = "ensemble";
  std::shared_ptr<std::atomic<std::uint64_t>> query_count =
      std::make_shared<std::atomic<std::uint64_t>>(0);

  std::size_t size() const { return members.size(); }
  std::uint64_t queries() const { return query_count->load(); }
};

// Minimizes MSE on standardized rewards with Adam; deterministic per seed.
// Returns the trained member and the per-epoch mean loss history.
std::pair<RewardNet, std::vector<double>> train(const Dataset& d,
                                                const TrainConfig& cfg,
                                                const RewardNetDims& dims);

// Member k trains on bootstrap_sample(d, seed_k); seeds derive from
// cfg.seed. d must be standardized (its scaler is kept for prediction).
RewardEnsemble ensemble_fit(const Dataset& d, int ensemble_size,
                            const TrainConfig& cfg, const RewardNetDims& dims,
                            std::string name = "ensemble");

// Precomputed per-member covariate representations for one state, reused
// across gradient-ascent steps.
struct StateContext {
  std::vector<double> state_features_std;
  std::vector<std::vector<double>> cov_reps;  // one per member
};

// Executor bundle for a whole ensemble (one RewardNetExec per member).
class EnsembleExec {
 public:
  explicit EnsembleExec(const RewardEnsemble& e);

  const RewardEnsemble& ensemble() const { return *ensemble_; }

  MuSigma predict(const NetworkState& s, const Action& a);
  StateContext make_context(const NetworkState& s);
  MuSigma predict_at(const StateContext& ctx, const std::array<double, kNumCps>& u);

  // Gradient of mu - beta*sigma w.r.t. the normalized action (raw TP units).
  // At sigma = 0 the penalty term's gradient is taken as zero.
  MuSigma grad_penalized(const StateContext& ctx,
                         const std::array<double, kNumCps>& u, double beta,
                         std::array<double, kNumCps>& grad_out);

  std::vector<double> standardize_state(const NetworkState& s) const;

 private:
  const RewardEnsemble* ensemble_;
  std::vector<std::unique_ptr<RewardNetExec>> execs_;
};

// Convenience single-call forms of the ensemble operations.
MuSigma ensemble_predict(const RewardEnsemble& e, const NetworkState& s,
                         const Action& a);
MuSigma ensemble_grad_action(const RewardEnsemble& e, const NetworkState& s,
                             const Action& a, double beta,
                             std::array<double, kNumCps>& grad_out);

// Raw-scale prediction and action-gradient of a single member under a scaler.
double member_predict(RewardNetExec& exec, const Standardizer& scaler,
                      const NetworkState& s, const Action& a);
std::array<double, kNumCps> member_grad_action(RewardNetExec& exec,
                                               const Standardizer& scaler,
                                               const NetworkState& s,
                                               const Action& a);

void save_ensemble(const RewardEnsemble& e, const std::string& dir,
                   const std::string& basename);
RewardEnsemble load_ensemble(const std::string& dir, const std::string& basename);

}  // namespace cellopt
