#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cellopt/policy.hpp"
#include "cellopt/reward_net.hpp"
#include "cellopt/types.hpp"

namespace cellopt {

struct GAConfig {
  double step_size = 0.05;  // alpha, normalized coordinates
  int max_steps = 500;
  double tol = 1e-4;  // sup-norm step threshold
  int n_starts = 1;
  enum class Init { kUniform, kPolicy } init_source = Init::kUniform;
  double beta = 0.0;  // uncertainty-penalty coefficient

  void validate() const;
};

// Objective over the normalized box [0,1]^14.
class BoxObjective {
 public:
  virtual ~BoxObjective() = default;
  virtual double value(const std::array<double, kNumCps>& u) = 0;
  // Returns the objective and fills its gradient.
  virtual double value_grad(const std::array<double, kNumCps>& u,
                            std::array<double, kNumCps>& grad) = 0;
};

// mu - beta*sigma of an ensemble at a fixed state (covariate representations
// precomputed once per state).
class EnsembleObjective : public BoxObjective {
 public:
  EnsembleObjective(EnsembleExec& exec, const StateContext& ctx, double beta)
      : exec_(&exec), ctx_(&ctx), beta_(beta) {}
  double value(const std::array<double, kNumCps>& u) override;
  double value_grad(const std::array<double, kNumCps>& u,
                    std::array<double, kNumCps>& grad) override;
  MuSigma mu_sigma_at(const std::array<double, kNumCps>& u);

 private:
  EnsembleExec* exec_;
  const StateContext* ctx_;
  double beta_;
};

// One projected ascent step: clip(a + alpha * grad, 0, 1).
std::array<double, kNumCps> ga_step(BoxObjective& obj,
                                    const std::array<double, kNumCps>& a,
                                    double step_size);
std::array<double, kNumCps> ga_step(EnsembleExec& exec, const StateContext& ctx,
                                    const std::array<double, kNumCps>& a,
                                    double step_size, double beta);

struct OptimizeResult {
  std::array<double, kNumCps> action_norm{};
  double objective = 0.0;
  int steps = 0;  // ga_step evaluations performed
  std::vector<std::array<double, kNumCps>> trajectory;  // filled on request
};

// Iterates ga_step until the proposed move is below tol in sup norm (the
// pre-step iterate is returned then) or max_steps is reached.
OptimizeResult optimize(BoxObjective& obj, const std::array<double, kNumCps>& a0,
                        const GAConfig& cfg, bool record_trajectory = false);

struct StartResult {
  std::array<double, kNumCps> action_norm{};
  double objective = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
  int steps = 0;
  double wall_ms = 0.0;
};

struct GAResult {
  Action best_action;  // physical units
  std::array<double, kNumCps> best_norm{};
  double objective = 0.0;  // mu - beta*sigma at best_action
  double mu = 0.0;
  double sigma = 0.0;
  std::vector<int> steps_per_start;
  std::vector<StartResult> starts;
  double wall_time_sec = 0.0;
};

// n_starts independent runs; initial actions are uniform draws from the box
// or samples from the supplied policy. Start i uses the substream
// (seed, i) regardless of n_starts, so prefixes of a longer run coincide
// with shorter runs and the best objective is monotone in n_starts.
GAResult multi_start(EnsembleExec& exec, const NetworkState& s, const GAConfig& cfg,
                     const PolicyParams* policy, std::uint64_t seed);

// Result rows for the per-run CSV.
std::string ga_result_csv_header();
std::string ga_result_csv_row(std::uint64_t seed, const GAConfig& cfg,
                              const GAResult& r);

}  // namespace cellopt
