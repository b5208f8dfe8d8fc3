#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cellopt/action_opt.hpp"
#include "cellopt/dataset.hpp"
#include "cellopt/policy.hpp"
#include "cellopt/reward_net.hpp"
#include "cellopt/simnet.hpp"

namespace cellopt {

// Full benchmark configuration. Every seed in the run derives from
// master_seed, so a pipeline run is reproducible end to end from one number.
struct ExperimentConfig {
  SimConfig sim;
  TrainConfig train;
  OPPGConfig oppg;
  GAConfig ga;          // beta/n_starts for the method comparison and the sweep
  int ensemble_size = 5;
  std::size_t augment_k = 10;
  std::vector<double> beta_grid{0.0, 0.5, 1.0, 2.0, 5.0};
  std::size_t test_rows = 5000;
  std::size_t n_test_states = 1000;
  std::uint64_t master_seed = 1;
  std::string output_dir = "out";

  void validate() const;
};

// JSON config file, schema_version 1. Unknown keys are rejected.
ExperimentConfig load_experiment_config(const std::string& path);
std::string experiment_config_to_json(const ExperimentConfig& cfg);

struct PipelineError : std::runtime_error {
  std::string stage;
  PipelineError(std::string stage_name, const std::string& msg)
      : std::runtime_error("pipeline stage '" + stage_name + "': " + msg),
        stage(std::move(stage_name)) {}
};

// One evaluated (method, test state) pair. The predicted columns always come
// from the evaluation ensemble; objective/mu/sigma are the optimization
// ensemble's values captured during the gradient-ascent run and are absent
// for the pi0/pi_theta rows.
struct MethodStateRow {
  std::string method;       // pi0 | pi_theta | ga | ga_pi
  std::string init_source;  // uniform | policy | empty
  int n_starts = 0;
  double beta = 0.0;
  std::size_t state_idx = 0;
  int cell_id = 0, day = 0, hour = 0;
  double predicted_tp = 0.0;
  double predicted_sigma = 0.0;
  double true_tp = 0.0;
  bool has_opt = false;
  double objective = 0.0, mu = 0.0, sigma = 0.0;
  int steps = 0;
  Action action;
};

struct TimingRow {
  std::string method;
  std::string init_source;
  int n_starts = 0;
  std::size_t state_idx = 0;
  int steps = 0;
  double wall_ms = 0.0;
};

struct QueryAudit {
  std::uint64_t opt_queries_during_optimization = 0;
  std::uint64_t eval_queries_during_optimization = 0;
  std::uint64_t opt_queries_during_reporting = 0;
  std::uint64_t eval_queries_during_reporting = 0;
};

struct ExperimentReport {
  std::vector<MethodStateRow> rows;
  std::vector<TimingRow> timings;
  QueryAudit audit;
  std::string output_dir;
  unsigned parallelism = 1;
};

struct PipelineArtifacts {
  SimConfig sim;  // resolved (seed derived from master)
  GroundTruth truth;
  Dataset test_raw;
  std::vector<std::size_t> eval_rows;  // indices into test_raw
  RewardEnsemble opt_ensemble;
  RewardEnsemble eval_ensemble;
  PolicyParams policy;
};

struct PipelineResult {
  ExperimentReport report;
  PipelineArtifacts artifacts;
};

// generate -> split -> standardize -> augment (train only) -> fit the
// optimization and evaluation ensembles on disjoint bootstrap seed streams ->
// train the policy on factual train rows -> evaluate pi0 / pi_theta /
// GA(uniform) / GA(policy) at 1, 5, 10 starts on the test states -> write the
// report. Any stage failure removes this run's partial outputs and rethrows
// as PipelineError. Timing CSVs are the only non-deterministic outputs and
// are excluded from the manifest hashes.
PipelineResult run_pipeline(const ExperimentConfig& cfg);

struct BetaSweepRow {
  double beta = 0.0;
  std::size_t n_states = 0;
  double sigma_mean = 0.0, sigma_p50 = 0.0;
  double pred_tp_mean = 0.0, pred_tp_p50 = 0.0;
  double true_tp_mean = 0.0;
};

// GA + policy starts on the test states for each beta, same seed stream as
// the pipeline's hybrid arm (the beta = 0 row reproduces it exactly).
// sigma is the optimization ensemble's value at the returned action;
// predicted TP comes from the evaluation ensemble.
std::vector<BetaSweepRow> beta_sweep(const ExperimentConfig& cfg,
                                     const PipelineArtifacts& artifacts,
                                     const std::vector<double>& betas);
void write_beta_sweep_csv(const std::vector<BetaSweepRow>& rows,
                          const std::string& path);

}  // namespace cellopt
