#include "cellopt/action_opt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "cellopt/csv.hpp"
#include "cellopt/rng.hpp"

namespace cellopt {

void GAConfig::validate() const {
  if (!(step_size > 0.0)) throw std::invalid_argument("GAConfig: step_size must be > 0");
  if (tol < 0.0) throw std::invalid_argument("GAConfig: tol must be >= 0");
  if (n_starts < 1) throw std::invalid_argument("GAConfig: n_starts must be >= 1");
  if (beta < 0.0) throw std::invalid_argument("GAConfig: beta must be >= 0");
  if (max_steps < 1) throw std::invalid_argument("GAConfig: max_steps must be >= 1");
}

double EnsembleObjective::value(const std::array<double, kNumCps>& u) {
  MuSigma ms = exec_->predict_at(*ctx_, u);
  return ms.mu - beta_ * ms.sigma;
}

double EnsembleObjective::value_grad(const std::array<double, kNumCps>& u,
                                     std::array<double, kNumCps>& grad) {
  MuSigma ms = exec_->grad_penalized(*ctx_, u, beta_, grad);
  return ms.mu - beta_ * ms.sigma;
}

MuSigma EnsembleObjective::mu_sigma_at(const std::array<double, kNumCps>& u) {
  return exec_->predict_at(*ctx_, u);
}

std::array<double, kNumCps> ga_step(BoxObjective& obj,
                                    const std::array<double, kNumCps>& a,
                                    double step_size) {
  std::array<double, kNumCps> grad;
  obj.value_grad(a, grad);
  std::array<double, kNumCps> next;
  for (int i = 0; i < kNumCps; ++i) {
    if (!std::isfinite(grad[i]))
      throw std::runtime_error("ga_step: non-finite gradient in dimension " +
                               std::to_string(i));
    next[i] = std::min(std::max(a[i] + step_size * grad[i], 0.0), 1.0);
  }
  return next;
}

std::array<double, kNumCps> ga_step(EnsembleExec& exec, const StateContext& ctx,
                                    const std::array<double, kNumCps>& a,
                                    double step_size, double beta) {
  EnsembleObjective obj(exec, ctx, beta);
  return ga_step(obj, a, step_size);
}

OptimizeResult optimize(BoxObjective& obj, const std::array<double, kNumCps>& a0,
                        const GAConfig& cfg, bool record_trajectory) {
  cfg.validate();
  for (double v : a0)
    if (v < 0.0 || v > 1.0)
      throw std::invalid_argument("optimize: initial action outside the box");
  OptimizeResult res;
  std::array<double, kNumCps> a = a0;
  if (record_trajectory) res.trajectory.push_back(a);
  for (int k = 0; k < cfg.max_steps; ++k) {
    std::array<double, kNumCps> next = ga_step(obj, a, cfg.step_size);
    ++res.steps;
    double move = 0.0;
    for (int i = 0; i < kNumCps; ++i) move = std::max(move, std::abs(next[i] - a[i]));
    if (move < cfg.tol) break;  // keep the pre-step iterate
    a = next;
    if (record_trajectory) res.trajectory.push_back(a);
  }
  res.action_norm = a;
  res.objective = obj.value(a);
  return res;
}

GAResult multi_start(EnsembleExec& exec, const NetworkState& s, const GAConfig& cfg,
                     const PolicyParams* policy, std::uint64_t seed) {
  cfg.validate();
  if (cfg.init_source == GAConfig::Init::kPolicy && policy == nullptr)
    throw std::invalid_argument("multi_start: policy init requires a policy");

  auto t_total0 = std::chrono::steady_clock::now();
  StateContext ctx = exec.make_context(s);
  EnsembleObjective obj(exec, ctx, cfg.beta);
  const ActionBox& box = exec.ensemble().scaler->box;

  GAResult result;
  result.starts.reserve(static_cast<std::size_t>(cfg.n_starts));
  int best = -1;
  for (int i = 0; i < cfg.n_starts; ++i) {
    auto t0 = std::chrono::steady_clock::now();
    std::uint64_t start_seed =
        derive_seed(seed, {label_hash("start"), static_cast<std::uint64_t>(i)});
    std::array<double, kNumCps> a0;
    if (cfg.init_source == GAConfig::Init::kUniform) {
      Rng rng(start_seed);
      for (auto& v : a0) v = rng.uniform01();
    } else {
      a0 = policy_sample(*policy, s, start_seed).normalized(box);
      // Policy samples live in the closed box already; clamp fp rounding.
      for (auto& v : a0) v = std::min(std::max(v, 0.0), 1.0);
    }
    OptimizeResult run = optimize(obj, a0, cfg);
    MuSigma ms = obj.mu_sigma_at(run.action_norm);
    auto t1 = std::chrono::steady_clock::now();

    StartResult sr;
    sr.action_norm = run.action_norm;
    sr.objective = run.objective;
    sr.mu = ms.mu;
    sr.sigma = ms.sigma;
    sr.steps = run.steps;
    sr.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    result.starts.push_back(sr);
    result.steps_per_start.push_back(run.steps);
    if (best < 0 || sr.objective > result.starts[best].objective) best = i;
  }
  const StartResult& winner = result.starts[best];
  result.best_norm = winner.action_norm;
  result.best_action = Action::from_normalized(winner.action_norm, box);
  result.objective = winner.objective;
  result.mu = winner.mu;
  result.sigma = winner.sigma;
  auto t_total1 = std::chrono::steady_clock::now();
  result.wall_time_sec = std::chrono::duration<double>(t_total1 - t_total0).count();
  return result;
}

std::string ga_result_csv_header() {
  std::string h = "seed,init_source,n_starts,beta,objective,mu,sigma,steps,wall_time_ms";
  for (int i = 1; i <= kNumCps; ++i) h += ",cp_" + std::to_string(i);
  return h;
}

std::string ga_result_csv_row(std::uint64_t seed, const GAConfig& cfg,
                              const GAResult& r) {
  int total_steps = 0;
  for (int s : r.steps_per_start) total_steps += s;
  std::string row = std::to_string(seed);
  row += cfg.init_source == GAConfig::Init::kUniform ? ",uniform" : ",policy";
  row += "," + std::to_string(cfg.n_starts);
  row += "," + format_double(cfg.beta);
  row += "," + format_double(r.objective);
  row += "," + format_double(r.mu);
  row += "," + format_double(r.sigma);
  row += "," + std::to_string(total_steps);
  row += "," + format_double(r.wall_time_sec * 1000.0);
  for (double v : r.best_action.cp) row += "," + format_double(v);
  return row;
}

}  // namespace cellopt
