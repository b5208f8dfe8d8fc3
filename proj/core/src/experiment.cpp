#include "cellopt/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "cellopt/checkpoint.hpp"
#include "cellopt/csv.hpp"
#include "cellopt/parallel.hpp"
#include "cellopt/rng.hpp"
#include "cellopt/stats.hpp"

namespace fs = std::filesystem;

namespace cellopt {

void ExperimentConfig::validate() const {
  sim.validate();
  ga.validate();
  if (ensemble_size < 1)
    throw std::invalid_argument("ExperimentConfig: ensemble_size must be >= 1");
  if (beta_grid.empty())
    throw std::invalid_argument("ExperimentConfig: beta_grid must not be empty");
  if (n_test_states == 0 || n_test_states > test_rows)
    throw std::invalid_argument(
        "ExperimentConfig: n_test_states must be in [1, test_rows]");
  if (output_dir.empty())
    throw std::invalid_argument("ExperimentConfig: output_dir must be set");
}

namespace {

void reject_unknown_keys(const nlohmann::json& j,
                         std::initializer_list<const char*> known,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw std::runtime_error("config: unknown key '" + it.key() + "' in " + where);
  }
}

template <typename T>
void get_if(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: cannot open " + path);
  nlohmann::json j = nlohmann::json::parse(f);
  reject_unknown_keys(j,
                      {"schema_version", "sim", "train", "oppg", "ga", "ensemble_size",
                       "augment_k", "beta_grid", "test_rows", "n_test_states",
                       "master_seed", "output_dir"},
                      "top level");
  if (!j.contains("schema_version") || j.at("schema_version").get<int>() != 1)
    throw std::runtime_error("config: schema_version must be 1");

  ExperimentConfig cfg;
  if (j.contains("sim")) {
    const auto& s = j.at("sim");
    reject_unknown_keys(s,
                        {"n_cells", "n_counters", "window", "n_days", "noise_std",
                         "logging_offset", "logging_sd"},
                        "sim");
    get_if(s, "n_cells", cfg.sim.n_cells);
    get_if(s, "n_counters", cfg.sim.n_counters);
    get_if(s, "window", cfg.sim.window);
    get_if(s, "n_days", cfg.sim.n_days);
    get_if(s, "noise_std", cfg.sim.noise_std);
    get_if(s, "logging_offset", cfg.sim.logging_offset);
    get_if(s, "logging_sd", cfg.sim.logging_sd);
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    reject_unknown_keys(t, {"learning_rate", "epochs", "minibatch", "init_scale"},
                        "train");
    get_if(t, "learning_rate", cfg.train.learning_rate);
    get_if(t, "epochs", cfg.train.epochs);
    get_if(t, "minibatch", cfg.train.minibatch);
    get_if(t, "init_scale", cfg.train.init_scale);
  }
  if (j.contains("oppg")) {
    const auto& o = j.at("oppg");
    reject_unknown_keys(
        o, {"truncation", "learning_rate", "epochs", "minibatch", "baseline"}, "oppg");
    get_if(o, "truncation", cfg.oppg.truncation);
    get_if(o, "learning_rate", cfg.oppg.learning_rate);
    get_if(o, "epochs", cfg.oppg.epochs);
    get_if(o, "minibatch", cfg.oppg.minibatch);
    get_if(o, "baseline", cfg.oppg.baseline);
  }
  if (j.contains("ga")) {
    const auto& g = j.at("ga");
    reject_unknown_keys(
        g, {"step_size", "max_steps", "tol", "n_starts", "init_source", "beta"}, "ga");
    get_if(g, "step_size", cfg.ga.step_size);
    get_if(g, "max_steps", cfg.ga.max_steps);
    get_if(g, "tol", cfg.ga.tol);
    get_if(g, "n_starts", cfg.ga.n_starts);
    if (g.contains("init_source")) {
      std::string s = g.at("init_source").get<std::string>();
      if (s == "uniform")
        cfg.ga.init_source = GAConfig::Init::kUniform;
      else if (s == "policy")
        cfg.ga.init_source = GAConfig::Init::kPolicy;
      else
        throw std::runtime_error("config: ga.init_source must be uniform|policy");
    }
    get_if(g, "beta", cfg.ga.beta);
  }
  get_if(j, "ensemble_size", cfg.ensemble_size);
  get_if(j, "augment_k", cfg.augment_k);
  get_if(j, "beta_grid", cfg.beta_grid);
  get_if(j, "test_rows", cfg.test_rows);
  get_if(j, "n_test_states", cfg.n_test_states);
  get_if(j, "master_seed", cfg.master_seed);
  get_if(j, "output_dir", cfg.output_dir);
  cfg.validate();
  return cfg;
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["sim"] = {{"n_cells", cfg.sim.n_cells},
              {"n_counters", cfg.sim.n_counters},
              {"window", cfg.sim.window},
              {"n_days", cfg.sim.n_days},
              {"noise_std", cfg.sim.noise_std},
              {"logging_offset", cfg.sim.logging_offset},
              {"logging_sd", cfg.sim.logging_sd}};
  j["train"] = {{"learning_rate", cfg.train.learning_rate},
                {"epochs", cfg.train.epochs},
                {"minibatch", cfg.train.minibatch},
                {"init_scale", cfg.train.init_scale}};
  j["oppg"] = {{"truncation", cfg.oppg.truncation},
               {"learning_rate", cfg.oppg.learning_rate},
               {"epochs", cfg.oppg.epochs},
               {"minibatch", cfg.oppg.minibatch},
               {"baseline", cfg.oppg.baseline}};
  j["ga"] = {{"step_size", cfg.ga.step_size},
             {"max_steps", cfg.ga.max_steps},
             {"tol", cfg.ga.tol},
             {"n_starts", cfg.ga.n_starts},
             {"init_source",
              cfg.ga.init_source == GAConfig::Init::kUniform ? "uniform" : "policy"},
             {"beta", cfg.ga.beta}};
  j["ensemble_size"] = cfg.ensemble_size;
  j["augment_k"] = cfg.augment_k;
  j["beta_grid"] = cfg.beta_grid;
  j["test_rows"] = cfg.test_rows;
  j["n_test_states"] = cfg.n_test_states;
  j["master_seed"] = cfg.master_seed;
  j["output_dir"] = cfg.output_dir;
  return j.dump(2);
}

namespace {

constexpr int kStartCounts[] = {1, 5, 10};

struct FileTracker {
  std::vector<std::string> created;
  void add(const std::string& path) { created.push_back(path); }
  void remove_all() {
    for (const auto& p : created) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }
};

std::string method_row_csv_header() {
  std::string h =
      "method,init_source,n_starts,beta,state_idx,cell_id,day,hour,"
      "predicted_tp,predicted_sigma,true_tp,objective,mu,sigma,steps";
  for (int i = 1; i <= kNumCps; ++i) h += ",cp_" + std::to_string(i);
  return h;
}

void append_method_row(std::string& buf, const MethodStateRow& r) {
  buf += r.method;
  buf += ',';
  buf += r.init_source;
  buf += ',';
  buf += std::to_string(r.n_starts);
  buf += ',';
  if (r.has_opt) buf += format_double(r.beta);
  buf += ',';
  buf += std::to_string(r.state_idx);
  buf += ',';
  buf += std::to_string(r.cell_id);
  buf += ',';
  buf += std::to_string(r.day);
  buf += ',';
  buf += std::to_string(r.hour);
  buf += ',';
  buf += format_double(r.predicted_tp);
  buf += ',';
  buf += format_double(r.predicted_sigma);
  buf += ',';
  buf += format_double(r.true_tp);
  buf += ',';
  if (r.has_opt) buf += format_double(r.objective);
  buf += ',';
  if (r.has_opt) buf += format_double(r.mu);
  buf += ',';
  if (r.has_opt) buf += format_double(r.sigma);
  buf += ',';
  buf += std::to_string(r.steps);
  for (double v : r.action.cp) {
    buf += ',';
    buf += format_double(v);
  }
  buf += '\n';
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw std::runtime_error("write failed for " + path);
}

struct MethodGroup {
  std::string method, init_source;
  int n_starts;
  double beta;
  bool has_opt;
  std::vector<double> pred, true_tp, steps;
};

void write_summary_csv(const std::vector<MethodStateRow>& rows,
                       const std::string& path) {
  // Group in first-appearance order.
  std::vector<MethodGroup> groups;
  auto find_group = [&](const MethodStateRow& r) -> MethodGroup& {
    for (auto& g : groups)
      if (g.method == r.method && g.init_source == r.init_source &&
          g.n_starts == r.n_starts)
        return g;
    groups.push_back({r.method, r.init_source, r.n_starts, r.beta, r.has_opt, {}, {}, {}});
    return groups.back();
  };
  for (const auto& r : rows) {
    MethodGroup& g = find_group(r);
    g.pred.push_back(r.predicted_tp);
    g.true_tp.push_back(r.true_tp);
    g.steps.push_back(static_cast<double>(r.steps));
  }
  std::string buf =
      "method,init_source,n_starts,beta,n_states,pred_tp_mean,pred_tp_p5,"
      "pred_tp_p25,pred_tp_p50,pred_tp_p75,pred_tp_p95,true_tp_mean,true_tp_p50,"
      "steps_mean,steps_p50\n";
  for (const auto& g : groups) {
    buf += g.method + "," + g.init_source + "," + std::to_string(g.n_starts) + ",";
    if (g.has_opt) buf += format_double(g.beta);
    buf += "," + std::to_string(g.pred.size());
    buf += "," + format_double(vec_mean(g.pred));
    for (double p : {5.0, 25.0, 50.0, 75.0, 95.0})
      buf += "," + format_double(percentile(g.pred, p));
    buf += "," + format_double(vec_mean(g.true_tp));
    buf += "," + format_double(percentile(g.true_tp, 50.0));
    buf += "," + format_double(vec_mean(g.steps));
    buf += "," + format_double(percentile(g.steps, 50.0));
    buf += "\n";
  }
  write_text_file(path, buf);
}

void write_timings(const std::vector<TimingRow>& timings, unsigned parallelism,
                   const std::string& dir) {
  std::string buf = "method,init_source,n_starts,state_idx,steps,wall_ms\n";
  for (const auto& t : timings) {
    buf += t.method + "," + t.init_source + "," + std::to_string(t.n_starts) + "," +
           std::to_string(t.state_idx) + "," + std::to_string(t.steps) + "," +
           format_double(t.wall_ms) + "\n";
  }
  write_text_file(dir + "/timings.csv", buf);

  struct Key {
    std::string method, init;
    int n;
  };
  std::vector<Key> keys;
  std::vector<std::vector<double>> walls, steps;
  for (const auto& t : timings) {
    std::size_t gi = 0;
    for (; gi < keys.size(); ++gi)
      if (keys[gi].method == t.method && keys[gi].init == t.init_source &&
          keys[gi].n == t.n_starts)
        break;
    if (gi == keys.size()) {
      keys.push_back({t.method, t.init_source, t.n_starts});
      walls.emplace_back();
      steps.emplace_back();
    }
    walls[gi].push_back(t.wall_ms);
    steps[gi].push_back(static_cast<double>(t.steps));
  }
  std::string sbuf =
      "method,init_source,n_starts,n_states,total_serial_ms,wall_ms_p25,"
      "wall_ms_p50,wall_ms_p75,steps_p50,parallelism\n";
  for (std::size_t gi = 0; gi < keys.size(); ++gi) {
    double total = 0.0;
    for (double w : walls[gi]) total += w;
    sbuf += keys[gi].method + "," + keys[gi].init + "," + std::to_string(keys[gi].n) +
            "," + std::to_string(walls[gi].size()) + "," + format_double(total);
    for (double p : {25.0, 50.0, 75.0}) sbuf += "," + format_double(percentile(walls[gi], p));
    sbuf += "," + format_double(percentile(steps[gi], 50.0));
    sbuf += "," + std::to_string(parallelism) + "\n";
  }
  write_text_file(dir + "/timings_summary.csv", sbuf);
}

// Best start among the first n of a run; strict comparison keeps the
// earliest maximum, matching multi_start's own winner selection.
std::size_t best_prefix_start(const GAResult& res, int n) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < static_cast<std::size_t>(n); ++j)
    if (res.starts[j].objective > res.starts[best].objective) best = j;
  return best;
}

// Evaluates pi0, pi_theta and both GA arms on the test states. The loop is
// serial: per-state wall times stay clean and ensemble query counters can be
// attributed to the optimization vs reporting phase without races.
void evaluate_methods(const ExperimentConfig& cfg, const PipelineArtifacts& art,
                      ExperimentReport& report) {
  EnsembleExec opt_exec(art.opt_ensemble);
  EnsembleExec eval_exec(art.eval_ensemble);
  const ActionBox& box = art.opt_ensemble.scaler->box;
  const int max_starts = kStartCounts[2];

  QueryAudit audit;
  for (std::size_t si = 0; si < art.eval_rows.size(); ++si) {
    const LoggedInteraction& row = art.test_raw.rows[art.eval_rows[si]];

    Action policy_action = policy_sample(
        art.policy, row.state,
        derive_seed(cfg.master_seed, {label_hash("eval-policy"), si}));

    // Optimization phase: only the optimization ensemble may be queried.
    std::uint64_t o0 = art.opt_ensemble.queries();
    std::uint64_t e0 = art.eval_ensemble.queries();
    GAConfig ga = cfg.ga;
    ga.n_starts = max_starts;
    ga.init_source = GAConfig::Init::kUniform;
    GAResult uni = multi_start(opt_exec, row.state, ga, nullptr,
                               derive_seed(cfg.master_seed, {label_hash("ga-uniform"), si}));
    ga.init_source = GAConfig::Init::kPolicy;
    GAResult pol = multi_start(opt_exec, row.state, ga, &art.policy,
                               derive_seed(cfg.master_seed, {label_hash("ga-policy"), si}));
    audit.opt_queries_during_optimization += art.opt_ensemble.queries() - o0;
    audit.eval_queries_during_optimization += art.eval_ensemble.queries() - e0;

    // Reporting phase: only the evaluation ensemble and the simulator.
    o0 = art.opt_ensemble.queries();
    e0 = art.eval_ensemble.queries();
    StateContext ectx = eval_exec.make_context(row.state);

    auto report_action = [&](std::string method, std::string init, int n_starts,
                             const Action& action) {
      MethodStateRow r;
      r.method = std::move(method);
      r.init_source = std::move(init);
      r.n_starts = n_starts;
      r.state_idx = si;
      r.cell_id = row.state.cell.cell_id;
      r.day = row.day;
      r.hour = row.hour;
      MuSigma ms = eval_exec.predict_at(ectx, action.normalized(box));
      r.predicted_tp = ms.mu;
      r.predicted_sigma = ms.sigma;
      r.true_tp = art.truth.throughput(row.state, action);
      r.action = action;
      return r;
    };

    report.rows.push_back(report_action("pi0", "", 0, row.action));
    report.rows.push_back(report_action("pi_theta", "", 0, policy_action));

    auto report_ga = [&](const char* method, const char* init, const GAResult& res) {
      for (int n : kStartCounts) {
        std::size_t b = best_prefix_start(res, n);
        Action act = Action::from_normalized(res.starts[b].action_norm, box);
        MethodStateRow r = report_action(method, init, n, act);
        r.beta = cfg.ga.beta;
        r.has_opt = true;
        r.objective = res.starts[b].objective;
        r.mu = res.starts[b].mu;
        r.sigma = res.starts[b].sigma;
        int steps = 0;
        double wall = 0.0;
        for (int j = 0; j < n; ++j) {
          steps += res.starts[j].steps;
          wall += res.starts[j].wall_ms;
        }
        r.steps = steps;
        report.rows.push_back(r);
        report.timings.push_back({method, init, n, si, steps, wall});
      }
    };
    report_ga("ga", "uniform", uni);
    report_ga("ga_pi", "policy", pol);

    audit.opt_queries_during_reporting += art.opt_ensemble.queries() - o0;
    audit.eval_queries_during_reporting += art.eval_ensemble.queries() - e0;
  }
  report.audit = audit;
}

void write_manifest(const ExperimentConfig& cfg, const std::string& dir,
                    const std::vector<std::string>& deterministic_files,
                    const std::vector<std::string>& unhashed_files) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["kind"] = "experiment_report";
  j["master_seed"] = cfg.master_seed;
  j["parallelism"] = worker_count();
  j["config"] = nlohmann::json::parse(experiment_config_to_json(cfg));
  nlohmann::json files = nlohmann::json::array();
  std::vector<std::string> sorted = deterministic_files;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& name : sorted) {
    const std::string path = dir + "/" + name;
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(file_fnv1a64(path)));
    files.push_back({{"path", name},
                     {"bytes", fs::file_size(path)},
                     {"fnv1a64", hex}});
  }
  j["files"] = files;
  j["unhashed_files"] = unhashed_files;  // wall-clock data varies run to run
  write_text_file(dir + "/manifest.json", j.dump(2) + "\n");
}

}  // namespace

PipelineResult run_pipeline(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::string dir = cfg.output_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw PipelineError("report", "cannot create output dir " + dir + ": " + ec.message());

  FileTracker tracker;
  std::string stage = "generate";
  try {
    // generate
    PipelineResult out;
    out.artifacts.sim = cfg.sim;
    out.artifacts.sim.seed = derive_seed(cfg.master_seed, {label_hash("sim")});
    out.artifacts.truth = GroundTruth::defaults();
    Dataset full = generate_dataset(out.artifacts.sim, out.artifacts.truth);

    // split
    stage = "split";
    if (cfg.test_rows >= full.rows.size())
      throw std::invalid_argument("test_rows >= dataset size (" +
                                  std::to_string(full.rows.size()) + ")");
    auto [train_raw, test_raw] =
        split(full, cfg.test_rows, derive_seed(cfg.master_seed, {label_hash("split")}));
    full.rows.clear();
    full.rows.shrink_to_fit();

    // standardize
    stage = "standardize";
    auto scaler = std::make_shared<Standardizer>(fit_standardizer(train_raw));
    train_raw.scaler = scaler;
    test_raw.scaler = scaler;

    // augment (train split only)
    stage = "augment";
    if (cfg.augment_k == 0 || cfg.augment_k > train_raw.rows.size())
      throw std::invalid_argument("augment_k out of range");
    Dataset train_aug =
        augment_counterfactual(train_raw, cfg.augment_k,
                               derive_seed(cfg.master_seed, {label_hash("augment")}));

    // train-reward: two ensembles, disjoint bootstrap seed streams
    stage = "train-reward";
    RewardNetDims dims;
    dims.n_counters = cfg.sim.n_counters;
    dims.window = cfg.sim.window;
    Dataset train_std = apply_standardizer(train_aug, scaler);
    train_aug.rows.clear();
    train_aug.rows.shrink_to_fit();
    TrainConfig opt_cfg = cfg.train;
    opt_cfg.seed = derive_seed(cfg.master_seed, {label_hash("reward-opt")});
    TrainConfig eval_cfg = cfg.train;
    eval_cfg.seed = derive_seed(cfg.master_seed, {label_hash("reward-eval")});
    out.artifacts.opt_ensemble =
        ensemble_fit(train_std, cfg.ensemble_size, opt_cfg, dims, "optimization");
    out.artifacts.eval_ensemble =
        ensemble_fit(train_std, cfg.ensemble_size, eval_cfg, dims, "evaluation");
    train_std.rows.clear();
    train_std.rows.shrink_to_fit();

    // train-policy (factual rows only)
    stage = "train-policy";
    OPPGConfig oppg_cfg = cfg.oppg;
    oppg_cfg.seed = derive_seed(cfg.master_seed, {label_hash("policy")});
    out.artifacts.policy = train_oppg(train_raw, oppg_cfg, scaler);
    train_raw.rows.clear();
    train_raw.rows.shrink_to_fit();

    // evaluate
    stage = "evaluate";
    out.artifacts.test_raw = std::move(test_raw);
    out.artifacts.eval_rows.resize(cfg.n_test_states);
    for (std::size_t i = 0; i < cfg.n_test_states; ++i) out.artifacts.eval_rows[i] = i;
    evaluate_methods(cfg, out.artifacts, out.report);

    // report
    stage = "report";
    out.report.output_dir = dir;
    out.report.parallelism = worker_count();

    std::string mbuf = method_row_csv_header() + "\n";
    for (const auto& r : out.report.rows) append_method_row(mbuf, r);
    tracker.add(dir + "/methods.csv");
    write_text_file(dir + "/methods.csv", mbuf);

    tracker.add(dir + "/summary.csv");
    write_summary_csv(out.report.rows, dir + "/summary.csv");

    Dataset test_states;
    test_states.schema = out.artifacts.test_raw.schema;
    for (std::size_t i : out.artifacts.eval_rows)
      test_states.rows.push_back(out.artifacts.test_raw.rows[i]);
    tracker.add(dir + "/test_states.csv");
    write_csv(test_states, dir + "/test_states.csv");

    tracker.add(dir + "/reward_opt.json");
    tracker.add(dir + "/reward_opt.bin");
    save_ensemble(out.artifacts.opt_ensemble, dir, "reward_opt");
    tracker.add(dir + "/reward_eval.json");
    tracker.add(dir + "/reward_eval.bin");
    save_ensemble(out.artifacts.eval_ensemble, dir, "reward_eval");
    tracker.add(dir + "/policy.json");
    tracker.add(dir + "/policy.bin");
    save_policy(out.artifacts.policy, dir, "policy");

    tracker.add(dir + "/timings.csv");
    tracker.add(dir + "/timings_summary.csv");
    write_timings(out.report.timings, out.report.parallelism, dir);

    tracker.add(dir + "/manifest.json");
    write_manifest(cfg, dir,
                   {"methods.csv", "summary.csv", "test_states.csv", "reward_opt.json",
                    "reward_opt.bin", "reward_eval.json", "reward_eval.bin",
                    "policy.json", "policy.bin"},
                   {"timings.csv", "timings_summary.csv"});
    return out;
  } catch (const PipelineError&) {
    tracker.remove_all();
    throw;
  } catch (const std::exception& e) {
    tracker.remove_all();
    throw PipelineError(stage, e.what());
  }
}

std::vector<BetaSweepRow> beta_sweep(const ExperimentConfig& cfg,
                                     const PipelineArtifacts& artifacts,
                                     const std::vector<double>& betas) {
  if (betas.empty()) throw std::invalid_argument("beta_sweep: empty beta grid");
  EnsembleExec opt_exec(artifacts.opt_ensemble);
  EnsembleExec eval_exec(artifacts.eval_ensemble);

  std::vector<BetaSweepRow> rows;
  rows.reserve(betas.size());
  for (double beta : betas) {
    GAConfig ga = cfg.ga;
    ga.beta = beta;
    ga.init_source = GAConfig::Init::kPolicy;
    std::vector<double> sigmas, preds, trues;
    for (std::size_t i : artifacts.eval_rows) {
      const auto& row = artifacts.test_raw.rows[i];
      GAResult res = multi_start(
          opt_exec, row.state, ga, &artifacts.policy,
          derive_seed(cfg.master_seed, {label_hash("ga-policy"), i}));
      sigmas.push_back(res.sigma);
      StateContext ectx = eval_exec.make_context(row.state);
      preds.push_back(eval_exec.predict_at(ectx, res.best_norm).mu);
      trues.push_back(artifacts.truth.throughput(row.state, res.best_action));
    }
    BetaSweepRow r;
    r.beta = beta;
    r.n_states = sigmas.size();
    r.sigma_mean = vec_mean(sigmas);
    r.sigma_p50 = percentile(sigmas, 50.0);
    r.pred_tp_mean = vec_mean(preds);
    r.pred_tp_p50 = percentile(preds, 50.0);
    r.true_tp_mean = vec_mean(trues);
    rows.push_back(r);
  }
  return rows;
}

void write_beta_sweep_csv(const std::vector<BetaSweepRow>& rows,
                          const std::string& path) {
  std::string buf =
      "beta,n_states,sigma_mean,sigma_p50,pred_tp_mean,pred_tp_p50,true_tp_mean\n";
  for (const auto& r : rows) {
    buf += format_double(r.beta) + "," + std::to_string(r.n_states) + "," +
           format_double(r.sigma_mean) + "," + format_double(r.sigma_p50) + "," +
           format_double(r.pred_tp_mean) + "," + format_double(r.pred_tp_p50) + "," +
           format_double(r.true_tp_mean) + "\n";
  }
  write_text_file(path, buf);
}

}  // namespace cellopt
