#include "cellopt/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "cellopt/adam.hpp"
#include "cellopt/checkpoint.hpp"
#include "cellopt/rng.hpp"
#include "cellopt/stats.hpp"

namespace cellopt {

namespace {

struct Layout {
  std::size_t trunk_w, trunk_b, mean_w, mean_b, log_std, total;
};

Layout layout_of(const PolicyDims& d) {
  Layout l{};
  const std::size_t s = static_cast<std::size_t>(d.state_dim());
  const std::size_t h = static_cast<std::size_t>(d.hidden);
  l.trunk_w = 0;
  l.trunk_b = h * s;
  l.mean_w = l.trunk_b + h;
  l.mean_b = l.mean_w + static_cast<std::size_t>(kNumCps) * h;
  l.log_std = l.mean_b + kNumCps;
  l.total = l.log_std + kNumCps;
  return l;
}

}  // namespace

std::size_t PolicyParams::param_count() const { return layout_of(dims).total; }

#define CELLOPT_POLICY_SPAN(NAME, FIELD, LEN)                                  \
  std::span<double> PolicyParams::NAME() {                                     \
    Layout l = layout_of(dims);                                                \
    return {params.data() + l.FIELD, static_cast<std::size_t>(LEN)};           \
  }                                                                            \
  std::span<const double> PolicyParams::NAME() const {                         \
    Layout l = layout_of(dims);                                                \
    return {params.data() + l.FIELD, static_cast<std::size_t>(LEN)};           \
  }

CELLOPT_POLICY_SPAN(trunk_w, trunk_w, dims.hidden* dims.state_dim())
CELLOPT_POLICY_SPAN(trunk_b, trunk_b, dims.hidden)
CELLOPT_POLICY_SPAN(mean_w, mean_w, kNumCps* dims.hidden)
CELLOPT_POLICY_SPAN(mean_b, mean_b, kNumCps)
CELLOPT_POLICY_SPAN(log_std, log_std, kNumCps)
#undef CELLOPT_POLICY_SPAN

PolicyParams PolicyParams::init(const PolicyDims& dims,
                                std::shared_ptr<const Standardizer> scaler,
                                std::uint64_t seed) {
  PolicyParams p;
  p.dims = dims;
  p.scaler = std::move(scaler);
  p.params.assign(layout_of(dims).total, 0.0);
  Rng rng(derive_seed(seed, {label_hash("policy-init")}));
  double s = 1.0 / std::sqrt(static_cast<double>(dims.state_dim()));
  for (auto& w : p.trunk_w()) w = rng.uniform(-s, s);
  for (auto& v : p.log_std()) v = std::log(0.2);
  return p;
}

std::vector<double> policy_state_features(const NetworkState& s,
                                          const Standardizer& scaler) {
  const int t_dim = kNumTimeFeatures, e_dim = kNumEps;
  const int window = s.window(), n_ctr = s.n_counters();
  std::vector<double> f;
  f.reserve(static_cast<std::size_t>(t_dim + e_dim + n_ctr));
  for (int i = 0; i < t_dim; ++i)
    f.push_back((s.time_features[i] - scaler.mean[i]) / scaler.stddev[i]);
  for (int i = 0; i < e_dim; ++i)
    f.push_back((s.cell.ep[i] - scaler.mean[t_dim + i]) / scaler.stddev[t_dim + i]);
  const int base = t_dim + e_dim;
  for (int c = 0; c < n_ctr; ++c) {
    double acc = 0.0;
    for (int t = 0; t < window; ++t) {
      int idx = base + t * n_ctr + c;
      acc += (s.counters.at(t, c) - scaler.mean[idx]) / scaler.stddev[idx];
    }
    f.push_back(acc / window);
  }
  return f;
}

namespace {

struct Forward {
  std::vector<double> x;      // state features
  std::vector<double> trunk;  // tanh activations
  std::array<double, kNumCps> mean, sd;
  std::array<bool, kNumCps> sd_clamped;
};

Forward forward_pass(const PolicyParams& p, const NetworkState& s) {
  if (!p.scaler) throw std::invalid_argument("policy: no standardizer attached");
  Forward fw;
  fw.x = policy_state_features(s, *p.scaler);
  if (fw.x.size() != static_cast<std::size_t>(p.dims.state_dim()))
    throw std::invalid_argument("policy: state feature dim mismatch");
  const int h = p.dims.hidden;
  const int sdim = p.dims.state_dim();
  fw.trunk.resize(static_cast<std::size_t>(h));
  auto tw = p.trunk_w();
  auto tb = p.trunk_b();
  for (int j = 0; j < h; ++j) {
    double acc = tb[j];
    const double* row = tw.data() + static_cast<std::size_t>(j) * sdim;
    for (int i = 0; i < sdim; ++i) acc += row[i] * fw.x[i];
    fw.trunk[j] = std::tanh(acc);
  }
  auto mw = p.mean_w();
  auto mb = p.mean_b();
  auto ls = p.log_std();
  for (int d = 0; d < kNumCps; ++d) {
    double acc = mb[d];
    const double* row = mw.data() + static_cast<std::size_t>(d) * h;
    for (int j = 0; j < h; ++j) acc += row[j] * fw.trunk[j];
    fw.mean[d] = 1.0 / (1.0 + std::exp(-acc));
    double raw = std::exp(ls[d]);
    fw.sd[d] = std::min(std::max(raw, kPolicyMinStd), kPolicyMaxStd);
    fw.sd_clamped[d] = raw < kPolicyMinStd || raw > kPolicyMaxStd;
  }
  return fw;
}

}  // namespace

PolicyHeads policy_heads(const PolicyParams& p, const NetworkState& s) {
  Forward fw = forward_pass(p, s);
  return {fw.mean, fw.sd};
}

Action policy_sample(const PolicyParams& p, const NetworkState& s,
                     std::uint64_t seed) {
  Forward fw = forward_pass(p, s);
  Rng rng(derive_seed(seed, {label_hash("policy-sample")}));
  std::array<double, kNumCps> u;
  for (int d = 0; d < kNumCps; ++d) {
    TruncatedNormal tn{fw.mean[d], fw.sd[d], 0.0, 1.0};
    u[d] = tn.sample(rng);
  }
  return Action::from_normalized(u, p.scaler->box);
}

double policy_log_density(const PolicyParams& p, const NetworkState& s,
                          const Action& a) {
  if (!p.scaler->box.contains(a.cp))
    return -std::numeric_limits<double>::infinity();
  Forward fw = forward_pass(p, s);
  auto u = a.normalized(p.scaler->box);
  double logp = 0.0;
  for (int d = 0; d < kNumCps; ++d) {
    TruncatedNormal tn{fw.mean[d], fw.sd[d], 0.0, 1.0};
    logp += tn.log_density(u[d]);
  }
  return logp;
}

void policy_score_accumulate(const PolicyParams& p, const NetworkState& s,
                             const Action& a, double weight,
                             std::span<double> grad) {
  if (grad.size() != p.param_count())
    throw std::invalid_argument("policy_score_accumulate: grad size mismatch");
  Forward fw = forward_pass(p, s);
  auto u = a.normalized(p.scaler->box);
  const int h = p.dims.hidden;
  const int sdim = p.dims.state_dim();
  Layout l = layout_of(p.dims);

  // Truncated-normal score in (mean, sd) per dimension, then through the
  // sigmoid mean head and tanh trunk.
  std::array<double, kNumCps> d_upre;
  for (int d = 0; d < kNumCps; ++d) {
    const double m = fw.mean[d], sd = fw.sd[d];
    const double alpha = (0.0 - m) / sd;
    const double beta = (1.0 - m) / sd;
    const double z = norm_cdf(beta) - norm_cdf(alpha);
    const double pa = norm_pdf(alpha), pb = norm_pdf(beta);
    const double diff = u[d] - m;
    const double d_mean = diff / (sd * sd) - (pa - pb) / (sd * z);
    const double d_sd = -1.0 / sd + diff * diff / (sd * sd * sd) -
                        (alpha * pa - beta * pb) / (sd * z);
    d_upre[d] = d_mean * m * (1.0 - m);
    if (!fw.sd_clamped[d])
      grad[l.log_std + d] += weight * d_sd * sd;  // d sd / d log_std = sd
  }

  auto mw = p.mean_w();
  std::vector<double> d_trunk(static_cast<std::size_t>(h), 0.0);
  for (int d = 0; d < kNumCps; ++d) {
    const double g = d_upre[d];
    double* gmw = grad.data() + l.mean_w + static_cast<std::size_t>(d) * h;
    const double* row = mw.data() + static_cast<std::size_t>(d) * h;
    for (int j = 0; j < h; ++j) {
      gmw[j] += weight * g * fw.trunk[j];
      d_trunk[j] += g * row[j];
    }
    grad[l.mean_b + d] += weight * g;
  }
  for (int j = 0; j < h; ++j) {
    const double gpre = d_trunk[j] * (1.0 - fw.trunk[j] * fw.trunk[j]);
    double* gtw = grad.data() + l.trunk_w + static_cast<std::size_t>(j) * sdim;
    for (int i = 0; i < sdim; ++i) gtw[i] += weight * gpre * fw.x[i];
    grad[l.trunk_b + j] += weight * gpre;
  }
}

IpsEstimate ips_estimate(
    const Dataset& d,
    const std::function<double(const LoggedInteraction&)>& target_density) {
  if (d.rows.empty()) throw std::invalid_argument("ips_estimate: empty dataset");
  if (!d.factual_only())
    throw std::invalid_argument("ips_estimate: dataset must be factual-only");
  std::vector<double> terms;
  terms.reserve(d.rows.size());
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    const auto& row = d.rows[i];
    if (!(row.propensity > 0.0))
      throw std::invalid_argument("ips_estimate: non-positive propensity at row " +
                                  std::to_string(i));
    terms.push_back(target_density(row) / row.propensity * row.reward);
  }
  IpsEstimate est;
  est.n = terms.size();
  est.value = vec_mean(terms);
  double sd = vec_std_sample(terms);
  est.term_variance = sd * sd;
  return est;
}

IpsEstimate ips_estimate(const Dataset& d, const PolicyParams& p) {
  return ips_estimate(d, [&](const LoggedInteraction& row) {
    double logp = policy_log_density(p, row.state, row.action);
    return std::exp(logp);
  });
}

std::vector<double> oppg_gradient(std::span<const LoggedInteraction> batch,
                                  const PolicyParams& p, double truncation,
                                  bool baseline) {
  if (!(truncation > 0.0))
    throw std::invalid_argument("oppg_gradient: truncation must be > 0");
  if (batch.empty()) throw std::invalid_argument("oppg_gradient: empty batch");
  std::vector<double> grad(p.param_count(), 0.0);
  double b = 0.0;
  if (baseline) {
    for (const auto& row : batch) b += row.reward;
    b /= static_cast<double>(batch.size());
  }
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& row = batch[i];
    if (row.is_hypothetical)
      throw std::invalid_argument("oppg_gradient: hypothetical row " + std::to_string(i));
    if (!(row.propensity > 0.0))
      throw std::invalid_argument("oppg_gradient: non-positive propensity at row " +
                                  std::to_string(i));
    double ratio = std::exp(policy_log_density(p, row.state, row.action)) / row.propensity;
    if (!std::isfinite(ratio))
      throw std::runtime_error("oppg_gradient: non-finite importance ratio at row " +
                               std::to_string(i));
    double w = std::min(ratio, truncation) * (row.reward - b) * inv_n;
    if (w != 0.0) policy_score_accumulate(p, row.state, row.action, w, grad);
  }
  return grad;
}

PolicyParams train_oppg(const Dataset& d, const OPPGConfig& cfg,
                        std::shared_ptr<const Standardizer> scaler,
                        OppgTrainLog* log) {
  if (!d.factual_only())
    throw std::invalid_argument("train_oppg: dataset must be factual-only");
  if (d.rows.empty()) throw std::invalid_argument("train_oppg: empty dataset");
  if (!(cfg.truncation > 0.0))
    throw std::invalid_argument("train_oppg: truncation must be > 0");
  if (cfg.minibatch < 1 || cfg.epochs < 0)
    throw std::invalid_argument("train_oppg: bad minibatch/epochs");
  if (!scaler) throw std::invalid_argument("train_oppg: null standardizer");

  PolicyDims dims;
  dims.n_counters = d.schema.n_counters;
  PolicyParams p = PolicyParams::init(dims, std::move(scaler),
                                      derive_seed(cfg.seed, {label_hash("init")}));
  Adam adam(p.param_count(), cfg.learning_rate);
  std::vector<double> neg(p.param_count());
  std::vector<LoggedInteraction> rows = d.rows;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(cfg.seed, {label_hash("shuffle"),
                                           static_cast<std::uint64_t>(epoch)}));
    for (std::size_t i = rows.size() - 1; i > 0; --i) {
      std::size_t j = shuffle_rng.below(i + 1);
      std::swap(rows[i], rows[j]);
    }
    std::size_t done = 0;
    while (done < rows.size()) {
      std::size_t batch = std::min<std::size_t>(cfg.minibatch, rows.size() - done);
      auto g = oppg_gradient({rows.data() + done, batch}, p, cfg.truncation,
                             cfg.baseline);
      for (std::size_t i = 0; i < g.size(); ++i) neg[i] = -g[i];  // ascend
      adam.step(p.params, neg);
      done += batch;
    }
    IpsEstimate est = ips_estimate(d, p);
    if (!std::isfinite(est.value) || std::abs(est.value) > 1e6)
      throw std::runtime_error("train_oppg: diverged at epoch " +
                               std::to_string(epoch) + " (J = " +
                               std::to_string(est.value) + ")");
    if (log) log->ips_per_epoch.push_back(est.value);
  }
  return p;
}

double ValueDistribution::mean() const { return vec_mean(values); }
double ValueDistribution::quantile(double p) const { return percentile(values, p); }

ValueDistribution dm_value(EnsembleExec& eval_exec,
                           std::span<const NetworkState> states,
                           std::span<const Action> actions) {
  if (states.size() != actions.size())
    throw std::invalid_argument("dm_value: states/actions size mismatch");
  ValueDistribution out;
  out.values.resize(states.size());
  for (std::size_t i = 0; i < states.size(); ++i)
    out.values[i] = eval_exec.predict(states[i], actions[i]).mu;
  return out;
}

namespace {

nlohmann::json policy_scaler_json(const Standardizer& s) {
  nlohmann::json j;
  j["mean"] = s.mean;
  j["stddev"] = s.stddev;
  j["reward_mean"] = s.reward_mean;
  j["reward_std"] = s.reward_std;
  j["box_lo"] = std::vector<double>(s.box.lo.begin(), s.box.lo.end());
  j["box_hi"] = std::vector<double>(s.box.hi.begin(), s.box.hi.end());
  j["constant_features"] = s.constant_features;
  return j;
}

}  // namespace

void save_policy(const PolicyParams& p, const std::string& dir,
                 const std::string& basename) {
  if (!p.scaler) throw std::invalid_argument("save_policy: policy has no scaler");
  const std::string blob_name = basename + ".bin";
  write_blob(dir + "/" + blob_name, p.params);
  nlohmann::json j;
  j["schema_version"] = 1;
  j["kind"] = "policy";
  j["dims"] = {{"n_counters", p.dims.n_counters}, {"hidden", p.dims.hidden}};
  j["param_count"] = p.param_count();
  j["scaler"] = policy_scaler_json(*p.scaler);
  j["blob"] = blob_name;
  char hex[32];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(file_fnv1a64(dir + "/" + blob_name)));
  j["blob_fnv1a64"] = hex;
  std::ofstream f(dir + "/" + basename + ".json", std::ios::binary);
  if (!f) throw std::runtime_error("save_policy: cannot open manifest");
  f << j.dump(2) << "\n";
}

PolicyParams load_policy(const std::string& dir, const std::string& basename) {
  std::ifstream f(dir + "/" + basename + ".json");
  if (!f)
    throw std::runtime_error("load_policy: cannot open " + dir + "/" + basename +
                             ".json");
  nlohmann::json j = nlohmann::json::parse(f);
  if (j.at("schema_version").get<int>() != 1)
    throw std::runtime_error("load_policy: unsupported schema version");
  if (j.at("kind").get<std::string>() != "policy")
    throw std::runtime_error("load_policy: wrong checkpoint kind");
  PolicyParams p;
  p.dims.n_counters = j.at("dims").at("n_counters").get<int>();
  p.dims.hidden = j.at("dims").at("hidden").get<int>();
  const std::string blob_path = dir + "/" + j.at("blob").get<std::string>();
  char hex[32];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(file_fnv1a64(blob_path)));
  if (j.at("blob_fnv1a64").get<std::string>() != hex)
    throw std::runtime_error("load_policy: blob hash mismatch for " + blob_path);
  p.params = read_blob(blob_path, j.at("param_count").get<std::size_t>());

  Standardizer s;
  const auto& js = j.at("scaler");
  s.mean = js.at("mean").get<std::vector<double>>();
  s.stddev = js.at("stddev").get<std::vector<double>>();
  s.reward_mean = js.at("reward_mean").get<double>();
  s.reward_std = js.at("reward_std").get<double>();
  auto lo = js.at("box_lo").get<std::vector<double>>();
  auto hi = js.at("box_hi").get<std::vector<double>>();
  std::copy(lo.begin(), lo.end(), s.box.lo.begin());
  std::copy(hi.begin(), hi.end(), s.box.hi.begin());
  s.constant_features = js.at("constant_features").get<std::vector<int>>();
  p.scaler = std::make_shared<Standardizer>(std::move(s));
  return p;
}

}  // namespace cellopt
