#include "cellopt/reward_net.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "cellopt/adam.hpp"
#include "cellopt/checkpoint.hpp"
#include "cellopt/csv.hpp"
#include "cellopt/parallel.hpp"
#include "cellopt/rng.hpp"
#include "cellopt/stats.hpp"

namespace cellopt {

std::vector<TensorSpec> reward_net_layout(const RewardNetDims& dims) {
  const int h = dims.hidden;
  const int c = dims.n_counters;
  std::vector<TensorSpec> layout = {
      {"time_W", h, kNumTimeFeatures}, {"time_b", h, 0},
      {"ep_W", h, kNumEps},            {"ep_b", h, 0},
      {"gru_Wz", h, c}, {"gru_Uz", h, h}, {"gru_bz", h, 0},
      {"gru_Wr", h, c}, {"gru_Ur", h, h}, {"gru_br", h, 0},
      {"gru_Wh", h, c}, {"gru_Uh", h, h}, {"gru_bh", h, 0},
      {"cov_W", h, dims.cov_input()},  {"cov_b", h, 0},
      {"cp_W", h, kNumCps},            {"cp_b", h, 0},
      {"out1_W", h, dims.head_input()}, {"out1_b", h, 0},
      {"out2_W", 1, h},                {"out2_b", 1, 0},
  };
  std::size_t offset = 0;
  for (auto& t : layout) {
    t.offset = offset;
    offset += t.count();
  }
  return layout;
}

std::size_t reward_net_param_count(const RewardNetDims& dims) {
  auto layout = reward_net_layout(dims);
  return layout.back().offset + layout.back().count();
}

RewardNet RewardNet::zeros(const RewardNetDims& dims) {
  RewardNet net;
  net.dims = dims;
  net.params.assign(reward_net_param_count(dims), 0.0);
  return net;
}

RewardNet RewardNet::random_init(const RewardNetDims& dims, double init_scale,
                                 std::uint64_t seed) {
  RewardNet net = zeros(dims);
  net.init_seed = seed;
  Rng rng(derive_seed(seed, {label_hash("reward-init")}));
  for (const auto& t : reward_net_layout(dims)) {
    if (t.cols == 0) continue;  // biases start at zero
    double s = init_scale / std::sqrt(static_cast<double>(t.cols));
    for (std::size_t i = 0; i < t.count(); ++i)
      net.params[t.offset + i] = rng.uniform(-s, s);
  }
  return net;
}

namespace {

struct GraphIds {
  NodeId time = -1, ep = -1, counters = -1, cp = -1, target = -1;
  NodeId cov = -1, pred = -1, loss = -1;
};

void add_param_leaves(Tape& t, const std::vector<TensorSpec>& layout) {
  for (const auto& spec : layout) {
    if (spec.cols > 0)
      t.matrix_input(spec.name, spec.rows, spec.cols);
    else
      t.input(spec.name, spec.rows);
  }
}

NodeId build_gru(Tape& t, NodeId counters, const RewardNetDims& dims) {
  const NodeId wz = t.leaf_id("gru_Wz"), uz = t.leaf_id("gru_Uz"), bz = t.leaf_id("gru_bz");
  const NodeId wr = t.leaf_id("gru_Wr"), ur = t.leaf_id("gru_Ur"), br = t.leaf_id("gru_br");
  const NodeId wh = t.leaf_id("gru_Wh"), uh = t.leaf_id("gru_Uh"), bh = t.leaf_id("gru_bh");
  NodeId h = -1;
  for (int step = 0; step < dims.window; ++step) {
    NodeId x = t.slice(counters, step * dims.n_counters, dims.n_counters);
    if (h < 0) {
      // h_0 = 0, so the recurrent terms and the reset gate drop out:
      // h_1 = z_1 (.) tanh(Wh x_1 + bh).
      NodeId z = t.sigmoid(t.affine(wz, x, bz));
      NodeId cand = t.tanh(t.affine(wh, x, bh));
      h = t.hadamard(z, cand);
    } else {
      NodeId z = t.sigmoid(t.add(t.affine(wz, x, bz), t.affine(uz, h)));
      NodeId r = t.sigmoid(t.add(t.affine(wr, x, br), t.affine(ur, h)));
      NodeId cand = t.tanh(t.add(t.affine(wh, x, bh), t.affine(uh, t.hadamard(r, h))));
      // h_t = (1 - z_t) (.) h_{t-1} + z_t (.) h~_t
      h = t.add(t.hadamard(t.axpb(z, -1.0, 1.0), h), t.hadamard(z, cand));
    }
  }
  return h;
}

NodeId build_head(Tape& t, NodeId cov, NodeId cp) {
  NodeId cp_rep = t.affine(t.leaf_id("cp_W"), cp, t.leaf_id("cp_b"));
  NodeId joined = t.concat({cov, cp_rep});
  NodeId h1 = t.relu(t.affine(t.leaf_id("out1_W"), joined, t.leaf_id("out1_b")));
  return t.affine(t.leaf_id("out2_W"), h1, t.leaf_id("out2_b"));
}

// Full graph: covariate representation from time/EP/counters, CP features
// joining after it.
GraphIds build_full(Tape& t, const RewardNetDims& dims,
                    const std::vector<TensorSpec>& layout, bool with_loss) {
  GraphIds ids;
  ids.time = t.input("time", kNumTimeFeatures);
  ids.ep = t.input("ep", kNumEps);
  ids.counters = t.input("counters", dims.window * dims.n_counters);
  ids.cp = t.input("cp", kNumCps);
  if (with_loss) ids.target = t.input("target", 1);
  add_param_leaves(t, layout);

  NodeId time_rep = t.affine(t.leaf_id("time_W"), ids.time, t.leaf_id("time_b"));
  NodeId ep_rep = t.affine(t.leaf_id("ep_W"), ids.ep, t.leaf_id("ep_b"));
  NodeId ctr_rep = build_gru(t, ids.counters, dims);
  NodeId merged = t.concat({time_rep, ep_rep, ctr_rep});
  ids.cov = t.tanh(t.affine(t.leaf_id("cov_W"), merged, t.leaf_id("cov_b")));
  ids.pred = build_head(t, ids.cov, ids.cp);
  if (with_loss) {
    ids.loss = t.squared_error(ids.pred, ids.target);
    t.set_output(ids.loss);
  } else {
    t.set_output(ids.pred);
  }
  return ids;
}

GraphIds build_cov_only(Tape& t, const RewardNetDims& dims,
                        const std::vector<TensorSpec>& layout) {
  GraphIds ids;
  ids.time = t.input("time", kNumTimeFeatures);
  ids.ep = t.input("ep", kNumEps);
  ids.counters = t.input("counters", dims.window * dims.n_counters);
  add_param_leaves(t, layout);
  NodeId time_rep = t.affine(t.leaf_id("time_W"), ids.time, t.leaf_id("time_b"));
  NodeId ep_rep = t.affine(t.leaf_id("ep_W"), ids.ep, t.leaf_id("ep_b"));
  NodeId ctr_rep = build_gru(t, ids.counters, dims);
  NodeId merged = t.concat({time_rep, ep_rep, ctr_rep});
  ids.cov = t.tanh(t.affine(t.leaf_id("cov_W"), merged, t.leaf_id("cov_b")));
  t.set_output(ids.cov);
  return ids;
}

GraphIds build_head_only(Tape& t, const RewardNetDims& dims,
                         const std::vector<TensorSpec>& layout) {
  GraphIds ids;
  ids.cov = t.input("cov", dims.hidden);
  ids.cp = t.input("cp", kNumCps);
  add_param_leaves(t, layout);
  ids.pred = build_head(t, ids.cov, ids.cp);
  t.set_output(ids.pred);
  return ids;
}

void check_features(std::span<const double> f, const RewardNetDims& dims) {
  if (f.size() != static_cast<std::size_t>(dims.state_feature_dim()))
    throw std::invalid_argument("reward net: state features have dim " +
                                std::to_string(f.size()) + ", expected " +
                                std::to_string(dims.state_feature_dim()));
}

}  // namespace

RewardNetExec::RewardNetExec(const RewardNetDims& dims)
    : dims_(dims), layout_(reward_net_layout(dims)) {
  build_full(train_, dims, layout_, true);
  GraphIds full_ids = build_full(full_, dims, layout_, false);
  full_cov_ = full_ids.cov;
  full_cp_ = full_ids.cp;
  full_pred_ = full_ids.pred;
  build_cov_only(cov_, dims, layout_);
  build_head_only(head_, dims, layout_);
}

void RewardNetExec::bind_params(const RewardNet& net) {
  if (!(net.dims == dims_))
    throw std::invalid_argument("RewardNetExec: dims mismatch");
  for (Tape* t : {&train_, &full_, &cov_, &head_})
    for (const auto& spec : layout_)
      t->bind(spec.name,
              std::span<const double>(net.params.data() + spec.offset, spec.count()));
  params_bound_ = true;
}

namespace {
void bind_state(Tape& t, std::span<const double> f, const RewardNetDims& dims) {
  t.bind("time", f.subspan(0, kNumTimeFeatures));
  t.bind("ep", f.subspan(kNumTimeFeatures, kNumEps));
  t.bind("counters", f.subspan(kNumTimeFeatures + kNumEps,
                               static_cast<std::size_t>(dims.window) * dims.n_counters));
}
}  // namespace

double RewardNetExec::predict_std(std::span<const double> f,
                                  const std::array<double, kNumCps>& u) {
  if (!params_bound_) throw std::runtime_error("RewardNetExec: parameters not bound");
  check_features(f, dims_);
  bind_state(full_, f, dims_);
  full_.bind("cp", std::span<const double>(u.data(), u.size()));
  return full_.eval_scalar();
}

double RewardNetExec::predict_grad_std(std::span<const double> f,
                                       const std::array<double, kNumCps>& u,
                                       std::array<double, kNumCps>& grad_out) {
  double pred = predict_std(f, u);
  full_.backward();
  auto adj = full_.adjoint("cp");
  std::copy(adj.begin(), adj.end(), grad_out.begin());
  return pred;
}

double RewardNetExec::loss_accumulate_grad(std::span<const double> f,
                                           const std::array<double, kNumCps>& u,
                                           double target_std,
                                           std::span<double> grad_accum) {
  if (!params_bound_) throw std::runtime_error("RewardNetExec: parameters not bound");
  check_features(f, dims_);
  bind_state(train_, f, dims_);
  train_.bind("cp", std::span<const double>(u.data(), u.size()));
  train_.bind("target", std::span<const double>(&target_std, 1));
  double loss = train_.eval_scalar();
  train_.backward();
  for (const auto& spec : layout_) {
    auto adj = train_.adjoint(spec.name);
    double* dst = grad_accum.data() + spec.offset;
    for (std::size_t i = 0; i < adj.size(); ++i) dst[i] += adj[i];
  }
  return loss;
}

std::vector<double> RewardNetExec::covariate_rep(std::span<const double> f) {
  if (!params_bound_) throw std::runtime_error("RewardNetExec: parameters not bound");
  check_features(f, dims_);
  bind_state(cov_, f, dims_);
  auto v = cov_.eval();
  return {v.begin(), v.end()};
}

double RewardNetExec::head_predict(std::span<const double> cov_rep,
                                   const std::array<double, kNumCps>& u) {
  if (!params_bound_) throw std::runtime_error("RewardNetExec: parameters not bound");
  head_.bind("cov", cov_rep);
  head_.bind("cp", std::span<const double>(u.data(), u.size()));
  return head_.eval_scalar();
}

double RewardNetExec::head_predict_grad(std::span<const double> cov_rep,
                                        const std::array<double, kNumCps>& u,
                                        std::array<double, kNumCps>& grad_out) {
  double pred = head_predict(cov_rep, u);
  head_.backward();
  auto adj = head_.adjoint("cp");
  std::copy(adj.begin(), adj.end(), grad_out.begin());
  return pred;
}

std::pair<RewardNet, std::vector<double>> train(const Dataset& d,
                                                const TrainConfig& cfg,
                                                const RewardNetDims& dims) {
  if (!d.standardized || !d.scaler)
    throw std::invalid_argument("train: dataset must be standardized");
  if (cfg.learning_rate <= 0.0 || cfg.epochs < 1)
    throw std::invalid_argument("train: learning rate and epochs must be positive");
  if (cfg.minibatch < 1 || d.rows.size() < static_cast<std::size_t>(cfg.minibatch))
    throw std::invalid_argument("train: dataset smaller than minibatch");
  if (d.schema.n_counters != dims.n_counters || d.schema.window != dims.window)
    throw std::invalid_argument("train: dataset schema does not match net dims");

  const std::size_t n = d.rows.size();
  const std::size_t fdim = static_cast<std::size_t>(dims.state_feature_dim());
  const ActionBox& box = d.scaler->box;

  // Flat copies of the sample data keep the inner loop allocation-free.
  std::vector<double> feats(n * fdim);
  std::vector<std::array<double, kNumCps>> actions(n);
  std::vector<double> targets(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto f = state_features(d.rows[i]);
    std::copy(f.begin(), f.end(), feats.begin() + i * fdim);
    actions[i] = d.rows[i].action.normalized(box);
    targets[i] = d.rows[i].reward;
  }

  RewardNet net = RewardNet::random_init(dims, cfg.init_scale,
                                         derive_seed(cfg.seed, {label_hash("init")}));
  RewardNetExec exec(dims);
  const std::size_t pcount = net.params.size();
  Adam adam(pcount, cfg.learning_rate);
  std::vector<double> grad(pcount, 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(cfg.epochs));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(cfg.seed, {label_hash("shuffle"),
                                           static_cast<std::uint64_t>(epoch)}));
    for (std::size_t i = n - 1; i > 0; --i) {
      std::size_t j = shuffle_rng.below(i + 1);
      std::swap(order[i], order[j]);
    }
    double epoch_loss = 0.0;
    std::size_t done = 0;
    while (done < n) {
      std::size_t batch = std::min<std::size_t>(cfg.minibatch, n - done);
      std::fill(grad.begin(), grad.end(), 0.0);
      exec.bind_params(net);
      for (std::size_t b = 0; b < batch; ++b) {
        std::size_t i = order[done + b];
        epoch_loss += exec.loss_accumulate_grad(
            std::span<const double>(feats.data() + i * fdim, fdim), actions[i],
            targets[i], grad);
      }
      double inv = 1.0 / static_cast<double>(batch);
      for (auto& g : grad) g *= inv;
      adam.step(net.params, grad);
      done += batch;
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss))
      throw std::runtime_error("train: NaN loss at epoch " + std::to_string(epoch));
    history.push_back(epoch_loss);
  }
  return {std::move(net), std::move(history)};
}

RewardEnsemble ensemble_fit(const Dataset& d, int ensemble_size,
                            const TrainConfig& cfg, const RewardNetDims& dims,
                            std::string name) {
  if (ensemble_size < 1)
    throw std::invalid_argument("ensemble_fit: ensemble_size must be >= 1");
  RewardEnsemble e;
  e.dims = dims;
  e.name = std::move(name);
  e.scaler = d.scaler;
  e.members.resize(static_cast<std::size_t>(ensemble_size));
  e.member_seeds.resize(e.members.size());
  for (std::size_t k = 0; k < e.members.size(); ++k)
    e.member_seeds[k] = derive_seed(cfg.seed, {label_hash("member"), k});

  // Members are independent; train them in parallel when cores allow.
  parallel_for(e.members.size(), [&](std::size_t k) {
    Dataset boot = bootstrap_sample(d, derive_seed(cfg.seed, {label_hash("boot"), k}));
    TrainConfig member_cfg = cfg;
    member_cfg.seed = e.member_seeds[k];
    e.members[k] = train(boot, member_cfg, dims).first;
  });
  return e;
}

EnsembleExec::EnsembleExec(const RewardEnsemble& e) : ensemble_(&e) {
  if (e.members.empty()) throw std::invalid_argument("EnsembleExec: empty ensemble");
  if (!e.scaler) throw std::invalid_argument("EnsembleExec: ensemble has no scaler");
  execs_.reserve(e.members.size());
  for (const auto& m : e.members) {
    execs_.push_back(std::make_unique<RewardNetExec>(e.dims));
    execs_.back()->bind_params(m);
  }
}

std::vector<double> EnsembleExec::standardize_state(const NetworkState& s) const {
  const Standardizer& sc = *ensemble_->scaler;
  LoggedInteraction tmp;
  tmp.state = s;
  std::vector<double> f = state_features(tmp);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = (f[i] - sc.mean[i]) / sc.stddev[i];
  return f;
}

namespace {

MuSigma raw_mu_sigma(const std::vector<double>& raw_preds) {
  MuSigma ms{vec_mean(raw_preds), vec_std_pop(raw_preds)};
  return ms;
}

}  // namespace

MuSigma EnsembleExec::predict(const NetworkState& s, const Action& a) {
  ensemble_->query_count->fetch_add(1, std::memory_order_relaxed);
  const Standardizer& sc = *ensemble_->scaler;
  std::vector<double> f = standardize_state(s);
  auto u = a.normalized(sc.box);
  std::vector<double> preds(execs_.size());
  for (std::size_t k = 0; k < execs_.size(); ++k)
    preds[k] = sc.reward_mean + sc.reward_std * execs_[k]->predict_std(f, u);
  return raw_mu_sigma(preds);
}

StateContext EnsembleExec::make_context(const NetworkState& s) {
  ensemble_->query_count->fetch_add(1, std::memory_order_relaxed);
  StateContext ctx;
  ctx.state_features_std = standardize_state(s);
  ctx.cov_reps.reserve(execs_.size());
  for (auto& exec : execs_)
    ctx.cov_reps.push_back(exec->covariate_rep(ctx.state_features_std));
  return ctx;
}

MuSigma EnsembleExec::predict_at(const StateContext& ctx,
                                 const std::array<double, kNumCps>& u) {
  ensemble_->query_count->fetch_add(1, std::memory_order_relaxed);
  const Standardizer& sc = *ensemble_->scaler;
  std::vector<double> preds(execs_.size());
  for (std::size_t k = 0; k < execs_.size(); ++k)
    preds[k] = sc.reward_mean + sc.reward_std * execs_[k]->head_predict(ctx.cov_reps[k], u);
  return raw_mu_sigma(preds);
}

MuSigma EnsembleExec::grad_penalized(const StateContext& ctx,
                                     const std::array<double, kNumCps>& u,
                                     double beta,
                                     std::array<double, kNumCps>& grad_out) {
  ensemble_->query_count->fetch_add(1, std::memory_order_relaxed);
  const Standardizer& sc = *ensemble_->scaler;
  const std::size_t k_members = execs_.size();
  std::vector<double> preds(k_members);
  std::vector<std::array<double, kNumCps>> grads(k_members);
  for (std::size_t k = 0; k < k_members; ++k) {
    preds[k] = sc.reward_mean +
               sc.reward_std * execs_[k]->head_predict_grad(ctx.cov_reps[k], u, grads[k]);
    for (auto& g : grads[k]) g *= sc.reward_std;
  }
  MuSigma ms = raw_mu_sigma(preds);
  grad_out.fill(0.0);
  for (std::size_t k = 0; k < k_members; ++k)
    for (int i = 0; i < kNumCps; ++i) grad_out[i] += grads[k][i];
  for (auto& g : grad_out) g /= static_cast<double>(k_members);
  // d sigma / d u = (1/(K sigma)) sum_k (r_k - mu) g_k; zero at sigma = 0.
  if (beta != 0.0 && ms.sigma > 0.0) {
    double scale = beta / (static_cast<double>(k_members) * ms.sigma);
    for (std::size_t k = 0; k < k_members; ++k) {
      double w = (preds[k] - ms.mu) * scale;
      for (int i = 0; i < kNumCps; ++i) grad_out[i] -= w * grads[k][i];
    }
  }
  return ms;
}

MuSigma ensemble_predict(const RewardEnsemble& e, const NetworkState& s,
                         const Action& a) {
  EnsembleExec exec(e);
  return exec.predict(s, a);
}

MuSigma ensemble_grad_action(const RewardEnsemble& e, const NetworkState& s,
                             const Action& a, double beta,
                             std::array<double, kNumCps>& grad_out) {
  EnsembleExec exec(e);
  StateContext ctx = exec.make_context(s);
  return exec.grad_penalized(ctx, a.normalized(e.scaler->box), beta, grad_out);
}

double member_predict(RewardNetExec& exec, const Standardizer& scaler,
                      const NetworkState& s, const Action& a) {
  LoggedInteraction tmp;
  tmp.state = s;
  std::vector<double> f = state_features(tmp);
  for (std::size_t i = 0; i < f.size(); ++i)
    f[i] = (f[i] - scaler.mean[i]) / scaler.stddev[i];
  return scaler.reward_mean +
         scaler.reward_std * exec.predict_std(f, a.normalized(scaler.box));
}

std::array<double, kNumCps> member_grad_action(RewardNetExec& exec,
                                               const Standardizer& scaler,
                                               const NetworkState& s,
                                               const Action& a) {
  LoggedInteraction tmp;
  tmp.state = s;
  std::vector<double> f = state_features(tmp);
  for (std::size_t i = 0; i < f.size(); ++i)
    f[i] = (f[i] - scaler.mean[i]) / scaler.stddev[i];
  std::array<double, kNumCps> g;
  exec.predict_grad_std(f, a.normalized(scaler.box), g);
  for (auto& v : g) v *= scaler.reward_std;
  return g;
}

namespace {

nlohmann::json scaler_to_json(const Standardizer& s) {
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

Standardizer scaler_from_json(const nlohmann::json& j) {
  Standardizer s;
  s.mean = j.at("mean").get<std::vector<double>>();
  s.stddev = j.at("stddev").get<std::vector<double>>();
  s.reward_mean = j.at("reward_mean").get<double>();
  s.reward_std = j.at("reward_std").get<double>();
  auto lo = j.at("box_lo").get<std::vector<double>>();
  auto hi = j.at("box_hi").get<std::vector<double>>();
  if (lo.size() != kNumCps || hi.size() != kNumCps)
    throw std::runtime_error("checkpoint: bad box dimension");
  std::copy(lo.begin(), lo.end(), s.box.lo.begin());
  std::copy(hi.begin(), hi.end(), s.box.hi.begin());
  s.constant_features = j.at("constant_features").get<std::vector<int>>();
  return s;
}

}  // namespace

void save_ensemble(const RewardEnsemble& e, const std::string& dir,
                   const std::string& basename) {
  if (!e.scaler) throw std::invalid_argument("save_ensemble: ensemble has no scaler");
  const std::string blob_name = basename + ".bin";
  const std::size_t per_member = reward_net_param_count(e.dims);
  std::vector<double> blob;
  blob.reserve(per_member * e.members.size());
  for (const auto& m : e.members)
    blob.insert(blob.end(), m.params.begin(), m.params.end());
  write_blob(dir + "/" + blob_name, blob);

  nlohmann::json j;
  j["schema_version"] = 1;
  j["kind"] = "reward_ensemble";
  j["name"] = e.name;
  j["dims"] = {{"n_counters", e.dims.n_counters},
               {"window", e.dims.window},
               {"hidden", e.dims.hidden}};
  j["members"] = e.members.size();
  j["member_seeds"] = e.member_seeds;
  j["params_per_member"] = per_member;
  nlohmann::json layout = nlohmann::json::array();
  for (const auto& t : reward_net_layout(e.dims))
    layout.push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}});
  j["param_layout"] = layout;
  j["scaler"] = scaler_to_json(*e.scaler);
  j["blob"] = blob_name;
  char hex[32];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(file_fnv1a64(dir + "/" + blob_name)));
  j["blob_fnv1a64"] = hex;

  std::ofstream f(dir + "/" + basename + ".json", std::ios::binary);
  if (!f) throw std::runtime_error("save_ensemble: cannot open manifest");
  f << j.dump(2) << "\n";
}

RewardEnsemble load_ensemble(const std::string& dir, const std::string& basename) {
  std::ifstream f(dir + "/" + basename + ".json");
  if (!f)
    throw std::runtime_error("load_ensemble: cannot open " + dir + "/" + basename +
                             ".json");
  nlohmann::json j = nlohmann::json::parse(f);
  if (j.at("schema_version").get<int>() != 1)
    throw std::runtime_error("load_ensemble: unsupported schema version");
  if (j.at("kind").get<std::string>() != "reward_ensemble")
    throw std::runtime_error("load_ensemble: wrong checkpoint kind");

  RewardEnsemble e;
  e.dims.n_counters = j.at("dims").at("n_counters").get<int>();
  e.dims.window = j.at("dims").at("window").get<int>();
  e.dims.hidden = j.at("dims").at("hidden").get<int>();
  e.name = j.at("name").get<std::string>();
  e.member_seeds = j.at("member_seeds").get<std::vector<std::uint64_t>>();
  const auto n_members = j.at("members").get<std::size_t>();
  const std::size_t per_member = reward_net_param_count(e.dims);
  if (j.at("params_per_member").get<std::size_t>() != per_member)
    throw std::runtime_error("load_ensemble: parameter count mismatch");

  const std::string blob_path = dir + "/" + j.at("blob").get<std::string>();
  char hex[32];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(file_fnv1a64(blob_path)));
  if (j.at("blob_fnv1a64").get<std::string>() != hex)
    throw std::runtime_error("load_ensemble: blob hash mismatch for " + blob_path);
  std::vector<double> blob = read_blob(blob_path, per_member * n_members);

  e.members.resize(n_members);
  for (std::size_t k = 0; k < n_members; ++k) {
    e.members[k].dims = e.dims;
    e.members[k].init_seed = k < e.member_seeds.size() ? e.member_seeds[k] : 0;
    e.members[k].params.assign(blob.begin() + k * per_member,
                               blob.begin() + (k + 1) * per_member);
  }
  e.scaler = std::make_shared<Standardizer>(scaler_from_json(j.at("scaler")));
  return e;
}

}  // namespace cellopt
