#include "cellopt/simnet.hpp"

#include <cmath>
#include <stdexcept>

#include "cellopt/dataset.hpp"
#include "cellopt/stats.hpp"

namespace cellopt {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

// Engineering-parameter bounds used by the generator (tilt/tilt/azimuth/
// height/power/beamwidth style attributes).
constexpr double kEpLo[kNumEps] = {0.0, 0.0, 0.0, 10.0, 10.0, 30.0};
constexpr double kEpHi[kNumEps] = {10.0, 10.0, 360.0, 60.0, 46.0, 120.0};

constexpr int kPhiDim = kNumTimeFeatures + kNumEps;

// Smooth per-state embedding feeding the ground-truth coefficients: time
// features as-is, engineering parameters scaled to [-1, 1].
void state_embedding(const NetworkState& s, double* phi) {
  for (int i = 0; i < kNumTimeFeatures; ++i) phi[i] = s.time_features[i];
  for (int i = 0; i < kNumEps; ++i)
    phi[kNumTimeFeatures + i] =
        2.0 * (s.cell.ep[i] - kEpLo[i]) / (kEpHi[i] - kEpLo[i]) - 1.0;
}

// Fixed coefficient tables of the synthetic world. Closed-form entries keep
// the tables reproducible without shipping 140 literals.
double center_coef(int dim, int j) {
  return 0.28 * std::sin(1.7 * (dim + 1) + 0.9 * (j + 1));
}
double weight_coef(int dim, int j) {
  return 0.25 * std::cos(2.1 * (dim + 1) + 1.3 * (j + 1));
}
double base_coef(int j) { return 0.4 * std::sin(2.3 * (j + 1)); }

}  // namespace

const std::array<double, kNumEps>& ep_lower_bounds() {
  static const std::array<double, kNumEps> lo = [] {
    std::array<double, kNumEps> a;
    for (int i = 0; i < kNumEps; ++i) a[i] = kEpLo[i];
    return a;
  }();
  return lo;
}

const std::array<double, kNumEps>& ep_upper_bounds() {
  static const std::array<double, kNumEps> hi = [] {
    std::array<double, kNumEps> a;
    for (int i = 0; i < kNumEps; ++i) a[i] = kEpHi[i];
    return a;
  }();
  return hi;
}

void SimConfig::validate() const {
  if (n_cells < 1 || n_counters < 1 || window < 1 || n_days < 1)
    throw std::invalid_argument("SimConfig: counts must be >= 1");
  if (noise_std < 0.0)
    throw std::invalid_argument("SimConfig: noise_std must be >= 0");
  if (logging_sd <= 0.0)
    throw std::invalid_argument("SimConfig: logging_sd must be > 0");
  if (logging_offset < 0.0 || logging_offset >= 1.0)
    throw std::invalid_argument("SimConfig: logging_offset must be in [0, 1)");
}

GroundTruth GroundTruth::defaults() {
  GroundTruth gt;
  for (int i = 0; i < kNumCps; ++i) {
    gt.bump_weight[i] = 0.8 + 1.5 * i / (kNumCps - 1.0);
    gt.bump_sigma[i] = 0.18 + 0.01 * i;
  }
  gt.pairs = {{0, 1, 0.8}, {2, 5, -0.6}, {7, 13, 0.5}, {4, 9, -0.4}, {3, 11, 0.3}};
  return gt;
}

double GroundTruth::bump_center(int dim, const NetworkState& s) const {
  double phi[kPhiDim];
  state_embedding(s, phi);
  double dot = 0.0;
  for (int j = 0; j < kPhiDim; ++j) dot += center_coef(dim, j) * phi[j];
  return 0.5 + 0.35 * std::tanh(dot);
}

double GroundTruth::bump_weight_at(int dim, const NetworkState& s) const {
  double phi[kPhiDim];
  state_embedding(s, phi);
  double dot = 0.0;
  for (int j = 0; j < kPhiDim; ++j) dot += weight_coef(dim, j) * phi[j];
  return bump_weight[dim] * (1.0 + 0.5 * std::tanh(dot));
}

double GroundTruth::base(const NetworkState& s) const {
  double phi[kPhiDim];
  state_embedding(s, phi);
  double dot = 0.0;
  for (int j = 0; j < kPhiDim; ++j) dot += base_coef(j) * phi[j];
  return base_level + base_amp * std::tanh(dot);
}

double GroundTruth::throughput(const NetworkState& s, const Action& a,
                               const ActionBox& box) const {
  if (!box.contains(a.cp))
    throw std::invalid_argument("GroundTruth::throughput: action outside the box");
  double phi[kPhiDim];
  state_embedding(s, phi);

  double tp;
  {
    double dot = 0.0;
    for (int j = 0; j < kPhiDim; ++j) dot += base_coef(j) * phi[j];
    tp = base_level + base_amp * std::tanh(dot);
  }
  std::array<double, kNumCps> u = a.normalized(box);
  for (int i = 0; i < kNumCps; ++i) {
    if (bump_weight[i] == 0.0) continue;
    double cdot = 0.0, wdot = 0.0;
    for (int j = 0; j < kPhiDim; ++j) {
      cdot += center_coef(i, j) * phi[j];
      wdot += weight_coef(i, j) * phi[j];
    }
    double m = 0.5 + 0.35 * std::tanh(cdot);
    double w = bump_weight[i] * (1.0 + 0.5 * std::tanh(wdot));
    double z = (u[i] - m) / bump_sigma[i];
    tp += w * std::exp(-0.5 * z * z);
  }
  for (const auto& p : pairs) tp += p.v * u[p.i] * u[p.j];
  return tp;
}

std::vector<CellSpec> generate_network(const SimConfig& cfg) {
  cfg.validate();
  std::vector<CellSpec> cells(cfg.n_cells);
  for (int id = 0; id < cfg.n_cells; ++id) {
    Rng rng(derive_seed(cfg.seed, {label_hash("cell"), static_cast<std::uint64_t>(id)}));
    CellSpec c;
    c.cell_id = id;
    for (int i = 0; i < kNumEps; ++i) c.ep[i] = rng.uniform(kEpLo[i], kEpHi[i]);
    c.x_km = rng.uniform(0.0, 50.0);
    c.y_km = rng.uniform(0.0, 50.0);
    cells[id] = c;
  }
  return cells;
}

double true_reward(const GroundTruth& gt, const NetworkState& s, const Action& a,
                   double noise_std, std::optional<std::uint64_t> noise_seed) {
  double tp = gt.throughput(s, a);
  if (noise_std > 0.0 && noise_seed) {
    Rng rng(derive_seed(*noise_seed, {label_hash("tp-noise")}));
    tp += noise_std * std_normal(rng);
  }
  return tp;
}

namespace {

// Logging-policy center: the true optimum shifted down by the configured
// fraction of the (normalized) box, kept inside a safety margin. The center
// is evaluated at the midnight state (hour features fixed), so it depends
// only on day-stable components and the daily action's density can be
// recovered exactly from any hourly row of that day.
double logging_center(const GroundTruth& gt, const SimConfig& cfg,
                      const NetworkState& s, int dim) {
  NetworkState midnight = s;
  midnight.time_features[0] = 0.0;  // sin(0)
  midnight.time_features[1] = 1.0;  // cos(0)
  double c = gt.bump_center(dim, midnight) - cfg.logging_offset;
  return std::min(std::max(c, 0.05), 0.95);
}

}  // namespace

std::pair<Action, double> logging_policy(const GroundTruth& gt, const SimConfig& cfg,
                                         const NetworkState& s, Rng& rng) {
  std::array<double, kNumCps> u;
  for (int i = 0; i < kNumCps; ++i) {
    TruncatedNormal tn{logging_center(gt, cfg, s, i), cfg.logging_sd, 0.0, 1.0};
    u[i] = tn.sample(rng);
  }
  Action a = Action::from_normalized(u, default_box());
  return {a, logging_density(gt, cfg, s, a)};
}

double logging_density(const GroundTruth& gt, const SimConfig& cfg,
                       const NetworkState& s, const Action& a) {
  std::array<double, kNumCps> u = a.normalized(default_box());
  double density = 1.0;
  for (int i = 0; i < kNumCps; ++i) {
    TruncatedNormal tn{logging_center(gt, cfg, s, i), cfg.logging_sd, 0.0, 1.0};
    density *= tn.density(u[i]);
  }
  return density;
}

namespace {

struct CounterProcess {
  // Diurnal mean plus AR(1) deviation, clipped at zero.
  double level;
  double phase;
  double mu(int hour_abs) const {
    return level * (0.65 + 0.35 * std::sin(kTwoPi * (hour_abs - phase) / 24.0));
  }
};

}  // namespace

Dataset generate_dataset(const SimConfig& cfg, const GroundTruth& gt) {
  cfg.validate();
  auto cells = generate_network(cfg);

  Dataset d;
  d.schema = DatasetSchema{cfg.n_counters, cfg.window};
  d.rows.reserve(static_cast<std::size_t>(cfg.n_cells) * cfg.n_days * 24);

  const int total_hours = cfg.n_days * 24;
  for (const auto& cell : cells) {
    // Counter history for this cell, including warm-up to fill the first
    // window. Exogenous load: actions do not feed back into counters.
    Rng crng(derive_seed(cfg.seed, {label_hash("counters"),
                                    static_cast<std::uint64_t>(cell.cell_id)}));
    std::vector<CounterProcess> procs(cfg.n_counters);
    for (auto& p : procs) {
      p.level = crng.uniform(20.0, 200.0);
      p.phase = crng.uniform(0.0, 24.0);
    }
    const int hist_len = cfg.window + total_hours;
    Matrix history(hist_len, cfg.n_counters);  // hour -window .. total_hours-1
    for (int c = 0; c < cfg.n_counters; ++c) {
      double prev_dev = 0.0;
      for (int h = 0; h < hist_len; ++h) {
        int hour_abs = h - cfg.window;
        double dev = 0.7 * prev_dev + 0.04 * procs[c].level * std_normal(crng);
        prev_dev = dev;
        history.at(h, c) = std::max(procs[c].mu(hour_abs) + dev, 0.0);
      }
    }

    for (int day = 0; day < cfg.n_days; ++day) {
      // One CP change per day, held for all 24 hourly rows.
      Rng arng(derive_seed(cfg.seed, {label_hash("action"),
                                      static_cast<std::uint64_t>(cell.cell_id),
                                      static_cast<std::uint64_t>(day)}));
      Rng nrng(derive_seed(cfg.seed, {label_hash("noise"),
                                      static_cast<std::uint64_t>(cell.cell_id),
                                      static_cast<std::uint64_t>(day)}));
      bool have_action = false;
      Action action;
      double propensity = 0.0;
      for (int hour = 0; hour < 24; ++hour) {
        LoggedInteraction row;
        row.state.cell = cell;
        row.state.time_features = time_features_for(day, hour);
        row.day = day;
        row.hour = hour;
        const int hour_abs = day * 24 + hour;
        row.state.counters = Matrix(cfg.window, cfg.n_counters);
        for (int t = 0; t < cfg.window; ++t)
          for (int c = 0; c < cfg.n_counters; ++c)
            row.state.counters.at(t, c) =
                history.at(hour_abs + 1 + t, c);  // window ends at current hour

        if (!have_action) {
          auto [a, p] = logging_policy(gt, cfg, row.state, arng);
          action = a;
          propensity = p;
          have_action = true;
        }
        row.action = action;
        row.propensity = logging_density(gt, cfg, row.state, action);
        double tp = gt.throughput(row.state, row.action);
        if (cfg.noise_std > 0.0) tp += cfg.noise_std * std_normal(nrng);
        row.reward = tp;
        d.rows.push_back(std::move(row));
      }
    }
  }
  return d;
}

}  // namespace cellopt
