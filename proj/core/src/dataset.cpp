#include "cellopt/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "cellopt/csv.hpp"
#include "cellopt/parallel.hpp"
#include "cellopt/rng.hpp"

namespace cellopt {

std::vector<double> state_features(const LoggedInteraction& row) {
  const NetworkState& s = row.state;
  std::vector<double> f;
  f.reserve(kNumTimeFeatures + kNumEps + s.counters.data.size());
  f.insert(f.end(), s.time_features.begin(), s.time_features.end());
  f.insert(f.end(), s.cell.ep.begin(), s.cell.ep.end());
  f.insert(f.end(), s.counters.data.begin(), s.counters.data.end());
  return f;
}

std::vector<double> knn_features(const LoggedInteraction& row, const ActionBox& box) {
  std::vector<double> f = state_features(row);
  for (int i = 0; i < kNumCps; ++i) f.push_back(box.normalize(i, row.action.cp[i]));
  return f;
}

Standardizer fit_standardizer(const Dataset& d) {
  if (d.rows.empty()) throw std::invalid_argument("fit_standardizer: empty dataset");
  const int dim = d.schema.state_feature_dim();
  Standardizer s;
  s.mean.assign(dim, 0.0);
  s.stddev.assign(dim, 0.0);
  const double n = static_cast<double>(d.rows.size());
  for (const auto& row : d.rows) {
    auto f = state_features(row);
    for (int i = 0; i < dim; ++i) s.mean[i] += f[i];
    s.reward_mean += row.reward;
  }
  for (int i = 0; i < dim; ++i) s.mean[i] /= n;
  s.reward_mean /= n;
  double rvar = 0.0;
  for (const auto& row : d.rows) {
    auto f = state_features(row);
    for (int i = 0; i < dim; ++i) {
      double c = f[i] - s.mean[i];
      s.stddev[i] += c * c;
    }
    rvar += (row.reward - s.reward_mean) * (row.reward - s.reward_mean);
  }
  for (int i = 0; i < dim; ++i) {
    s.stddev[i] = std::sqrt(s.stddev[i] / n);
    if (s.stddev[i] == 0.0) {
      s.stddev[i] = 1.0;
      s.constant_features.push_back(i);
    }
  }
  if (!s.constant_features.empty())
    std::fprintf(stderr, "warning: %zu constant feature(s), stddev forced to 1\n",
                 s.constant_features.size());
  s.reward_std = std::sqrt(rvar / n);
  if (s.reward_std == 0.0) s.reward_std = 1.0;
  return s;
}

namespace {

void transform_row(LoggedInteraction& row, const Standardizer& s, bool forward) {
  const int n_time = kNumTimeFeatures;
  const int n_ep = kNumEps;
  auto apply = [&](double v, int feature_idx) {
    return forward ? (v - s.mean[feature_idx]) / s.stddev[feature_idx]
                   : v * s.stddev[feature_idx] + s.mean[feature_idx];
  };
  for (int i = 0; i < n_time; ++i)
    row.state.time_features[i] = apply(row.state.time_features[i], i);
  for (int i = 0; i < n_ep; ++i)
    row.state.cell.ep[i] = apply(row.state.cell.ep[i], n_time + i);
  const int base = n_time + n_ep;
  for (std::size_t i = 0; i < row.state.counters.data.size(); ++i)
    row.state.counters.data[i] =
        apply(row.state.counters.data[i], base + static_cast<int>(i));
  row.reward = forward ? (row.reward - s.reward_mean) / s.reward_std
                       : row.reward * s.reward_std + s.reward_mean;
}

}  // namespace

Dataset apply_standardizer(const Dataset& d, std::shared_ptr<const Standardizer> s) {
  if (!s) throw std::invalid_argument("apply_standardizer: null standardizer");
  if (d.standardized)
    throw std::invalid_argument("apply_standardizer: dataset already standardized");
  Dataset out = d;
  out.scaler = std::move(s);
  out.standardized = true;
  for (auto& row : out.rows) transform_row(row, *out.scaler, true);
  return out;
}

Dataset invert_standardizer(const Dataset& d) {
  if (!d.standardized || !d.scaler)
    throw std::invalid_argument("invert_standardizer: dataset is not standardized");
  Dataset out = d;
  out.standardized = false;
  for (auto& row : out.rows) transform_row(row, *d.scaler, false);
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& d, std::size_t test_rows,
                                  std::uint64_t seed) {
  if (test_rows >= d.rows.size() && test_rows != 0)
    throw std::invalid_argument("split: test_rows must be < dataset size");
  std::vector<std::size_t> idx(d.rows.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed(seed, {label_hash("split")}));
  for (std::size_t i = 0; i < test_rows; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  std::vector<std::size_t> test_idx(idx.begin(), idx.begin() + test_rows);
  std::vector<std::size_t> train_idx(idx.begin() + test_rows, idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  std::sort(train_idx.begin(), train_idx.end());
  Dataset train, test;
  train.schema = test.schema = d.schema;
  train.scaler = test.scaler = d.scaler;
  train.standardized = test.standardized = d.standardized;
  train.rows.reserve(train_idx.size());
  test.rows.reserve(test_idx.size());
  for (auto i : train_idx) train.rows.push_back(d.rows[i]);
  for (auto i : test_idx) test.rows.push_back(d.rows[i]);
  return {std::move(train), std::move(test)};
}

Dataset bootstrap_sample(const Dataset& d, std::uint64_t seed) {
  if (d.rows.empty()) throw std::invalid_argument("bootstrap_sample: empty dataset");
  Dataset out;
  out.schema = d.schema;
  out.scaler = d.scaler;
  out.standardized = d.standardized;
  out.rows.reserve(d.rows.size());
  Rng rng(derive_seed(seed, {label_hash("bootstrap")}));
  for (std::size_t i = 0; i < d.rows.size(); ++i)
    out.rows.push_back(d.rows[rng.below(d.rows.size())]);
  return out;
}

namespace {

// Flat N x D matrix of knn features in standardized coordinates.
std::vector<double> build_knn_matrix(const Dataset& d) {
  const std::size_t n = d.rows.size();
  const std::size_t dim = static_cast<std::size_t>(d.schema.knn_feature_dim());
  const ActionBox& box = d.scaler ? d.scaler->box : default_box();
  std::vector<double> m(n * dim);
  parallel_for(n, [&](std::size_t i) {
    LoggedInteraction row = d.rows[i];
    if (!d.standardized) {
      if (!d.scaler) throw std::invalid_argument("knn: dataset has no standardizer");
      transform_row(row, *d.scaler, true);
    }
    auto f = knn_features(row, box);
    std::copy(f.begin(), f.end(), m.begin() + i * dim);
  });
  return m;
}

std::vector<std::size_t> knn_scan(const std::vector<double>& matrix, std::size_t n,
                                  std::size_t dim, const double* query,
                                  std::size_t k) {
  std::vector<double> dist2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = &matrix[i * dim];
    double s = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      double diff = row[j] - query[j];
      s += diff * diff;
    }
    dist2[i] = s;
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  auto cmp = [&](std::size_t a, std::size_t b) {
    if (dist2[a] != dist2[b]) return dist2[a] < dist2[b];
    return a < b;
  };
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), cmp);
  idx.resize(k);
  return idx;
}

}  // namespace

std::vector<std::size_t> knn(const std::vector<double>& query_features,
                             const Dataset& d, std::size_t k) {
  if (k == 0 || k > d.rows.size())
    throw std::invalid_argument("knn: k must be in [1, dataset size]");
  const std::size_t dim = static_cast<std::size_t>(d.schema.knn_feature_dim());
  if (query_features.size() != dim)
    throw std::invalid_argument("knn: query has dim " +
                                std::to_string(query_features.size()) + ", expected " +
                                std::to_string(dim));
  auto matrix = build_knn_matrix(d);
  return knn_scan(matrix, d.rows.size(), dim, query_features.data(), k);
}

Dataset augment_counterfactual(const Dataset& d, std::size_t k, std::uint64_t seed) {
  if (!d.factual_only())
    throw std::invalid_argument("augment_counterfactual: dataset must be factual-only");
  if (k == 0 || k > d.rows.size())
    throw std::invalid_argument("augment_counterfactual: k must be in [1, size]");

  Dataset out = d;
  if (!out.scaler)
    out.scaler = std::make_shared<Standardizer>(fit_standardizer(d));
  const ActionBox& box = out.scaler->box;
  const std::size_t n = d.rows.size();
  const std::size_t dim = static_cast<std::size_t>(d.schema.knn_feature_dim());

  const std::vector<double> matrix = build_knn_matrix(out);

  std::vector<LoggedInteraction> hyp(n);
  parallel_for(n, [&](std::size_t i) {
    Rng rng(derive_seed(seed, {label_hash("hypothetical"), i}));
    std::array<double, kNumCps> u;
    for (int c = 0; c < kNumCps; ++c) u[c] = rng.uniform01();

    std::vector<double> query(matrix.begin() + i * dim, matrix.begin() + (i + 1) * dim);
    for (int c = 0; c < kNumCps; ++c)
      query[dim - static_cast<std::size_t>(kNumCps) + c] = u[c];

    auto nb = knn_scan(matrix, n, dim, query.data(), k);
    double rsum = 0.0;
    for (auto j : nb) rsum += d.rows[j].reward;

    LoggedInteraction row = d.rows[i];
    row.action = Action::from_normalized(u, box);
    row.reward = rsum / static_cast<double>(k);
    row.propensity = 1.0;  // uniform density over the normalized box
    row.is_hypothetical = true;
    hyp[i] = std::move(row);
  });
  out.rows.insert(out.rows.end(), std::make_move_iterator(hyp.begin()),
                  std::make_move_iterator(hyp.end()));
  return out;
}

namespace {

std::string csv_header(const DatasetSchema& schema) {
  std::string h = "cell_id,day,hour,time_sin,time_cos,dow_sin,dow_cos";
  for (int i = 1; i <= kNumEps; ++i) h += ",ep_" + std::to_string(i);
  for (int t = schema.window - 1; t >= 0; --t)
    for (int c = 1; c <= schema.n_counters; ++c)
      h += ",ctr_t-" + std::to_string(t) + "_" + std::to_string(c);
  for (int i = 1; i <= kNumCps; ++i) h += ",cp_" + std::to_string(i);
  h += ",reward,propensity,is_hypothetical";
  return h;
}

}  // namespace

void write_csv(const Dataset& d, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_csv: cannot open " + path);
  std::string buf = csv_header(d.schema);
  buf += '\n';
  for (const auto& row : d.rows) {
    buf += std::to_string(row.state.cell.cell_id);
    buf += ',';
    buf += std::to_string(row.day);
    buf += ',';
    buf += std::to_string(row.hour);
    for (double v : row.state.time_features) {
      buf += ',';
      buf += format_double(v);
    }
    for (double v : row.state.cell.ep) {
      buf += ',';
      buf += format_double(v);
    }
    for (double v : row.state.counters.data) {
      buf += ',';
      buf += format_double(v);
    }
    for (double v : row.action.cp) {
      buf += ',';
      buf += format_double(v);
    }
    buf += ',';
    buf += format_double(row.reward);
    buf += ',';
    buf += format_double(row.propensity);
    buf += ',';
    buf += row.is_hypothetical ? '1' : '0';
    buf += '\n';
    if (buf.size() > (1u << 20)) {
      f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!f) throw std::runtime_error("write_csv: write failed for " + path);
}

Dataset read_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_csv: cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("read_csv: empty file " + path);
  auto header = split_csv_line(line);

  // Recover window/counter dimensions from the counter columns.
  int n_counters = 0, window = 0;
  for (auto h : header) {
    if (h.substr(0, 6) == "ctr_t-") {
      auto us = h.rfind('_');
      int t = static_cast<int>(parse_long(h.substr(6, us - 6)));
      int c = static_cast<int>(parse_long(h.substr(us + 1)));
      window = std::max(window, t + 1);
      n_counters = std::max(n_counters, c);
    }
  }
  DatasetSchema schema{n_counters, window};
  std::string expected = csv_header(schema);
  if (line != expected)
    throw std::runtime_error("read_csv: unexpected header in " + path);

  Dataset d;
  d.schema = schema;
  std::size_t lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 3 + kNumTimeFeatures + kNumEps +
                             static_cast<std::size_t>(window * n_counters) + kNumCps + 3)
      throw std::runtime_error("read_csv: bad field count at line " +
                               std::to_string(lineno));
    LoggedInteraction row;
    std::size_t p = 0;
    row.state.cell.cell_id = static_cast<int>(parse_long(fields[p++]));
    row.day = static_cast<int>(parse_long(fields[p++]));
    row.hour = static_cast<int>(parse_long(fields[p++]));
    for (int i = 0; i < kNumTimeFeatures; ++i)
      row.state.time_features[i] = parse_double(fields[p++]);
    for (int i = 0; i < kNumEps; ++i) row.state.cell.ep[i] = parse_double(fields[p++]);
    row.state.counters = Matrix(window, n_counters);
    for (auto& v : row.state.counters.data) v = parse_double(fields[p++]);
    for (int i = 0; i < kNumCps; ++i) row.action.cp[i] = parse_double(fields[p++]);
    row.reward = parse_double(fields[p++]);
    row.propensity = parse_double(fields[p++]);
    row.is_hypothetical = parse_long(fields[p++]) != 0;
    if (!std::isfinite(row.reward) || !std::isfinite(row.propensity))
      throw std::runtime_error("read_csv: non-finite value at line " +
                               std::to_string(lineno));
    d.rows.push_back(std::move(row));
  }
  return d;
}

}  // namespace cellopt
