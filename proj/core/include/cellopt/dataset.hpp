#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cellopt/types.hpp"

namespace cellopt {

// One logged (state, action, reward, propensity) tuple. Propensities are
// densities in normalized action coordinates; the constant Jacobian of the
// box transform cancels in every importance ratio. Hypothetical rows carry
// the kNN-imputed reward and propensity 1 (uniform density over the
// normalized box) and are excluded from IPS/OPPG computations.
struct LoggedInteraction {
  NetworkState state;
  Action action;
  double reward = 0.0;
  double propensity = 0.0;
  bool is_hypothetical = false;
  int day = 0;
  int hour = 0;
};

struct DatasetSchema {
  int n_counters = 8;
  int window = 24;

  int state_feature_dim() const {
    return kNumTimeFeatures + kNumEps + window * n_counters;
  }
  int knn_feature_dim() const { return state_feature_dim() + kNumCps; }
};

// Per-feature standardization fitted on one split. Actions are not
// standardized; they are min-max normalized through the box instead.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;    // zero-variance features get 1 (warning on fit)
  double reward_mean = 0.0;
  double reward_std = 1.0;
  ActionBox box = default_box();
  std::vector<int> constant_features;  // indices forced to stddev 1
};

struct Dataset {
  DatasetSchema schema;
  std::vector<LoggedInteraction> rows;
  std::shared_ptr<const Standardizer> scaler;  // optional
  bool standardized = false;

  std::size_t size() const { return rows.size(); }
  bool factual_only() const {
    for (const auto& r : rows)
      if (r.is_hypothetical) return false;
    return true;
  }
};

// Raw state features of a row: [time (4), ep (6), counters oldest-first
// (window x n_counters)]. Reads the row as stored, so the result is
// standardized iff the dataset is.
std::vector<double> state_features(const LoggedInteraction& row);

// state_features plus the box-normalized action; the distance space for kNN.
std::vector<double> knn_features(const LoggedInteraction& row, const ActionBox& box);

Standardizer fit_standardizer(const Dataset& d);
Dataset apply_standardizer(const Dataset& d, std::shared_ptr<const Standardizer> s);
Dataset invert_standardizer(const Dataset& d);

// Disjoint, exhaustive, uniform without replacement; both splits keep the
// original row order.
std::pair<Dataset, Dataset> split(const Dataset& d, std::size_t test_rows,
                                  std::uint64_t seed);

Dataset bootstrap_sample(const Dataset& d, std::uint64_t seed);

// Exact k nearest rows to a query in knn-feature space (Euclidean), ties
// broken by lower row index. The query must already be in standardized
// coordinates; rows are standardized through d.scaler when the dataset
// itself is not.
std::vector<std::size_t> knn(const std::vector<double>& query_features,
                             const Dataset& d, std::size_t k);

// One hypothetical row per factual row: same state, action drawn uniformly
// from the box, reward imputed as the mean factual reward of the k nearest
// (state, hypothetical action) neighbours. Output is the factual rows,
// unchanged, followed by the hypothetical rows. Fits a standardizer from d
// if none is attached.
Dataset augment_counterfactual(const Dataset& d, std::size_t k, std::uint64_t seed);

// CSV interchange: header row, comma separated, floats at 17 significant
// digits. Cell location is generation-side metadata and is not part of the
// schema.
void write_csv(const Dataset& d, const std::string& path);
Dataset read_csv(const std::string& path);

}  // namespace cellopt
