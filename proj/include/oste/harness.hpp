#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oste/dataset.hpp"
#include "oste/selection.hpp"

namespace oste {

enum class Method { oste, rsf, bagging };

const char* to_string(Method m);
Method method_from_string(const std::string& name);

// Cross-validated choice of B (and mtry for rsf) for the comparison methods.
// Off unless folds >= 2.
struct TuningOptions {
  std::size_t folds = 0;
  std::vector<std::size_t> tree_grid{500, 1000, 1500, 2000};
  bool tune_mtry = true;

  bool operator==(const TuningOptions&) const = default;
};

struct ExperimentConfig {
  std::string data_path;    // informational when the dataset is passed in
  std::string config_path;  // column config for data_path
  std::vector<Method> methods{Method::oste, Method::rsf, Method::bagging};
  std::size_t runs = 20;
  double train_fraction = 0.70;
  double lb_fraction = 0.95;
  std::size_t num_trees = 1000;
  double m_fraction = 0.20;
  std::optional<std::size_t> mtry;  // round(sqrt(d)) when unset
  std::size_t min_node_size = 3;
  std::uint64_t master_seed = 1;
  std::size_t max_attempts = 100;
  // Used for OSTE selection, tuning and test scores.
  IbsWeighting ibs_weighting = IbsWeighting::points;
  TuningOptions tuning;

  bool operator==(const ExperimentConfig&) const = default;
};

// Throws ConfigError for out-of-range fields.
void validate(const ExperimentConfig& config, std::size_t num_features);

struct MethodResult {
  Method method = Method::oste;
  double ibs = 0.0;
  std::optional<double> c_index;  // unset when the test split has no permissible pair
  std::size_t size = 0;           // trees in the evaluated ensemble
  std::size_t num_trees = 0;      // B used (after tuning)
  std::size_t mtry = 0;           // after tuning
  double wall_ms = 0.0;
};

struct RunResult {
  std::size_t run = 0;
  std::uint64_t seed = 0;     // seed of the accepted attempt
  std::size_t attempts = 1;   // 1 + number of re-draws
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::size_t lb_size = 0;
  std::size_t lv_size = 0;
  std::vector<MethodResult> methods;
  std::optional<OsteSelection> selection;  // without the full ranking
};

struct Summary {
  double mean = 0.0;
  double sd = 0.0;  // sample sd; 0 for one value
  std::size_t count = 0;
};

Summary summarize(std::span<const double> values);

struct MethodSummary {
  Method method = Method::oste;
  Summary ibs;
  Summary c_index;  // over runs where it is defined
  Summary size;
};

struct RunReport {
  ExperimentConfig config;  // with mtry resolved
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t events = 0;
  std::vector<RunResult> runs;
  std::vector<MethodSummary> summary;
};

// Repeated random splits: per run, a 70/30 train/test split, a 95/5 split of
// train into L_B/L_V, OSTE grown on L_B and selected on L_V, comparison
// methods grown on all of train, every method evaluated on test. Run r tries
// seeds derive_seed(master, r, a) for a = 0, 1, ... and re-draws on a
// degenerate split or a zero-event bootstrap, failing with
// DegenerateSplitError after max_attempts.
RunReport run_experiment(const SurvivalDataset& ds, const ExperimentConfig& config);
// Loads config.data_path with config.config_path.
RunReport run_experiment(const ExperimentConfig& config);

enum class SweepParameter { num_trees, m_fraction, mtry };

const char* to_string(SweepParameter p);
SweepParameter sweep_parameter_from_string(const std::string& name);

struct SweepPoint {
  double value = 0.0;
  RunReport report;
};

// One report per value with the same master seed, so only the swept
// parameter changes. An M sweep reuses each run's forests across values,
// which gives the same numbers as separate experiments.
std::vector<SweepPoint> sweep(const SurvivalDataset& ds, const ExperimentConfig& config, SweepParameter parameter,
                              std::span<const double> values);

}  // namespace oste
