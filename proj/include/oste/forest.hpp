#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oste/dataset.hpp"
#include "oste/metrics.hpp"
#include "oste/step_function.hpp"
#include "oste/tree.hpp"

namespace oste {

// round(sqrt(d)), at least 1.
std::size_t default_mtry(std::size_t num_features);

struct ForestParams {
  std::size_t num_trees = 1000;
  std::size_t mtry = 1;  // mtry == d gives bagged survival trees
  std::size_t min_node_size = 3;
  std::uint64_t master_seed = 0;

  bool operator==(const ForestParams&) const = default;
};

class SurvivalForest {
 public:
  SurvivalForest() = default;
  SurvivalForest(std::vector<SurvivalTree> trees, FeatureSchema schema, ForestParams params,
                 std::vector<double> event_grid);

  std::size_t size() const { return trees_.size(); }
  const SurvivalTree& operator[](std::size_t i) const { return trees_[i]; }
  const std::vector<SurvivalTree>& trees() const { return trees_; }
  const FeatureSchema& schema() const { return schema_; }
  const ForestParams& params() const { return params_; }
  // Sorted distinct event times of the growing sample; the mortality grid.
  const std::vector<double>& event_grid() const { return event_grid_; }

  // The forest restricted to the given trees, in the given order.
  SurvivalForest subset(std::span<const std::size_t> tree_indices) const;

 private:
  std::vector<SurvivalTree> trees_;
  FeatureSchema schema_;
  ForestParams params_;
  std::vector<double> event_grid_;
};

// Tree i bootstraps `grow_indices` with derive_seed(master, i, 0) and grows
// with derive_seed(master, i, 1), so the forest does not depend on the worker
// count. Throws GrowthError naming the tree whose bootstrap has no events.
SurvivalForest grow_forest(const SurvivalDataset& ds, std::span<const std::size_t> grow_indices,
                           const ForestParams& params);

// Pointwise mean of the trees' survival curves on the union of their knots.
StepFunction ensemble_curve(std::span<const SurvivalTree* const> trees, std::span<const double> x);
StepFunction ensemble_curve(const SurvivalForest& forest, std::span<const std::size_t> tree_indices,
                            std::span<const double> x);
StepFunction ensemble_curve(const SurvivalForest& forest, std::span<const double> x);

// Per-tree survival of each row at each grid time for the given trees (all
// when empty). Ensemble values are means over trees summed in the order
// given, matching ensemble_curve evaluated at the grid bit for bit.
class TreeGridPredictions {
 public:
  TreeGridPredictions(const SurvivalForest& forest, const SurvivalDataset& ds, std::span<const std::size_t> rows,
                      std::span<const double> grid, std::span<const std::size_t> tree_indices = {});

  const SurvivalMatrix& tree(std::size_t t) const { return per_tree_[t]; }
  SurvivalMatrix ensemble(std::span<const std::size_t> tree_indices) const;

 private:
  std::vector<SurvivalMatrix> per_tree_;
};

// Ensemble survival at each grid time without keeping per-tree matrices.
SurvivalMatrix ensemble_survival(const SurvivalForest& forest, const SurvivalDataset& ds,
                                 std::span<const std::size_t> rows, std::span<const double> grid,
                                 std::span<const std::size_t> tree_indices = {});

// Mean over the given trees (all when empty) of the per-tree mortality on
// the forest's event grid, one score per row.
std::vector<double> ensemble_mortality(const SurvivalForest& forest, const SurvivalDataset& ds,
                                       std::span<const std::size_t> rows,
                                       std::span<const std::size_t> tree_indices = {});

// 1 - C over the tree's OOB rows scored by tree mortality on `grid`;
// nullopt when the OOB rows admit no permissible pair.
std::optional<double> oob_error(const SurvivalTree& tree, const SurvivalDataset& ds, std::span<const double> grid);
std::vector<std::optional<double>> oob_errors(const SurvivalForest& forest, const SurvivalDataset& ds);

struct FeatureImportance {
  std::string feature;
  double importance = 0.0;  // mean OOB error increase after permutation
};

struct ImportanceReport {
  std::vector<FeatureImportance> features;  // schema order
  std::size_t trees_used = 0;               // trees with a usable OOB error
};

// For each tree (all when `tree_indices` is empty) and feature: shuffle that
// feature among the tree's OOB rows, recompute the OOB error and record the
// increase; average over trees with a usable OOB error. The shuffle of
// feature f in tree t uses derive_seed(seed, t, f).
ImportanceReport permutation_importance(const SurvivalForest& forest, const SurvivalDataset& ds, std::uint64_t seed,
                                        std::span<const std::size_t> tree_indices = {});

}  // namespace oste
