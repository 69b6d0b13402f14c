#include "oste/forest.hpp"

#include <algorithm>
#include <cmath>

#include "oste/error.hpp"
#include "oste/parallel.hpp"

namespace oste {
namespace {

std::vector<std::size_t> all_trees(const SurvivalForest& forest, std::span<const std::size_t> tree_indices) {
  if (!tree_indices.empty()) {
    for (auto t : tree_indices) {
      if (t >= forest.size()) {
        throw ValidationError("tree index " + std::to_string(t) + " out of range");
      }
    }
    return {tree_indices.begin(), tree_indices.end()};
  }
  std::vector<std::size_t> out(forest.size());
  for (std::size_t t = 0; t < out.size(); ++t) {
    out[t] = t;
  }
  return out;
}

// Survival of every grid time for each node (leaves only).
std::vector<std::vector<double>> node_grid_survival(const SurvivalTree& tree, std::span<const double> grid) {
  std::vector<std::vector<double>> out(tree.nodes().size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (tree.nodes()[i].is_leaf()) {
      out[i] = tree.nodes()[i].curve.evaluate(grid);
    }
  }
  return out;
}

std::optional<double> concordance_error(std::span<const double> scores, std::span<const Observation> outcomes) {
  try {
    return c_index(scores, outcomes).error();
  } catch (const UndefinedConcordanceError&) {
    return std::nullopt;
  }
}

}  // namespace

std::size_t default_mtry(std::size_t num_features) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(num_features)))));
}

SurvivalForest::SurvivalForest(std::vector<SurvivalTree> trees, FeatureSchema schema, ForestParams params,
                               std::vector<double> event_grid)
    : trees_(std::move(trees)), schema_(std::move(schema)), params_(params), event_grid_(std::move(event_grid)) {
  if (trees_.empty()) {
    throw ValidationError("a forest needs at least one tree");
  }
  for (std::size_t k = 1; k < event_grid_.size(); ++k) {
    if (!(event_grid_[k] > event_grid_[k - 1])) {
      throw ValidationError("forest event grid must be strictly increasing");
    }
  }
}

SurvivalForest SurvivalForest::subset(std::span<const std::size_t> tree_indices) const {
  std::vector<SurvivalTree> picked;
  picked.reserve(tree_indices.size());
  for (auto t : all_trees(*this, tree_indices)) {
    picked.push_back(trees_[t]);
  }
  ForestParams params = params_;
  params.num_trees = picked.size();
  return SurvivalForest(std::move(picked), schema_, params, event_grid_);
}

SurvivalForest grow_forest(const SurvivalDataset& ds, std::span<const std::size_t> grow_indices,
                           const ForestParams& params) {
  if (params.num_trees < 1) {
    throw ValidationError("a forest needs at least one tree");
  }
  if (ds.num_events(grow_indices) == 0) {
    throw GrowthError("growing sample contains no events");
  }
  const TreeParams tree_params{params.mtry, params.min_node_size};
  std::vector<SurvivalTree> trees(params.num_trees);
  parallel_for(params.num_trees, [&](std::size_t i) {
    Rng rng(derive_seed(params.master_seed, i, 0));
    auto sample = bootstrap(grow_indices, rng);
    if (ds.num_events(sample.in_bag) == 0) {
      throw GrowthError("tree " + std::to_string(i) + ": bootstrap sample contains no events");
    }
    trees[i] = grow_tree(ds, std::move(sample), tree_params, derive_seed(params.master_seed, i, 1));
  });

  std::vector<double> grid;
  for (auto row : grow_indices) {
    if (ds.outcome(row).event) {
      grid.push_back(ds.outcome(row).time);
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return SurvivalForest(std::move(trees), ds.schema(), params, std::move(grid));
}

StepFunction ensemble_curve(std::span<const SurvivalTree* const> trees, std::span<const double> x) {
  if (trees.empty()) {
    throw ValidationError("ensemble_curve needs at least one tree");
  }
  std::vector<const StepFunction*> curves;
  curves.reserve(trees.size());
  std::vector<double> knots;
  for (const auto* tree : trees) {
    curves.push_back(&tree->predict_curve(x));
    knots.insert(knots.end(), curves.back()->knots().begin(), curves.back()->knots().end());
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  std::vector<double> sums(knots.size(), 0.0);
  for (const auto* curve : curves) {
    const auto values = curve->evaluate(knots);
    for (std::size_t k = 0; k < knots.size(); ++k) {
      sums[k] += values[k];
    }
  }
  const double count = static_cast<double>(curves.size());
  for (auto& s : sums) {
    s /= count;
  }
  return StepFunction(CurveKind::survival, std::move(knots), std::move(sums));
}

StepFunction ensemble_curve(const SurvivalForest& forest, std::span<const std::size_t> tree_indices,
                            std::span<const double> x) {
  std::vector<const SurvivalTree*> trees;
  for (auto t : all_trees(forest, tree_indices)) {
    trees.push_back(&forest[t]);
  }
  return ensemble_curve(trees, x);
}

StepFunction ensemble_curve(const SurvivalForest& forest, std::span<const double> x) {
  return ensemble_curve(forest, {}, x);
}

TreeGridPredictions::TreeGridPredictions(const SurvivalForest& forest, const SurvivalDataset& ds,
                                         std::span<const std::size_t> rows, std::span<const double> grid,
                                         std::span<const std::size_t> tree_indices)
    : per_tree_(forest.size()) {
  const auto trees = all_trees(forest, tree_indices);
  parallel_for(trees.size(), [&](std::size_t k) {
    const std::size_t t = trees[k];
    const auto& tree = forest[t];
    const auto cache = node_grid_survival(tree, grid);
    SurvivalMatrix m(rows.size(), grid.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto& values = cache[tree.leaf_index(ds.row(rows[r]))];
      std::copy(values.begin(), values.end(), m.row(r).begin());
    }
    per_tree_[t] = std::move(m);
  });
}

SurvivalMatrix TreeGridPredictions::ensemble(std::span<const std::size_t> tree_indices) const {
  if (tree_indices.empty()) {
    throw ValidationError("ensemble needs at least one tree");
  }
  const auto& first = per_tree_[tree_indices.front()];
  SurvivalMatrix sum(first.rows(), first.cols(), 0.0);
  for (auto t : tree_indices) {
    const auto& m = per_tree_[t];
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t c = 0; c < m.cols(); ++c) {
        sum.at(r, c) += m.at(r, c);
      }
    }
  }
  const double count = static_cast<double>(tree_indices.size());
  for (std::size_t r = 0; r < sum.rows(); ++r) {
    for (auto& v : sum.row(r)) {
      v /= count;
    }
  }
  return sum;
}

SurvivalMatrix ensemble_survival(const SurvivalForest& forest, const SurvivalDataset& ds,
                                 std::span<const std::size_t> rows, std::span<const double> grid,
                                 std::span<const std::size_t> tree_indices) {
  const auto trees = all_trees(forest, tree_indices);
  SurvivalMatrix sum(rows.size(), grid.size(), 0.0);
  for (auto t : trees) {
    const auto& tree = forest[t];
    const auto cache = node_grid_survival(tree, grid);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto& values = cache[tree.leaf_index(ds.row(rows[r]))];
      auto out = sum.row(r);
      for (std::size_t c = 0; c < values.size(); ++c) {
        out[c] += values[c];
      }
    }
  }
  const double count = static_cast<double>(trees.size());
  for (std::size_t r = 0; r < sum.rows(); ++r) {
    for (auto& v : sum.row(r)) {
      v /= count;
    }
  }
  return sum;
}

std::vector<double> ensemble_mortality(const SurvivalForest& forest, const SurvivalDataset& ds,
                                       std::span<const std::size_t> rows,
                                       std::span<const std::size_t> tree_indices) {
  const auto trees = all_trees(forest, tree_indices);
  std::vector<double> sums(rows.size(), 0.0);
  for (auto t : trees) {
    const auto& tree = forest[t];
    const auto node_scores = tree.node_mortality(forest.event_grid());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      sums[r] += node_scores[tree.leaf_index(ds.row(rows[r]))];
    }
  }
  for (auto& s : sums) {
    s /= static_cast<double>(trees.size());
  }
  return sums;
}

std::optional<double> oob_error(const SurvivalTree& tree, const SurvivalDataset& ds, std::span<const double> grid) {
  const auto& rows = tree.oob();
  if (rows.size() < 2) {
    return std::nullopt;
  }
  const auto node_scores = tree.node_mortality(grid);
  std::vector<double> scores;
  scores.reserve(rows.size());
  for (auto r : rows) {
    scores.push_back(node_scores[tree.leaf_index(ds.row(r))]);
  }
  return concordance_error(scores, ds.outcomes(rows));
}

std::vector<std::optional<double>> oob_errors(const SurvivalForest& forest, const SurvivalDataset& ds) {
  std::vector<std::optional<double>> errors(forest.size());
  parallel_for(forest.size(), [&](std::size_t t) { errors[t] = oob_error(forest[t], ds, forest.event_grid()); });
  return errors;
}

ImportanceReport permutation_importance(const SurvivalForest& forest, const SurvivalDataset& ds, std::uint64_t seed,
                                        std::span<const std::size_t> tree_indices) {
  const auto trees = all_trees(forest, tree_indices);
  const std::size_t d = ds.num_features();

  struct TreeResult {
    bool usable = false;
    std::vector<double> increase;
  };
  std::vector<TreeResult> results(trees.size());

  parallel_for(trees.size(), [&](std::size_t k) {
    const std::size_t t = trees[k];
    const auto& tree = forest[t];
    const auto& rows = tree.oob();
    if (rows.size() < 2) {
      return;
    }
    const auto node_scores = tree.node_mortality(forest.event_grid());
    const auto outcomes = ds.outcomes(rows);
    std::vector<double> scores(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      scores[i] = node_scores[tree.leaf_index(ds.row(rows[i]))];
    }
    const auto baseline = concordance_error(scores, outcomes);
    if (!baseline) {
      return;
    }

    TreeResult& result = results[k];
    result.usable = true;
    result.increase.assign(d, 0.0);
    std::vector<double> x(d);
    std::vector<double> permuted(rows.size());
    for (std::size_t f = 0; f < d; ++f) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        permuted[i] = ds.value(rows[i], f);
      }
      Rng rng(derive_seed(seed, t, f));
      std::shuffle(permuted.begin(), permuted.end(), rng);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto row = ds.row(rows[i]);
        std::copy(row.begin(), row.end(), x.begin());
        x[f] = permuted[i];
        scores[i] = node_scores[tree.leaf_index(x)];
      }
      // The OOB outcomes are unchanged, so the permissible pairs are too.
      result.increase[f] = *concordance_error(scores, outcomes) - *baseline;
    }
  });

  ImportanceReport report;
  std::vector<double> totals(d, 0.0);
  for (const auto& r : results) {
    if (!r.usable) {
      continue;
    }
    ++report.trees_used;
    for (std::size_t f = 0; f < d; ++f) {
      totals[f] += r.increase[f];
    }
  }
  for (std::size_t f = 0; f < d; ++f) {
    report.features.push_back(
        {ds.schema()[f].name, report.trees_used ? totals[f] / static_cast<double>(report.trees_used) : 0.0});
  }
  return report;
}

}  // namespace oste
