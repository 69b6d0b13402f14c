#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "oste/dataset.hpp"
#include "oste/step_function.hpp"

namespace oste {

// Floor applied to survival before taking -log in mortality scores.
inline constexpr double kMortalityFloor = 1e-12;

// Categorical subsets with at most this many levels present at a node are
// searched exhaustively; larger ones are ordered by mean observed time and
// searched as thresholds over that order.
inline constexpr std::size_t kMaxExhaustiveLevels = 8;

struct TreeParams {
  std::size_t mtry = 1;           // features drawn per node, 1 <= mtry <= d
  std::size_t min_node_size = 3;  // minimum in-bag members per child

  bool operator==(const TreeParams&) const = default;
};

struct NumericSplit {
  double threshold = 0.0;  // value <= threshold goes left

  bool operator==(const NumericSplit&) const = default;
};

struct CategoricalSplit {
  std::vector<std::uint32_t> left_levels;   // sorted level indices
  std::vector<std::uint32_t> right_levels;  // sorted level indices
  bool unseen_left = true;                  // direction for levels absent at growth

  bool operator==(const CategoricalSplit&) const = default;
};

struct SplitRule {
  std::size_t feature = 0;
  std::variant<NumericSplit, CategoricalSplit> test;

  bool goes_left(double value) const;
  bool operator==(const SplitRule&) const = default;
};

struct TreeNode {
  std::optional<SplitRule> rule;  // empty for leaves
  std::size_t left = 0;
  std::size_t right = 0;
  std::size_t size = 0;  // in-bag members, duplicates counted
  StepFunction curve;    // leaves only: Kaplan-Meier of the members

  bool is_leaf() const { return !rule.has_value(); }
  bool operator==(const TreeNode&) const = default;
};

class SurvivalTree {
 public:
  SurvivalTree() = default;
  SurvivalTree(std::vector<TreeNode> nodes, IndexSet in_bag, IndexSet oob, TreeParams params, std::uint64_t seed);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const IndexSet& in_bag() const { return in_bag_; }
  const IndexSet& oob() const { return oob_; }
  const TreeParams& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }

  std::size_t num_leaves() const;
  std::size_t depth() const;

  std::size_t leaf_index(std::span<const double> x) const;
  const StepFunction& predict_curve(std::span<const double> x) const { return nodes_[leaf_index(x)].curve; }

  // Sum over the grid of -log(max(S(t), kMortalityFloor)); higher is riskier.
  double predict_mortality(std::span<const double> x, std::span<const double> grid) const;

  // The same score for every node (zero for internal nodes), so repeated
  // scoring against one grid only routes.
  std::vector<double> node_mortality(std::span<const double> grid) const;

  bool operator==(const SurvivalTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
  IndexSet in_bag_;
  IndexSet oob_;
  TreeParams params_;
  std::uint64_t seed_ = 0;
};

double mortality(const StepFunction& survival, std::span<const double> grid);

// Recursive log-rank partitioning of `sample.in_bag`. At each node `mtry`
// features are drawn without replacement; the split maximizing the log-rank
// statistic with both children holding >= min_node_size members wins, ties
// going to the lower feature index and then the earlier candidate. Nodes with
// fewer than 2 * min_node_size members, no events, or no informative
// admissible split become leaves.
// Throws GrowthError if the in-bag sample has no events or params are invalid.
SurvivalTree grow_tree(const SurvivalDataset& ds, BootstrapSample sample, const TreeParams& params,
                       std::uint64_t seed);

}  // namespace oste
