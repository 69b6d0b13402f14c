#pragma once

#include <optional>
#include <span>
#include <vector>

#include "oste/dataset.hpp"
#include "oste/forest.hpp"
#include "oste/metrics.hpp"
#include "oste/step_function.hpp"

namespace oste {

// Outcome of the greedy sub-ensemble search. Trees are tried in ranking order
// from the top-M pool and kept only when they strictly lower the validation
// integrated Brier score.
struct OsteSelection {
  std::vector<std::size_t> ranking;        // all trees, ascending OOB error
  std::vector<std::size_t> m_pool;         // first M entries of ranking
  std::vector<std::size_t> accepted;       // kept trees in acceptance order
  std::vector<double> ibs_trajectory;      // validation IBS after each acceptance
  std::vector<double> candidate_ibs;       // validation IBS of every tried ensemble, pool order
  double m_fraction = 0.2;
  IbsWeighting weighting = IbsWeighting::time;

  bool operator==(const OsteSelection&) const = default;
};

// ceil(m_fraction * num_trees), within [1, num_trees].
std::size_t pool_size(double m_fraction, std::size_t num_trees);

// Stable ascending sort by OOB error; trees without a usable error go last,
// ties keep tree-index order.
std::vector<std::size_t> rank_trees(std::span<const std::optional<double>> oob_errors);
std::vector<std::size_t> rank_trees(const SurvivalForest& forest, const SurvivalDataset& ds);

// Greedy forward selection on `validation_rows` (L_V). The censoring
// distribution and the evaluation grid both come from the validation rows.
// Throws ValidationError for m_fraction outside (0, 1] or a ranking that is
// not a permutation of the forest, and SelectionError when the validation
// rows have no event or the validation IBS is undefined.
OsteSelection select(const SurvivalForest& forest, std::span<const std::size_t> ranking, double m_fraction,
                     const SurvivalDataset& ds, std::span<const std::size_t> validation_rows,
                     IbsWeighting weighting = IbsWeighting::time);

StepFunction predict(const OsteSelection& selection, const SurvivalForest& forest, std::span<const double> x);

}  // namespace oste
