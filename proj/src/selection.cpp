#include "oste/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oste/error.hpp"
#include "oste/estimators.hpp"
#include "oste/metrics.hpp"

namespace oste {

std::size_t pool_size(double m_fraction, std::size_t num_trees) {
  // The epsilon keeps 0.2 * 1000 at 200 despite binary rounding.
  const double m = std::ceil(m_fraction * static_cast<double>(num_trees) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(m, 1.0)), 1, num_trees);
}

std::vector<std::size_t> rank_trees(std::span<const std::optional<double>> oob_errors) {
  std::vector<std::size_t> order(oob_errors.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ea = oob_errors[a];
    const auto& eb = oob_errors[b];
    if (ea && eb) {
      return *ea < *eb;
    }
    return ea.has_value() && !eb.has_value();
  });
  return order;
}

std::vector<std::size_t> rank_trees(const SurvivalForest& forest, const SurvivalDataset& ds) {
  const auto errors = oob_errors(forest, ds);
  return rank_trees(errors);
}

OsteSelection select(const SurvivalForest& forest, std::span<const std::size_t> ranking, double m_fraction,
                     const SurvivalDataset& ds, std::span<const std::size_t> validation_rows,
                     IbsWeighting weighting) {
  if (!(m_fraction > 0.0 && m_fraction <= 1.0)) {
    throw ValidationError("M fraction must lie in (0, 1]");
  }
  {
    std::vector<std::size_t> sorted(ranking.begin(), ranking.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (sorted[i] != i) {
        throw ValidationError("ranking is not a permutation of the forest's trees");
      }
    }
    if (sorted.size() != forest.size()) {
      throw ValidationError("ranking is not a permutation of the forest's trees");
    }
  }
  if (validation_rows.empty() || ds.num_events(validation_rows) == 0) {
    throw SelectionError("validation rows must contain at least one event");
  }

  OsteSelection sel;
  sel.m_fraction = m_fraction;
  sel.weighting = weighting;
  sel.ranking.assign(ranking.begin(), ranking.end());
  const std::size_t M = pool_size(m_fraction, forest.size());
  sel.m_pool.assign(ranking.begin(), ranking.begin() + static_cast<std::ptrdiff_t>(M));

  const auto outcomes = ds.outcomes(validation_rows);
  const auto ghat = censoring_km(outcomes);
  const auto grid = default_grid(outcomes);
  if (grid.empty()) {
    throw SelectionError("validation rows have no event time after 0");
  }
  const TreeGridPredictions predictions(forest, ds, validation_rows, grid, sel.m_pool);

  auto validation_ibs = [&](const SurvivalMatrix& ensemble) {
    try {
      return integrated_brier_score(ensemble, outcomes, grid, ghat, weighting).ibs;
    } catch (const MetricUndefinedError& e) {
      throw SelectionError(std::string("validation IBS undefined: ") + e.what());
    }
  };

  // Running sum over accepted trees, in acceptance order; dividing a copy by
  // the count reproduces TreeGridPredictions::ensemble exactly.
  SurvivalMatrix sum = predictions.tree(sel.m_pool.front());
  auto mean_with = [&](const SurvivalMatrix* extra, std::size_t count) {
    SurvivalMatrix mean = sum;
    for (std::size_t r = 0; r < mean.rows(); ++r) {
      auto out = mean.row(r);
      for (std::size_t c = 0; c < out.size(); ++c) {
        if (extra) {
          out[c] += extra->at(r, c);
        }
        out[c] /= static_cast<double>(count);
      }
    }
    return mean;
  };

  double current = validation_ibs(mean_with(nullptr, 1));
  sel.accepted.push_back(sel.m_pool.front());
  sel.ibs_trajectory.push_back(current);
  sel.candidate_ibs.push_back(current);

  for (std::size_t k = 1; k < M; ++k) {
    const std::size_t t = sel.m_pool[k];
    const auto& tree_pred = predictions.tree(t);
    const double candidate = validation_ibs(mean_with(&tree_pred, sel.accepted.size() + 1));
    sel.candidate_ibs.push_back(candidate);
    if (current > candidate) {
      for (std::size_t r = 0; r < sum.rows(); ++r) {
        auto out = sum.row(r);
        for (std::size_t c = 0; c < out.size(); ++c) {
          out[c] += tree_pred.at(r, c);
        }
      }
      sel.accepted.push_back(t);
      sel.ibs_trajectory.push_back(candidate);
      current = candidate;
    }
  }
  return sel;
}

StepFunction predict(const OsteSelection& selection, const SurvivalForest& forest, std::span<const double> x) {
  if (selection.accepted.empty()) {
    throw ValidationError("selection has no accepted trees");
  }
  return ensemble_curve(forest, selection.accepted, x);
}

}  // namespace oste
