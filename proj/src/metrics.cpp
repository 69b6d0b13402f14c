#include "oste/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oste/error.hpp"

namespace oste {

ConcordanceResult c_index(std::span<const double> scores, std::span<const Observation> outcomes) {
  if (scores.size() != outcomes.size()) {
    throw ValidationError("c_index: scores and outcomes differ in length");
  }
  const std::size_t n = scores.size();
  ConcordanceResult result;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      std::size_t early = i;
      std::size_t late = j;
      if (outcomes[j].time < outcomes[i].time) {
        std::swap(early, late);
      }
      const auto& oe = outcomes[early];
      const auto& ol = outcomes[late];
      if (oe.time < ol.time) {
        if (!oe.event) {
          continue;
        }
        ++result.permissible_pairs;
        if (scores[early] > scores[late]) {
          result.concordant += 1.0;
        } else if (scores[early] == scores[late]) {
          result.concordant += 0.5;
        }
        continue;
      }
      if (oe.event == ol.event) {
        continue;
      }
      ++result.permissible_pairs;
      const std::size_t ev = oe.event ? early : late;
      const std::size_t cens = oe.event ? late : early;
      result.concordant += scores[ev] >= scores[cens] ? 1.0 : 0.5;
    }
  }
  if (result.permissible_pairs == 0) {
    throw UndefinedConcordanceError("no permissible pairs among " + std::to_string(n) + " observations");
  }
  result.concordance = result.concordant / static_cast<double>(result.permissible_pairs);
  return result;
}

std::vector<double> SurvivalMatrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    out[r] = at(r, c);
  }
  return out;
}

double brier_score(std::span<const double> predicted_at_t0, std::span<const Observation> outcomes, double t0,
                   const StepFunction& ghat) {
  if (predicted_at_t0.size() != outcomes.size()) {
    throw ValidationError("brier_score: predictions and outcomes differ in length");
  }
  const double g_t0 = ghat(t0);
  double total = 0.0;
  std::size_t denominator = outcomes.size();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    const double s = predicted_at_t0[i];
    if (o.time > t0) {
      if (g_t0 <= 0.0) {
        throw MetricUndefinedError("censoring survival is 0 at t0 = " + std::to_string(t0) +
                                   " while subjects remain at risk");
      }
      const double r = 1.0 - s;
      total += r * r / g_t0;
    } else if (o.event) {
      const double g = ghat.left_limit(o.time);
      if (g <= 0.0) {
        --denominator;
        continue;
      }
      total += s * s / g;
    }
  }
  if (denominator == 0) {
    throw MetricUndefinedError("no subject carries weight at t0 = " + std::to_string(t0));
  }
  return total / static_cast<double>(denominator);
}

double brier_score(const SurvivalPredictor& predict, const SurvivalDataset& ds, std::span<const std::size_t> rows,
                   double t0, const StepFunction& ghat) {
  std::vector<double> predicted;
  predicted.reserve(rows.size());
  for (auto r : rows) {
    predicted.push_back(predict(ds.row(r))(t0));
  }
  return brier_score(predicted, ds.outcomes(rows), t0, ghat);
}

const char* to_string(IbsWeighting w) { return w == IbsWeighting::time ? "time" : "points"; }

std::vector<double> default_grid(std::span<const Observation> outcomes) {
  std::vector<double> grid;
  for (const auto& o : outcomes) {
    if (o.event && o.time > 0.0) {
      grid.push_back(o.time);
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

BrierCurve integrated_brier_score(const SurvivalMatrix& predicted, std::span<const Observation> outcomes,
                                  std::span<const double> grid, const StepFunction& ghat, IbsWeighting weighting) {
  if (grid.empty()) {
    throw ValidationError("integrated Brier score needs a nonempty grid");
  }
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] > 0.0) || (k > 0 && !(grid[k] > grid[k - 1]))) {
      throw ValidationError("Brier grid must be positive and strictly increasing");
    }
  }
  if (predicted.rows() != outcomes.size() || predicted.cols() != grid.size()) {
    throw ValidationError("prediction matrix shape does not match outcomes x grid");
  }

  BrierCurve curve;
  curve.t_star = grid.back();
  std::vector<double> column(outcomes.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (std::size_t r = 0; r < outcomes.size(); ++r) {
      column[r] = predicted.at(r, k);
    }
    try {
      curve.scores.push_back(brier_score(column, outcomes, grid[k], ghat));
      curve.grid.push_back(grid[k]);
    } catch (const MetricUndefinedError&) {
      curve.skipped.push_back(grid[k]);
    }
  }
  if (curve.grid.empty()) {
    throw MetricUndefinedError("Brier score undefined at every grid point");
  }
  if (curve.grid.size() == 1) {
    curve.ibs = curve.scores.front();
    return curve;
  }
  if (weighting == IbsWeighting::points) {
    double sum = 0.0;
    for (double s : curve.scores) {
      sum += s;
    }
    curve.ibs = sum / static_cast<double>(curve.scores.size());
    return curve;
  }
  double area = 0.0;
  for (std::size_t k = 1; k < curve.grid.size(); ++k) {
    area += (curve.grid[k] - curve.grid[k - 1]) * (curve.scores[k] + curve.scores[k - 1]) / 2.0;
  }
  curve.ibs = area / (curve.grid.back() - curve.grid.front());
  return curve;
}

BrierCurve integrated_brier_score(const SurvivalPredictor& predict, const SurvivalDataset& ds,
                                  std::span<const std::size_t> rows, std::span<const double> grid,
                                  const StepFunction& ghat, IbsWeighting weighting) {
  SurvivalMatrix predicted(rows.size(), grid.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto values = predict(ds.row(rows[i])).evaluate(grid);
    std::copy(values.begin(), values.end(), predicted.row(i).begin());
  }
  return integrated_brier_score(predicted, ds.outcomes(rows), grid, ghat, weighting);
}

}  // namespace oste
