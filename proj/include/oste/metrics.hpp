#pragma once

#include <functional>
#include <span>
#include <vector>

#include "oste/dataset.hpp"
#include "oste/step_function.hpp"

namespace oste {

struct ConcordanceResult {
  double concordance = 0.0;
  std::size_t permissible_pairs = 0;
  double concordant = 0.0;  // credited pairs, half credits included

  double error() const { return 1.0 - concordance; }
};

// Harrell-style concordance over all unordered pairs; higher score means
// higher predicted risk.
//
// Discarded: equal times with both subjects events or both censored, and
// unequal times where the earlier subject is censored.
// Unequal times (earlier subject an event): 1 if the earlier subject scores
// higher, 0.5 on a score tie, else 0.
// Equal times, exactly one event: 1 if the event subject scores higher or the
// scores tie, 0.5 if the censored subject scores higher.
//
// Throws UndefinedConcordanceError when no pair is permissible.
ConcordanceResult c_index(std::span<const double> scores, std::span<const Observation> outcomes);

// Row-major predicted survival probabilities, one row per subject and one
// column per evaluation time.
class SurvivalMatrix {
 public:
  SurvivalMatrix() = default;
  SurvivalMatrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::vector<double> column(std::size_t c) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

using SurvivalPredictor = std::function<StepFunction(std::span<const double>)>;

// IPCW Brier score at t0:
//   (1/n) * sum_i w_i * (I(T_i > t0) - S_i(t0))^2
// with w_i = 1/G(t0) if T_i > t0, 1/G(T_i-) if T_i <= t0 and the event was
// observed, and 0 if T_i <= t0 and censored. A subject whose weight would
// divide by G(T_i-) = 0 gets weight 0 and leaves the denominator.
// Throws MetricUndefinedError if G(t0) = 0 while subjects survive past t0,
// or if every subject leaves the denominator.
double brier_score(std::span<const double> predicted_at_t0, std::span<const Observation> outcomes, double t0,
                   const StepFunction& ghat);

double brier_score(const SurvivalPredictor& predict, const SurvivalDataset& ds, std::span<const std::size_t> rows,
                   double t0, const StepFunction& ghat);

struct BrierCurve {
  std::vector<double> grid;    // evaluation times that produced a score
  std::vector<double> scores;  // BS(t) per retained grid point
  std::vector<double> skipped; // grid points where BS was undefined
  double ibs = 0.0;
  double t_star = 0.0;
};

// Distinct event times in (0, t*], t* the largest event time of the sample.
std::vector<double> default_grid(std::span<const Observation> outcomes);

// How BS(t) is averaged over the retained grid: `time` integrates the
// trapezoid over t and divides by the span; `points` gives every retained
// grid point equal weight.
enum class IbsWeighting { time, points };

const char* to_string(IbsWeighting w);

// Mean of BS over the retained grid under `weighting` (a single retained point yields its own score). `predicted` has one column
// per grid point. Throws MetricUndefinedError when every point is skipped and
// ValidationError on an empty or non-increasing grid.
BrierCurve integrated_brier_score(const SurvivalMatrix& predicted, std::span<const Observation> outcomes,
                                  std::span<const double> grid, const StepFunction& ghat,
                                  IbsWeighting weighting = IbsWeighting::time);

BrierCurve integrated_brier_score(const SurvivalPredictor& predict, const SurvivalDataset& ds,
                                  std::span<const std::size_t> rows, std::span<const double> grid,
                                  const StepFunction& ghat, IbsWeighting weighting = IbsWeighting::time);

}  // namespace oste
