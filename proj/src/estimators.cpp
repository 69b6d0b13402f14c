#include "oste/estimators.hpp"

#include <algorithm>
#include <vector>

#include "oste/error.hpp"

namespace oste {
namespace {

struct EventTable {
  std::vector<double> times;  // distinct event times, ascending
  std::vector<double> deaths;
  std::vector<double> at_risk;
};

EventTable tabulate(std::span<const Observation> sample, bool count_censoring) {
  if (sample.empty()) {
    throw ValidationError("estimator needs a nonempty sample");
  }
  std::vector<Observation> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end(), [](const Observation& a, const Observation& b) { return a.time < b.time; });

  EventTable table;
  std::size_t remaining = sorted.size();
  for (std::size_t i = 0; i < sorted.size();) {
    const double t = sorted[i].time;
    std::size_t events = 0;
    std::size_t j = i;
    for (; j < sorted.size() && sorted[j].time == t; ++j) {
      // The "event" of the censoring estimator is a censored observation.
      events += (sorted[j].event != count_censoring) ? 1 : 0;
    }
    if (events > 0) {
      table.times.push_back(t);
      table.deaths.push_back(static_cast<double>(events));
      table.at_risk.push_back(static_cast<double>(remaining));
    }
    remaining -= j - i;
    i = j;
  }
  return table;
}

StepFunction product_limit(std::span<const Observation> sample, bool count_censoring) {
  const auto table = tabulate(sample, count_censoring);
  std::vector<double> values;
  values.reserve(table.times.size());
  double s = 1.0;
  for (std::size_t j = 0; j < table.times.size(); ++j) {
    s *= 1.0 - table.deaths[j] / table.at_risk[j];
    values.push_back(s);
  }
  return StepFunction(CurveKind::survival, table.times, std::move(values));
}

}  // namespace

StepFunction kaplan_meier(std::span<const Observation> sample) { return product_limit(sample, false); }

StepFunction censoring_km(std::span<const Observation> sample) { return product_limit(sample, true); }

StepFunction nelson_aalen(std::span<const Observation> sample) {
  const auto table = tabulate(sample, false);
  std::vector<double> values;
  values.reserve(table.times.size());
  double h = 0.0;
  for (std::size_t j = 0; j < table.times.size(); ++j) {
    h += table.deaths[j] / table.at_risk[j];
    values.push_back(h);
  }
  return StepFunction(CurveKind::cumulative_hazard, table.times, std::move(values));
}

}  // namespace oste
