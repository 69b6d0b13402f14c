#include "oste/logrank.hpp"

#include <algorithm>

#include "oste/error.hpp"

namespace oste {
namespace detail {

double logrank_from_counts(const LogrankTable& pooled, std::span<const double> deaths_a,
                           std::span<const double> at_risk_a) {
  double observed = 0.0;
  double expected = 0.0;
  double variance = 0.0;
  for (std::size_t j = 0; j < pooled.size(); ++j) {
    const double d = pooled.deaths[j];
    const double n = pooled.at_risk[j];
    const double share = at_risk_a[j] / n;
    observed += deaths_a[j];
    expected += d * share;
    if (n > 1.0) {
      variance += d * share * (1.0 - share) * (n - d) / (n - 1.0);
    }
  }
  if (!(variance > 0.0)) {
    return 0.0;
  }
  const double diff = observed - expected;
  return diff * diff / variance;
}

}  // namespace detail

double logrank_statistic(std::span<const Observation> group_a, std::span<const Observation> group_b) {
  if (group_a.empty() || group_b.empty()) {
    throw ValidationError("log-rank statistic needs two nonempty groups");
  }
  std::vector<double> times;
  for (const auto* group : {&group_a, &group_b}) {
    for (const auto& o : *group) {
      if (o.event) {
        times.push_back(o.time);
      }
    }
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  const std::size_t J = times.size();
  detail::LogrankTable pooled{std::vector<double>(J, 0.0), std::vector<double>(J, 0.0)};
  std::vector<double> deaths_a(J, 0.0);
  std::vector<double> at_risk_a(J, 0.0);

  // Each subject is at risk at every event time <= its own time.
  auto add = [&](const Observation& o, bool in_a) {
    const auto reach = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), o.time) - times.begin());
    for (std::size_t j = 0; j < reach; ++j) {
      pooled.at_risk[j] += 1.0;
      if (in_a) {
        at_risk_a[j] += 1.0;
      }
    }
    if (o.event) {
      pooled.deaths[reach - 1] += 1.0;
      if (in_a) {
        deaths_a[reach - 1] += 1.0;
      }
    }
  };
  for (const auto& o : group_a) {
    add(o, true);
  }
  for (const auto& o : group_b) {
    add(o, false);
  }
  return detail::logrank_from_counts(pooled, deaths_a, at_risk_a);
}

}  // namespace oste
