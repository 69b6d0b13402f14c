#pragma once

#include <span>
#include <vector>

#include "oste/dataset.hpp"

namespace oste {

// Standardized two-sample log-rank chi-square (O_a - E_a)^2 / V over the
// pooled distinct event times. Returns 0 when V == 0, including when the
// pooled sample has no events. Throws ValidationError if a group is empty.
double logrank_statistic(std::span<const Observation> group_a, std::span<const Observation> group_b);

namespace detail {

// Event table of a node: pooled distinct event times with their death and
// at-risk counts. Shared by the public statistic and the tree split search.
struct LogrankTable {
  std::vector<double> deaths;   // d_j
  std::vector<double> at_risk;  // n_j

  std::size_t size() const { return deaths.size(); }
};

// Statistic for group a given its per-time deaths d_a[j] and at-risk n_a[j].
double logrank_from_counts(const LogrankTable& pooled, std::span<const double> deaths_a,
                           std::span<const double> at_risk_a);

}  // namespace detail
}  // namespace oste
