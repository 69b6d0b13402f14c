#pragma once

#include <span>

#include "oste/dataset.hpp"
#include "oste/step_function.hpp"

namespace oste {

// Product-limit survival estimate with knots at the distinct event times.
// Subjects censored at an event time stay in that time's risk set.
// Throws ValidationError on empty input.
StepFunction kaplan_meier(std::span<const Observation> sample);

// Cumulative hazard sum of d_j / n_j with the same risk-set convention.
StepFunction nelson_aalen(std::span<const Observation> sample);

// Kaplan-Meier of the censoring distribution (status inverted): G-hat for IPCW.
StepFunction censoring_km(std::span<const Observation> sample);

}  // namespace oste
