#pragma once

#include <cstdint>
#include <vector>

#include "oste/dataset.hpp"

namespace oste {

enum class HazardModel { exponential, weibull };

struct SimulationSpec {
  std::size_t n = 500;
  std::size_t d = 10;
  // The first `informative` features carry effects; the rest are noise.
  std::size_t informative = 2;
  // Log-hazard coefficient per informative feature; empty means 1.0 each.
  std::vector<double> coefficients;
  HazardModel model = HazardModel::exponential;
  double weibull_shape = 1.5;
  double base_rate = 0.1;
  double censoring_rate = 0.3;  // target censored fraction in [0, 1)
};

// Standard-normal numeric features; event times with hazard
// base_rate * exp(x . beta) (Weibull: shape `weibull_shape`); independent
// uniform censoring U(0, c) with c found by bisection so the realized censored
// fraction is as close as the sample allows to the target.
SurvivalDataset simulate_dataset(const SimulationSpec& spec, Rng& rng);

}  // namespace oste
