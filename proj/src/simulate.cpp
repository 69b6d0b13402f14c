#include "oste/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "oste/error.hpp"

namespace oste {
namespace {

double censored_fraction(const std::vector<double>& event_times, const std::vector<double>& unit_censor,
                         double scale) {
  std::size_t censored = 0;
  for (std::size_t i = 0; i < event_times.size(); ++i) {
    censored += scale * unit_censor[i] < event_times[i] ? 1 : 0;
  }
  return static_cast<double>(censored) / static_cast<double>(event_times.size());
}

}  // namespace

SurvivalDataset simulate_dataset(const SimulationSpec& spec, Rng& rng) {
  if (spec.n < 1 || spec.d < 1) {
    throw ValidationError("simulation needs n >= 1 and d >= 1");
  }
  if (spec.informative > spec.d) {
    throw ValidationError("more informative features than features");
  }
  if (!spec.coefficients.empty() && spec.coefficients.size() != spec.informative) {
    throw ValidationError("need one coefficient per informative feature");
  }
  if (!(spec.censoring_rate >= 0.0 && spec.censoring_rate < 1.0)) {
    throw ValidationError("censoring rate must lie in [0, 1)");
  }
  if (!(spec.base_rate > 0.0) || !(spec.weibull_shape > 0.0)) {
    throw ValidationError("base rate and Weibull shape must be positive");
  }

  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<double> values(spec.n * spec.d);
  std::vector<double> event_times(spec.n);
  std::vector<double> unit_censor(spec.n);
  const double shape = spec.model == HazardModel::weibull ? spec.weibull_shape : 1.0;
  for (std::size_t i = 0; i < spec.n; ++i) {
    double eta = 0.0;
    for (std::size_t f = 0; f < spec.d; ++f) {
      const double x = normal(rng);
      values[i * spec.d + f] = x;
      if (f < spec.informative) {
        eta += (spec.coefficients.empty() ? 1.0 : spec.coefficients[f]) * x;
      }
    }
    // Inverse transform of S(t) = exp(-(rate * t)^shape).
    const double u = 1.0 - unit(rng);  // (0, 1]
    const double rate = spec.base_rate * std::exp(eta / shape);
    event_times[i] = std::pow(-std::log(u), 1.0 / shape) / rate;
    unit_censor[i] = 1.0 - unit(rng);
  }

  double scale = std::numeric_limits<double>::infinity();
  if (spec.censoring_rate > 0.0) {
    double lo = 0.0;  // everything censored
    double hi = 1.0;
    while (censored_fraction(event_times, unit_censor, hi) > spec.censoring_rate) {
      hi *= 2.0;
    }
    for (int iter = 0; iter < 200; ++iter) {
      const double mid = lo + (hi - lo) / 2.0;
      if (censored_fraction(event_times, unit_censor, mid) > spec.censoring_rate) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    // hi meets the target from below; lo overshoots. Keep the closer one.
    const double f_hi = censored_fraction(event_times, unit_censor, hi);
    const double f_lo = censored_fraction(event_times, unit_censor, lo);
    scale = std::abs(f_lo - spec.censoring_rate) < std::abs(f_hi - spec.censoring_rate) ? lo : hi;
  }

  std::vector<Observation> outcomes(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double c = scale * unit_censor[i];
    outcomes[i] = c < event_times[i] ? Observation{c, false} : Observation{event_times[i], true};
  }

  std::vector<FeatureSpec> features;
  for (std::size_t f = 0; f < spec.d; ++f) {
    features.push_back({"x" + std::to_string(f + 1), FeatureKind::numeric, {}});
  }
  return SurvivalDataset(FeatureSchema(std::move(features)), std::move(values), std::move(outcomes));
}

}  // namespace oste
