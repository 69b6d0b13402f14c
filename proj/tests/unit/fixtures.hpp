#pragma once

#include <string>
#include <vector>

#include "oste/dataset.hpp"
#include "oste/random.hpp"
#include "oste/simulate.hpp"

namespace fixtures {

inline std::string data_path(const std::string& name) { return std::string(OSTE_TEST_DATA_DIR) + "/" + name; }

// Numeric features x1..xd from a row-major matrix.
inline oste::SurvivalDataset numeric(std::size_t d, std::vector<double> values, std::vector<oste::Observation> y) {
  std::vector<oste::FeatureSpec> specs;
  for (std::size_t f = 0; f < d; ++f) specs.push_back({"x" + std::to_string(f + 1), oste::FeatureKind::numeric, {}});
  return oste::SurvivalDataset(oste::FeatureSchema(std::move(specs)), std::move(values), std::move(y));
}

inline oste::SurvivalDataset synthetic(std::size_t n, std::size_t d, std::uint64_t seed, std::size_t informative = 2,
                                       double censoring = 0.3) {
  oste::SimulationSpec spec;
  spec.n = n;
  spec.d = d;
  spec.informative = informative;
  spec.censoring_rate = censoring;
  oste::Rng rng(seed);
  return oste::simulate_dataset(spec, rng);
}

inline std::vector<std::size_t> all_rows(const oste::SurvivalDataset& ds) {
  std::vector<std::size_t> rows(ds.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return rows;
}

}  // namespace fixtures
