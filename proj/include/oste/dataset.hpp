#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oste/random.hpp"

namespace oste {

enum class FeatureKind { numeric, ordered_integer, categorical };

const char* to_string(FeatureKind kind);

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;
  // Categorical only. A categorical value is stored as its index into this list.
  std::vector<std::string> levels;

  bool operator==(const FeatureSpec&) const = default;
};

class FeatureSchema {
 public:
  FeatureSchema() = default;
  // Throws ValidationError on empty/duplicate names or a categorical feature
  // without levels.
  explicit FeatureSchema(std::vector<FeatureSpec> features);

  std::size_t size() const { return features_.size(); }
  const FeatureSpec& operator[](std::size_t i) const { return features_[i]; }
  const std::vector<FeatureSpec>& features() const { return features_; }
  std::optional<std::size_t> index_of(const std::string& name) const;

  // Stable FNV-1a digest of names, kinds and levels; recorded in forest manifests.
  std::uint64_t digest() const;

  bool operator==(const FeatureSchema&) const = default;

 private:
  std::vector<FeatureSpec> features_;
};

// One subject's outcome: observed time and whether the event was seen
// (false means right-censored at `time`).
struct Observation {
  double time = 0.0;
  bool event = false;

  bool operator==(const Observation&) const = default;
};

using IndexSet = std::vector<std::size_t>;

// Immutable right-censored dataset. Feature values are row-major doubles;
// categorical values hold the level index.
class SurvivalDataset {
 public:
  SurvivalDataset() = default;
  // Throws ValidationError if shapes disagree, a time is negative or
  // non-finite, or a value does not conform to its feature kind.
  SurvivalDataset(FeatureSchema schema, std::vector<double> values, std::vector<Observation> outcomes);

  std::size_t size() const { return outcomes_.size(); }
  std::size_t num_features() const { return schema_.size(); }
  const FeatureSchema& schema() const { return schema_; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * num_features(), num_features()};
  }
  double value(std::size_t i, std::size_t feature) const { return values_[i * num_features() + feature]; }
  const Observation& outcome(std::size_t i) const { return outcomes_[i]; }
  std::span<const Observation> outcomes() const { return outcomes_; }
  std::vector<Observation> outcomes(std::span<const std::size_t> rows) const;

  std::size_t num_events() const;
  std::size_t num_events(std::span<const std::size_t> rows) const;

 private:
  FeatureSchema schema_;
  std::vector<double> values_;
  std::vector<Observation> outcomes_;
};

// A two-way partition of an index pool. At the top level `train`/`test`; the
// nested split of the training part uses train = L_B (forest growing) and
// test = L_V (selection validation).
struct SplitIndices {
  IndexSet train;
  IndexSet test;
};

// Uniform random partition of all rows; |train| = round(n * train_fraction).
// Throws ValidationError when n * train_fraction < 2 or the fraction is not in
// (0, 1), and DegenerateSplitError when the training part holds no event.
SplitIndices split(const SurvivalDataset& ds, double train_fraction, Rng& rng);

// Same, restricted to `pool`. Both parts are kept nonempty.
SplitIndices split(const SurvivalDataset& ds, std::span<const std::size_t> pool, double train_fraction, Rng& rng);

struct BootstrapSample {
  IndexSet in_bag;  // with replacement, |in_bag| == |pool|, draw order kept
  IndexSet oob;     // sorted, pool minus in_bag
};

BootstrapSample bootstrap(std::span<const std::size_t> pool, Rng& rng);

}  // namespace oste
