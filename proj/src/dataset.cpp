#include "oste/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "oste/error.hpp"

namespace oste {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::parse: return "parse";
    case ErrorKind::validation: return "validation";
    case ErrorKind::degenerate_split: return "degenerate_split";
    case ErrorKind::growth: return "growth";
    case ErrorKind::undefined_concordance: return "undefined_concordance";
    case ErrorKind::metric_undefined: return "metric_undefined";
    case ErrorKind::selection: return "selection";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

const char* to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::numeric: return "numeric";
    case FeatureKind::ordered_integer: return "ordered";
    case FeatureKind::categorical: return "categorical";
  }
  return "unknown";
}

FeatureSchema::FeatureSchema(std::vector<FeatureSpec> features) : features_(std::move(features)) {
  std::unordered_set<std::string> seen;
  for (const auto& f : features_) {
    if (f.name.empty()) {
      throw ValidationError("feature names must be nonempty");
    }
    if (!seen.insert(f.name).second) {
      throw ValidationError("duplicate feature name '" + f.name + "'");
    }
    if (f.kind == FeatureKind::categorical && f.levels.empty()) {
      throw ValidationError("categorical feature '" + f.name + "' has no levels");
    }
  }
}

std::optional<std::size_t> FeatureSchema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].name == name) {
      return i;
    }
  }
  return std::nullopt;
}

std::uint64_t FeatureSchema::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;
    h *= 0x100000001b3ULL;
  };
  for (const auto& f : features_) {
    feed(f.name);
    feed(to_string(f.kind));
    for (const auto& level : f.levels) {
      feed(level);
    }
  }
  return h;
}

SurvivalDataset::SurvivalDataset(FeatureSchema schema, std::vector<double> values,
                                 std::vector<Observation> outcomes)
    : schema_(std::move(schema)), values_(std::move(values)), outcomes_(std::move(outcomes)) {
  const std::size_t d = schema_.size();
  if (values_.size() != outcomes_.size() * d) {
    throw ValidationError("feature matrix has " + std::to_string(values_.size()) + " values, expected " +
                          std::to_string(outcomes_.size() * d));
  }
  for (std::size_t i = 0; i < outcomes_.size(); ++i) {
    const double t = outcomes_[i].time;
    if (!std::isfinite(t) || t < 0.0) {
      throw ValidationError("row " + std::to_string(i) + ": time must be finite and >= 0");
    }
    for (std::size_t f = 0; f < d; ++f) {
      const double v = values_[i * d + f];
      const auto& spec = schema_[f];
      bool ok = std::isfinite(v);
      if (ok && spec.kind == FeatureKind::ordered_integer) {
        ok = v == std::floor(v);
      } else if (ok && spec.kind == FeatureKind::categorical) {
        ok = v == std::floor(v) && v >= 0.0 && v < static_cast<double>(spec.levels.size());
      }
      if (!ok) {
        throw ValidationError("row " + std::to_string(i) + ": value of feature '" + spec.name +
                              "' does not conform to kind " + to_string(spec.kind));
      }
    }
  }
}

std::vector<Observation> SurvivalDataset::outcomes(std::span<const std::size_t> rows) const {
  std::vector<Observation> out;
  out.reserve(rows.size());
  for (auto i : rows) {
    out.push_back(outcomes_[i]);
  }
  return out;
}

std::size_t SurvivalDataset::num_events() const {
  return static_cast<std::size_t>(
      std::count_if(outcomes_.begin(), outcomes_.end(), [](const Observation& o) { return o.event; }));
}

std::size_t SurvivalDataset::num_events(std::span<const std::size_t> rows) const {
  std::size_t events = 0;
  for (auto i : rows) {
    events += outcomes_[i].event ? 1 : 0;
  }
  return events;
}

SplitIndices split(const SurvivalDataset& ds, double train_fraction, Rng& rng) {
  IndexSet all(ds.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return split(ds, all, train_fraction, rng);
}

SplitIndices split(const SurvivalDataset& ds, std::span<const std::size_t> pool, double train_fraction, Rng& rng) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("split fraction must lie in (0, 1)");
  }
  const double n = static_cast<double>(pool.size());
  if (n * train_fraction < 2.0) {
    throw ValidationError("split of " + std::to_string(pool.size()) + " rows at fraction " +
                          std::to_string(train_fraction) + " leaves fewer than 2 training rows");
  }
  // Both parts nonempty: a 95% split of a small pool must still leave a validation row.
  const auto n_train = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(n * train_fraction)), 1,
                                               pool.size() - 1);

  IndexSet shuffled(pool.begin(), pool.end());
  std::shuffle(shuffled.begin(), shuffled.end(), rng);

  SplitIndices out;
  out.train.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(n_train), shuffled.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());

  if (ds.num_events(out.train) == 0) {
    throw DegenerateSplitError("training part of the split contains no events");
  }
  return out;
}

BootstrapSample bootstrap(std::span<const std::size_t> pool, Rng& rng) {
  if (pool.empty()) {
    throw ValidationError("cannot bootstrap an empty index set");
  }
  BootstrapSample out;
  out.in_bag.reserve(pool.size());
  std::vector<char> drawn(pool.size(), 0);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const std::size_t k = pick(rng);
    drawn[k] = 1;
    out.in_bag.push_back(pool[k]);
  }
  for (std::size_t k = 0; k < pool.size(); ++k) {
    if (!drawn[k]) {
      out.oob.push_back(pool[k]);
    }
  }
  std::sort(out.oob.begin(), out.oob.end());
  return out;
}

}  // namespace oste
