#include "oste/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "oste/csv.hpp"
#include "oste/error.hpp"
#include "oste/estimators.hpp"
#include "oste/forest.hpp"
#include "oste/metrics.hpp"
#include "oste/random.hpp"

namespace oste {

const char* to_string(Method m) {
  switch (m) {
    case Method::oste:
      return "oste";
    case Method::rsf:
      return "rsf";
    case Method::bagging:
      return "bagging";
  }
  return "?";
}

Method method_from_string(const std::string& name) {
  if (name == "oste") return Method::oste;
  if (name == "rsf") return Method::rsf;
  if (name == "bagging") return Method::bagging;
  throw ConfigError("unknown method '" + name + "' (expected oste, rsf or bagging)");
}

const char* to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::num_trees:
      return "B";
    case SweepParameter::m_fraction:
      return "M_fraction";
    case SweepParameter::mtry:
      return "p";
  }
  return "?";
}

SweepParameter sweep_parameter_from_string(const std::string& name) {
  if (name == "B" || name == "num_trees" || name == "trees") return SweepParameter::num_trees;
  if (name == "M" || name == "M_fraction" || name == "m_fraction") return SweepParameter::m_fraction;
  if (name == "p" || name == "mtry") return SweepParameter::mtry;
  throw ConfigError("unknown sweep parameter '" + name + "' (expected B, M or p)");
}

void validate(const ExperimentConfig& config, std::size_t num_features) {
  if (config.methods.empty()) {
    throw ConfigError("no methods requested");
  }
  for (std::size_t i = 0; i < config.methods.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (config.methods[i] == config.methods[j]) {
        throw ConfigError(std::string("method listed twice: ") + to_string(config.methods[i]));
      }
    }
  }
  if (config.runs < 1) throw ConfigError("runs must be at least 1");
  if (config.num_trees < 1) throw ConfigError("B must be at least 1");
  if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie in (0, 1)");
  }
  if (!(config.lb_fraction > 0.0 && config.lb_fraction < 1.0)) {
    throw ConfigError("L_B fraction must lie in (0, 1)");
  }
  if (!(config.m_fraction > 0.0 && config.m_fraction <= 1.0)) {
    throw ConfigError("M fraction must lie in (0, 1]");
  }
  if (config.mtry && (*config.mtry < 1 || *config.mtry > num_features)) {
    throw ConfigError("p must lie in [1, " + std::to_string(num_features) + "]");
  }
  if (config.min_node_size < 1) throw ConfigError("node size must be at least 1");
  if (config.max_attempts < 1) throw ConfigError("max attempts must be at least 1");
  if (config.tuning.folds == 1) throw ConfigError("tuning needs at least 2 folds");
  if (config.tuning.folds >= 2) {
    if (config.tuning.tree_grid.empty()) throw ConfigError("tuning tree grid is empty");
    for (std::size_t b : config.tuning.tree_grid) {
      if (b < 1) throw ConfigError("tuning tree grid entries must be at least 1");
    }
  }
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) {
    s.mean = std::numeric_limits<double>::quiet_NaN();
    s.sd = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

bool has_positive_event(const SurvivalDataset& ds, std::span<const std::size_t> rows) {
  return std::any_of(rows.begin(), rows.end(), [&](std::size_t r) {
    const auto& o = ds.outcome(r);
    return o.event && o.time > 0.0;
  });
}

std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

void check_disjoint(std::span<const std::size_t> a, std::span<const std::size_t> b, const char* what) {
  // Both sides come sorted from split().
  std::vector<std::size_t> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  if (!common.empty()) {
    throw std::logic_error(std::string("data-flow violation: ") + what + " share row " + std::to_string(common[0]));
  }
}

struct TestScore {
  double ibs = 0.0;
  std::optional<double> c_index;
};

TestScore score_on(const SurvivalForest& forest, const SurvivalDataset& ds, std::span<const std::size_t> rows,
                   std::span<const std::size_t> trees, IbsWeighting weighting) {
  const auto outcomes = ds.outcomes(rows);
  const auto ghat = censoring_km(outcomes);
  const auto grid = default_grid(outcomes);
  const auto surv = ensemble_survival(forest, ds, rows, grid, trees);
  TestScore score;
  score.ibs = integrated_brier_score(surv, outcomes, grid, ghat, weighting).ibs;
  const auto risk = ensemble_mortality(forest, ds, rows, trees);
  try {
    score.c_index = c_index(risk, outcomes).concordance;
  } catch (const UndefinedConcordanceError&) {
    score.c_index.reset();
  }
  return score;
}

struct Tuned {
  std::size_t num_trees;
  std::size_t mtry;
};

// k-fold CV over train: each fold's forest has max(tree_grid) trees, smaller
// B values use its leading trees.
Tuned tune(const SurvivalDataset& ds, std::span<const std::size_t> train, Method method,
           const ExperimentConfig& config, std::size_t base_mtry, std::uint64_t seed) {
  const std::size_t d = ds.num_features();
  std::vector<std::size_t> mtry_values;
  if (method == Method::bagging) {
    mtry_values = {d};
  } else if (config.tuning.tune_mtry) {
    mtry_values = iota_indices(d);
    for (auto& m : mtry_values) ++m;
  } else {
    mtry_values = {base_mtry};
  }
  std::vector<std::size_t> tree_grid = config.tuning.tree_grid;
  std::sort(tree_grid.begin(), tree_grid.end());
  tree_grid.erase(std::unique(tree_grid.begin(), tree_grid.end()), tree_grid.end());
  const std::size_t max_trees = tree_grid.back();

  std::vector<std::size_t> shuffled(train.begin(), train.end());
  Rng rng(derive_seed(seed, 0));
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const std::size_t k = std::min(config.tuning.folds, shuffled.size());
  std::vector<std::vector<std::size_t>> folds(k);
  for (std::size_t i = 0; i < shuffled.size(); ++i) folds[i % k].push_back(shuffled[i]);
  for (auto& f : folds) std::sort(f.begin(), f.end());

  Tuned best{config.num_trees, base_mtry};
  double best_ibs = std::numeric_limits<double>::infinity();
  for (std::size_t mi = 0; mi < mtry_values.size(); ++mi) {
    std::vector<double> sums(tree_grid.size(), 0.0);
    std::size_t used = 0;
    for (std::size_t fi = 0; fi < k; ++fi) {
      const auto& held = folds[fi];
      if (!has_positive_event(ds, held)) continue;
      std::vector<std::size_t> fit;
      std::set_difference(train.begin(), train.end(), held.begin(), held.end(), std::back_inserter(fit));
      ForestParams params{max_trees, mtry_values[mi], config.min_node_size, derive_seed(seed, 1 + mi, fi)};
      SurvivalForest forest;
      try {
        forest = grow_forest(ds, fit, params);
      } catch (const GrowthError&) {
        continue;
      }
      const auto outcomes = ds.outcomes(held);
      const auto ghat = censoring_km(outcomes);
      const auto grid = default_grid(outcomes);
      std::vector<double> ibs(tree_grid.size());
      bool ok = true;
      for (std::size_t bi = 0; bi < tree_grid.size() && ok; ++bi) {
        const auto trees = iota_indices(tree_grid[bi]);
        try {
          ibs[bi] = integrated_brier_score(ensemble_survival(forest, ds, held, grid, trees), outcomes, grid, ghat,
                                           config.ibs_weighting)
                        .ibs;
        } catch (const MetricUndefinedError&) {
          ok = false;
        }
      }
      if (!ok) continue;
      for (std::size_t bi = 0; bi < tree_grid.size(); ++bi) sums[bi] += ibs[bi];
      ++used;
    }
    if (used == 0) continue;
    for (std::size_t bi = 0; bi < tree_grid.size(); ++bi) {
      const double mean = sums[bi] / static_cast<double>(used);
      if (mean < best_ibs) {
        best_ibs = mean;
        best = {tree_grid[bi], mtry_values[mi]};
      }
    }
  }
  return best;
}

// One run of the protocol, evaluated once per entry of `m_fractions`
// (the forests do not depend on M).
std::vector<RunResult> run_once(const SurvivalDataset& ds, const ExperimentConfig& config, std::size_t run,
                                std::span<const double> m_fractions) {
  const std::size_t d = ds.num_features();
  const std::size_t mtry = config.mtry.value_or(default_mtry(d));
  std::string last_problem;

  for (std::size_t attempt = 0; attempt < config.max_attempts; ++attempt) {
    const std::uint64_t seed = derive_seed(config.master_seed, run, attempt);
    try {
      Rng rng(seed);
      const SplitIndices outer = split(ds, config.train_fraction, rng);
      const SplitIndices inner = split(ds, outer.train, config.lb_fraction, rng);
      check_disjoint(outer.test, inner.train, "test and L_B");
      check_disjoint(outer.test, inner.test, "test and L_V");
      check_disjoint(inner.train, inner.test, "L_B and L_V");
      if (!has_positive_event(ds, outer.test)) {
        throw DegenerateSplitError("test split has no event after time 0");
      }
      if (!has_positive_event(ds, inner.test)) {
        throw DegenerateSplitError("L_V has no event after time 0");
      }

      RunResult base;
      base.run = run;
      base.seed = seed;
      base.attempts = attempt + 1;
      base.train_size = outer.train.size();
      base.test_size = outer.test.size();
      base.lb_size = inner.train.size();
      base.lv_size = inner.test.size();

      std::vector<RunResult> results(m_fractions.size(), base);
      for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
        const Method method = config.methods[mi];
        const std::uint64_t method_seed = derive_seed(seed, static_cast<std::uint64_t>(method) + 1);
        const auto start = Clock::now();

        if (method == Method::oste) {
          const ForestParams params{config.num_trees, mtry, config.min_node_size, method_seed};
          const SurvivalForest forest = grow_forest(ds, inner.train, params);
          const auto ranking = rank_trees(forest, ds);
          const double grow_ms = elapsed_ms(start);
          for (std::size_t k = 0; k < m_fractions.size(); ++k) {
            const auto select_start = Clock::now();
            OsteSelection sel = select(forest, ranking, m_fractions[k], ds, inner.test, config.ibs_weighting);
            if (sel.accepted.size() > pool_size(m_fractions[k], forest.size())) {
              throw std::logic_error("OSTE kept more trees than its pool");
            }
            const TestScore score = score_on(forest, ds, outer.test, sel.accepted, config.ibs_weighting);
            MethodResult r{method, score.ibs, score.c_index, sel.accepted.size(), config.num_trees, mtry,
                           grow_ms + elapsed_ms(select_start)};
            sel.ranking.clear();
            results[k].methods.push_back(r);
            results[k].selection = std::move(sel);
          }
          continue;
        }

        const std::size_t base_mtry = method == Method::bagging ? d : mtry;
        Tuned tuned{config.num_trees, base_mtry};
        if (config.tuning.folds >= 2) {
          tuned = tune(ds, outer.train, method, config, base_mtry, derive_seed(method_seed, 99));
        }
        const ForestParams params{tuned.num_trees, tuned.mtry, config.min_node_size, method_seed};
        const SurvivalForest forest = grow_forest(ds, outer.train, params);
        const TestScore score = score_on(forest, ds, outer.test, {}, config.ibs_weighting);
        const MethodResult r{method, score.ibs, score.c_index, forest.size(), tuned.num_trees, tuned.mtry,
                             elapsed_ms(start)};
        for (auto& res : results) res.methods.push_back(r);
      }
      return results;
    } catch (const DegenerateSplitError& e) {
      last_problem = e.what();
    } catch (const GrowthError& e) {
      last_problem = e.what();
    } catch (const SelectionError& e) {
      last_problem = e.what();
    } catch (const MetricUndefinedError& e) {
      last_problem = e.what();
    }
  }
  throw DegenerateSplitError("run " + std::to_string(run) + ": no usable split after " +
                             std::to_string(config.max_attempts) + " attempts; last problem: " + last_problem);
}

RunReport assemble(const SurvivalDataset& ds, ExperimentConfig config, std::vector<RunResult> runs) {
  RunReport report;
  config.mtry = config.mtry.value_or(default_mtry(ds.num_features()));
  report.config = std::move(config);
  report.n = ds.size();
  report.d = ds.num_features();
  report.events = ds.num_events();
  report.runs = std::move(runs);
  for (std::size_t mi = 0; mi < report.config.methods.size(); ++mi) {
    std::vector<double> ibs, cidx, size;
    for (const auto& run : report.runs) {
      const auto& r = run.methods[mi];
      ibs.push_back(r.ibs);
      if (r.c_index) cidx.push_back(*r.c_index);
      size.push_back(static_cast<double>(r.size));
    }
    report.summary.push_back({report.config.methods[mi], summarize(ibs), summarize(cidx), summarize(size)});
  }
  return report;
}

}  // namespace

RunReport run_experiment(const SurvivalDataset& ds, const ExperimentConfig& config) {
  validate(config, ds.num_features());
  std::vector<RunResult> runs;
  const double m[] = {config.m_fraction};
  for (std::size_t r = 0; r < config.runs; ++r) {
    runs.push_back(std::move(run_once(ds, config, r, m).front()));
  }
  return assemble(ds, config, std::move(runs));
}

RunReport run_experiment(const ExperimentConfig& config) {
  if (config.data_path.empty() || config.config_path.empty()) {
    throw ConfigError("experiment needs both a data path and a column config path");
  }
  return run_experiment(load_dataset(config.data_path, config.config_path), config);
}

std::vector<SweepPoint> sweep(const SurvivalDataset& ds, const ExperimentConfig& config, SweepParameter parameter,
                              std::span<const double> values) {
  if (values.empty()) {
    throw ConfigError("sweep needs at least one value");
  }
  std::vector<ExperimentConfig> configs;
  for (double v : values) {
    ExperimentConfig c = config;
    if (parameter == SweepParameter::m_fraction) {
      c.m_fraction = v;
    } else {
      if (!(v >= 1.0) || v != std::floor(v)) {
        throw ConfigError(std::string("sweep values for ") + to_string(parameter) + " must be positive integers");
      }
      if (parameter == SweepParameter::num_trees) {
        c.num_trees = static_cast<std::size_t>(v);
      } else {
        c.mtry = static_cast<std::size_t>(v);
      }
    }
    validate(c, ds.num_features());
    configs.push_back(std::move(c));
  }

  std::vector<SweepPoint> points;
  if (parameter != SweepParameter::m_fraction) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      points.push_back({values[i], run_experiment(ds, configs[i])});
    }
    return points;
  }

  std::vector<std::vector<RunResult>> per_value(values.size());
  for (std::size_t r = 0; r < config.runs; ++r) {
    auto results = run_once(ds, config, r, values);
    for (std::size_t i = 0; i < values.size(); ++i) per_value[i].push_back(std::move(results[i]));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    points.push_back({values[i], assemble(ds, configs[i], std::move(per_value[i]))});
  }
  return points;
}

}  // namespace oste
