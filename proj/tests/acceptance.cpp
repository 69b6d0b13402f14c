// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Pass criterion numbers as arguments to run a subset.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "oste/csv.hpp"
#include "oste/error.hpp"
#include "oste/estimators.hpp"
#include "oste/forest.hpp"
#include "oste/harness.hpp"
#include "oste/logrank.hpp"
#include "oste/metrics.hpp"
#include "oste/selection.hpp"
#include "oste/simulate.hpp"

using namespace oste;
using Sample = std::vector<Observation>;

namespace {

// Tolerances and targets.
constexpr double kEstimatorTol = 1e-12;
constexpr double kLogrankTol = 1e-9;
constexpr double kSymmetryTol = 1e-12;
constexpr double kBrierTol = 1e-12;
constexpr double kVeteranRsfTarget = 0.1692;
constexpr double kVeteranOsteTarget = 0.1683;
constexpr double kVeteranBand = 0.05;
constexpr double kOsteSizeLow = 20;
constexpr double kOsteSizeHigh = 200;
constexpr double kPlateauTol = 0.01;
constexpr double kTreeCountTol = 0.01;
constexpr int kImportanceRuns = 100;
constexpr int kImportanceFirstMin = 95;
constexpr double kNullImportanceTol = 0.02;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Outcome estimators() {
  std::mt19937_64 rng(101);
  double worst = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const auto s = oracle::random_sample(rng, 1 + rep % 12);
    const auto km = kaplan_meier(s);
    const auto na = nelson_aalen(s);
    const auto g = censoring_km(s);
    std::set<double> points{0.0, 100.0};
    for (const auto& o : s) {
      points.insert(o.time);
      points.insert(o.time - 0.5);
    }
    for (double t : points) {
      worst = std::max(worst, std::abs(km(t) - oracle::km(s, t)));
      worst = std::max(worst, std::abs(na(t) - oracle::na(s, t)));
      worst = std::max(worst, std::abs(g(t) - oracle::km(s, t, false)));
    }
  }
  return {worst <= kEstimatorTol, fmt("max abs diff %.3g over 200 samples", worst)};
}

Outcome logrank() {
  std::mt19937_64 rng(202);
  double worst = 0, worst_sym = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const auto a = oracle::random_sample(rng, 1 + rep % 9);
    const auto b = oracle::random_sample(rng, 1 + (rep / 9) % 11);
    const double got = logrank_statistic(a, b);
    const double ref = oracle::logrank(a, b);
    worst = std::max(worst, std::abs(got - ref) / std::max(1.0, std::abs(ref)));
    worst_sym = std::max(worst_sym, std::abs(got - logrank_statistic(b, a)));
  }
  return {worst <= kLogrankTol && worst_sym <= kSymmetryTol,
          fmt("max diff %.3g", worst) + fmt(", max asymmetry %.3g", worst_sym)};
}

Outcome concordance() {
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<int> score(0, 3);
  int mismatches = 0, checked = 0;
  for (int rep = 0; rep < 500; ++rep) {
    const auto y = oracle::random_sample(rng, 1 + rep % 10, 5, 0.6);
    std::vector<double> s(y.size());
    for (auto& v : s) v = score(rng);
    const auto ref = oracle::c_index(s, y);
    if (ref.pairs == 0) {
      try {
        c_index(s, y);
        ++mismatches;
      } catch (const UndefinedConcordanceError&) {
      }
      continue;
    }
    const auto got = c_index(s, y);
    ++checked;
    if (got.concordant != ref.credit || got.permissible_pairs != ref.pairs ||
        got.concordance != ref.credit / ref.pairs)
      ++mismatches;
  }
  const Sample ordered{{1, true}, {2, true}, {3, false}, {4, true}};
  const double perfect = c_index(std::vector<double>{4, 3, 2, 1}, ordered).concordance;
  const double anti = c_index(std::vector<double>{1, 2, 3, 4}, ordered).concordance;
  return {mismatches == 0 && perfect == 1.0 && anti == 0.0,
          std::to_string(mismatches) + " mismatches in 500 samples (" + std::to_string(checked) +
              " defined), perfect " + fmt("%g", perfect) + ", anti-perfect " + fmt("%g", anti)};
}

Outcome brier() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u;
  double worst = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const auto y = oracle::random_sample(rng, 1 + rep % 12, 6, 1.0);
    std::vector<double> s(y.size());
    for (auto& v : s) v = u(rng);
    const auto g = censoring_km(y);
    for (double t0 : {0.5, 1.0, 2.0, 3.5, 5.0, 6.0}) {
      double ref = 0;
      for (std::size_t i = 0; i < y.size(); ++i) {
        const double ind = y[i].time > t0 ? 1.0 : 0.0;
        ref += (ind - s[i]) * (ind - s[i]);
      }
      worst = std::max(worst, std::abs(brier_score(s, y, t0, g) - ref / static_cast<double>(y.size())));
    }
  }
  // Worked by hand: G(2) = 3/4, G(4) = 3/8.
  // t0 = 2.5: (0.04 + 0 + 0.36/0.75 + 0.49/0.75 + 0.01/0.75) / 5 = 29/375.
  // t0 = 4.5: (0.01 + 0 + 0.16/0.75 + 0 + 0.04/0.375) / 5 = 0.066.
  const Sample y{{1, true}, {2, false}, {3, true}, {4, false}, {5, true}};
  const auto g = censoring_km(y);
  const double h1 = brier_score(std::vector<double>{0.2, 0.5, 0.6, 0.7, 0.9}, y, 2.5, g);
  const double h2 = brier_score(std::vector<double>{0.1, 0.3, 0.4, 0.5, 0.8}, y, 4.5, g);
  const double hand = std::max(std::abs(h1 - 29.0 / 375.0), std::abs(h2 - 0.066));
  return {worst <= kBrierTol && hand <= kBrierTol,
          fmt("uncensored max diff %.3g", worst) + fmt(", hand case max diff %.3g", hand)};
}

Outcome selection_invariant() {
  int selections = 0, violations = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SimulationSpec spec;
    spec.n = 160;
    spec.d = 4;
    Rng rng(seed);
    const auto ds = simulate_dataset(spec, rng);
    const auto parts = split(ds, 0.8, rng);
    const auto forest = grow_forest(ds, parts.train, {60, 2, 3, seed});
    const auto ranking = rank_trees(forest, ds);
    for (double m : {0.05, 0.2, 0.5, 1.0}) {
      const auto sel = select(forest, ranking, m, ds, parts.test);
      ++selections;
      bool ok = !sel.accepted.empty() && sel.accepted.size() <= pool_size(m, forest.size()) &&
                sel.accepted.size() <= static_cast<std::size_t>(std::ceil(m * 60.0));
      for (std::size_t k = 1; k < sel.ibs_trajectory.size(); ++k)
        ok = ok && sel.ibs_trajectory[k] < sel.ibs_trajectory[k - 1];
      if (!ok) ++violations;
    }
  }
  SimulationSpec spec;
  spec.n = 120;
  spec.d = 3;
  Rng rng(99);
  const auto ds = simulate_dataset(spec, rng);
  const auto parts = split(ds, 0.8, rng);
  const auto one = grow_forest(ds, parts.train, {1, 2, 3, 7});
  const SurvivalForest copies(std::vector<SurvivalTree>(50, one[0]), one.schema(), one.params(), one.event_grid());
  std::vector<std::size_t> ranking(50);
  for (std::size_t i = 0; i < ranking.size(); ++i) ranking[i] = i;
  const auto dup = select(copies, ranking, 1.0, ds, parts.test);
  return {violations == 0 && dup.accepted.size() == 1,
          std::to_string(violations) + " violations in " + std::to_string(selections) +
              " selections; duplicated forest kept " + std::to_string(dup.accepted.size())};
}

Outcome veteran() {
  const std::string dir = OSTE_TEST_DATA_DIR;
  const auto ds = load_dataset(dir + "/veteran.csv", dir + "/veteran.cfg");
  ExperimentConfig c;
  c.methods = {Method::oste, Method::rsf};
  c.runs = 20;
  c.num_trees = 1000;
  c.m_fraction = 0.2;
  c.min_node_size = 3;
  c.master_seed = 1;
  const auto rep = run_experiment(ds, c);
  const double oste_ibs = rep.summary[0].ibs.mean;
  const double rsf_ibs = rep.summary[1].ibs.mean;
  const double size = rep.summary[0].size.mean;
  const bool pass = std::abs(oste_ibs - kVeteranOsteTarget) <= kVeteranBand &&
                    std::abs(rsf_ibs - kVeteranRsfTarget) <= kVeteranBand && size >= kOsteSizeLow &&
                    size <= kOsteSizeHigh;
  return {pass, "n=" + std::to_string(ds.size()) + " d=" + std::to_string(ds.num_features()) + " p=" +
                    std::to_string(*rep.config.mtry) + fmt(", mean IBS oste %.4f", oste_ibs) +
                    fmt(" (target 0.1683), rsf %.4f", rsf_ibs) + fmt(" (target 0.1692), mean oste size %.1f", size)};
}

Outcome plateau() {
  SimulationSpec spec;
  spec.n = 500;
  spec.d = 10;
  Rng rng(505);
  const auto ds = simulate_dataset(spec, rng);
  ExperimentConfig c;
  c.methods = {Method::oste};
  c.runs = 10;
  c.num_trees = 1000;
  c.master_seed = 7;
  std::vector<double> ms;
  for (int k = 1; k <= 12; ++k) ms.push_back(0.05 * k);
  const auto pts = sweep(ds, c, SweepParameter::m_fraction, ms);
  double lo = 1, hi = 0, ibs_1000 = 0;
  std::string curve;
  for (const auto& p : pts) {
    const double ibs = p.report.summary[0].ibs.mean;
    curve += fmt(" %.4f", ibs);
    if (p.value >= 0.2 - 1e-9) {
      lo = std::min(lo, ibs);
      hi = std::max(hi, ibs);
    }
    if (std::abs(p.value - 0.2) < 1e-9) ibs_1000 = ibs;
  }
  c.num_trees = 2000;
  const double ibs_2000 = run_experiment(ds, c).summary[0].ibs.mean;
  const double b_change = std::abs(ibs_2000 - ibs_1000);
  return {hi - lo < kPlateauTol && b_change < kTreeCountTol,
          fmt("IBS range over M>=20%% %.4f", hi - lo) + fmt(", |IBS(B=2000)-IBS(B=1000)| %.4f", b_change) +
              "; M=5..60%:" + curve};
}

Outcome importance() {
  int first = 0;
  std::vector<double> null_sum(4, 0.0);
  for (int run = 0; run < kImportanceRuns; ++run) {
    SimulationSpec spec;
    spec.n = 200;
    spec.d = 5;
    spec.informative = 1;
    spec.coefficients = {1.5};
    Rng rng(derive_seed(808, static_cast<std::uint64_t>(run)));
    const auto ds = simulate_dataset(spec, rng);
    std::vector<std::size_t> rows(ds.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    const auto forest = grow_forest(ds, rows, {50, default_mtry(5), 3, derive_seed(809, run)});
    const auto rep = permutation_importance(forest, ds, derive_seed(810, run));
    std::size_t best = 0;
    for (std::size_t f = 1; f < rep.features.size(); ++f)
      if (rep.features[f].importance > rep.features[best].importance) best = f;
    if (best == 0) ++first;
    for (std::size_t f = 1; f < 5; ++f) null_sum[f - 1] += rep.features[f].importance;
  }
  double worst = 0;
  std::string means;
  for (double s : null_sum) {
    const double mean = s / kImportanceRuns;
    worst = std::max(worst, std::abs(mean));
    means += fmt(" %.4f", mean);
  }
  return {first >= kImportanceFirstMin && worst <= kNullImportanceTol,
          "dominant feature first in " + std::to_string(first) + "/100 runs; null feature means" + means};
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "oste_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cli = OSTE_CLI_PATH;
  auto run = [&](const std::string& args, const char* threads) {
    const std::string cmd = std::string("OSTE_NUM_THREADS=") + threads + " \"" + cli + "\" " + args + " 2>/dev/null";
    return std::system(cmd.c_str());
  };
  const std::string data = (dir / "sim.csv").string();
  const std::string cols = (dir / "sim.cfg").string();
  if (run("simulate -n 150 -d 4 --seed 5 --out " + data + " --columns-out " + cols, "1") != 0)
    return {false, "simulate failed"};

  const std::vector<std::pair<std::string, std::string>> commands{
      {"run", "run --data " + data + " --columns " + cols + " --runs 3 -B 30 --seed 3"},
      {"sweep", "sweep --data " + data + " --columns " + cols + " --runs 2 -B 20 --parameter M --values 0.1,0.5"},
      {"importance", "importance --data " + data + " --columns " + cols + " -B 30 --seed 3"},
  };
  std::string detail;
  bool pass = true;
  for (const auto& [name, args] : commands) {
    const auto a = dir / (name + "_a.json");
    const auto b = dir / (name + "_b.json");
    const int ra = run(args + " --out " + a.string(), "1");
    const int rb = run(args + " --out " + b.string(), "3");
    const auto ja = read_file(a);
    const bool same = ra == 0 && rb == 0 && !ja.empty() && ja == read_file(b);
    pass = pass && same;
    detail += name + (same ? " identical" : " DIFFERS") + " (" + std::to_string(ja.size()) + " bytes); ";
  }
  fs::remove_all(dir);
  return {pass, detail + "second invocation used a different worker count"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> check;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "estimator oracles", estimators},
      {2, "log-rank oracle", logrank},
      {3, "c-index oracle", concordance},
      {4, "brier identity", brier},
      {5, "selection invariant", selection_invariant},
      {6, "veteran sanity", veteran},
      {7, "hyper-parameter plateau", plateau},
      {8, "importance discrimination", importance},
      {9, "determinism", determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
