#include <doctest.h>

#include <set>

#include "fixtures.hpp"
#include "oste/error.hpp"
#include "oste/estimators.hpp"
#include "oste/selection.hpp"
#include "oste/serialize.hpp"

using namespace oste;

namespace {

struct Setup {
  SurvivalDataset ds;
  std::vector<std::size_t> lb, lv;
  SurvivalForest forest;
  std::vector<std::size_t> ranking;
};

Setup make_setup(std::uint64_t seed, std::size_t trees = 40) {
  Setup s{fixtures::synthetic(160, 4, seed), {}, {}, {}, {}};
  Rng rng(seed);
  const auto parts = split(s.ds, 0.8, rng);
  s.lb = parts.train;
  s.lv = parts.test;
  s.forest = grow_forest(s.ds, s.lb, {trees, 2, 3, seed});
  s.ranking = rank_trees(s.forest, s.ds);
  return s;
}

}  // namespace

TEST_CASE("pool size") {
  CHECK(pool_size(0.2, 1000) == 200);
  CHECK(pool_size(0.2, 1) == 1);
  CHECK(pool_size(0.05, 10) == 1);
  CHECK(pool_size(0.25, 10) == 3);
  CHECK(pool_size(1.0, 7) == 7);
  CHECK(pool_size(1e-6, 5) == 1);
}

TEST_CASE("rank_trees orders by error, ties by index, missing last") {
  const std::vector<std::optional<double>> e{0.3, std::nullopt, 0.1, 0.3, 0.2};
  CHECK(rank_trees(e) == std::vector<std::size_t>{2, 4, 0, 3, 1});
}

TEST_CASE("select: trajectory strictly decreases and accepted trees come from the pool") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto s = make_setup(seed);
    const auto sel = select(s.forest, s.ranking, 0.5, s.ds, s.lv);
    CHECK(sel.m_pool.size() == 20);
    CHECK(sel.candidate_ibs.size() == 20);
    REQUIRE_FALSE(sel.accepted.empty());
    CHECK(sel.accepted.front() == s.ranking.front());
    CHECK(sel.accepted.size() == sel.ibs_trajectory.size());
    for (std::size_t k = 1; k < sel.ibs_trajectory.size(); ++k) CHECK(sel.ibs_trajectory[k] < sel.ibs_trajectory[k - 1]);
    const std::set<std::size_t> pool(sel.m_pool.begin(), sel.m_pool.end());
    const std::set<std::size_t> acc(sel.accepted.begin(), sel.accepted.end());
    CHECK(acc.size() == sel.accepted.size());
    for (auto t : sel.accepted) CHECK(pool.count(t) == 1);
  }
}

TEST_CASE("select: reported IBS equals a fresh evaluation of the accepted mean") {
  const auto s = make_setup(9);
  for (auto w : {IbsWeighting::time, IbsWeighting::points}) {
    const auto sel = select(s.forest, s.ranking, 1.0, s.ds, s.lv, w);
    CHECK(sel.weighting == w);
    const auto y = s.ds.outcomes(s.lv);
    const auto grid = default_grid(y);
    const TreeGridPredictions pred(s.forest, s.ds, s.lv, grid);
    const auto ibs = integrated_brier_score(pred.ensemble(sel.accepted), y, grid, censoring_km(y), w).ibs;
    CHECK(std::abs(ibs - sel.ibs_trajectory.back()) <= 1e-12);
  }
}

TEST_CASE("select: M = 1 keeps the best-ranked tree") {
  const auto s = make_setup(3);
  const auto sel = select(s.forest, s.ranking, 0.001, s.ds, s.lv);
  CHECK(sel.accepted == std::vector<std::size_t>{s.ranking.front()});
}

TEST_CASE("select: a forest of copies keeps one tree") {
  const auto s = make_setup(4, 5);
  std::vector<SurvivalTree> copies(20, s.forest[0]);
  const SurvivalForest dup(copies, s.forest.schema(), s.forest.params(), s.forest.event_grid());
  std::vector<std::size_t> ranking(20);
  for (std::size_t i = 0; i < 20; ++i) ranking[i] = i;
  const auto sel = select(dup, ranking, 1.0, s.ds, s.lv);
  CHECK(sel.accepted.size() == 1);
}

TEST_CASE("select: deterministic, and predict averages the accepted trees") {
  const auto s = make_setup(5);
  const auto a = select(s.forest, s.ranking, 0.3, s.ds, s.lv);
  const auto b = select(s.forest, s.ranking, 0.3, s.ds, s.lv);
  CHECK(a == b);
  const auto x = s.ds.row(s.lv.front());
  CHECK(predict(a, s.forest, x) == ensemble_curve(s.forest, a.accepted, x));
  CHECK(selection_from_json(to_json(a)) == a);
}

TEST_CASE("select errors") {
  const auto s = make_setup(6, 10);
  CHECK_THROWS_AS(select(s.forest, s.ranking, 0.0, s.ds, s.lv), ValidationError);
  CHECK_THROWS_AS(select(s.forest, s.ranking, 1.5, s.ds, s.lv), ValidationError);
  std::vector<std::size_t> bad = s.ranking;
  bad[0] = bad[1];
  CHECK_THROWS_AS(select(s.forest, bad, 0.5, s.ds, s.lv), ValidationError);
  std::vector<std::size_t> short_rank(s.ranking.begin(), s.ranking.end() - 1);
  CHECK_THROWS_AS(select(s.forest, short_rank, 0.5, s.ds, s.lv), ValidationError);

  std::vector<std::size_t> censored_rows;
  for (auto r : s.lv)
    if (!s.ds.outcome(r).event) censored_rows.push_back(r);
  if (!censored_rows.empty()) CHECK_THROWS_AS(select(s.forest, s.ranking, 0.5, s.ds, censored_rows), SelectionError);
  CHECK_THROWS_AS(select(s.forest, s.ranking, 0.5, s.ds, std::vector<std::size_t>{}), SelectionError);

  OsteSelection empty;
  CHECK_THROWS_AS(predict(empty, s.forest, s.ds.row(0)), ValidationError);
}
