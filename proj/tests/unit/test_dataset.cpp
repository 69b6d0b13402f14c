#include <doctest.h>

#include <algorithm>
#include <set>

#include "../oracles.hpp"
#include "fixtures.hpp"
#include "oste/csv.hpp"
#include "oste/error.hpp"

using namespace oste;

TEST_CASE("schema rejects duplicate or empty names and level-less categoricals") {
  CHECK_THROWS_AS(FeatureSchema({{"a", FeatureKind::numeric, {}}, {"a", FeatureKind::numeric, {}}}), ValidationError);
  CHECK_THROWS_AS(FeatureSchema({{"", FeatureKind::numeric, {}}}), ValidationError);
  CHECK_THROWS_AS(FeatureSchema({{"c", FeatureKind::categorical, {}}}), ValidationError);
  const FeatureSchema s({{"a", FeatureKind::numeric, {}}, {"c", FeatureKind::categorical, {"x", "y"}}});
  CHECK(s.index_of("c") == 1u);
  CHECK_FALSE(s.index_of("zz").has_value());
  CHECK(s.digest() == FeatureSchema(s.features()).digest());
  CHECK(s.digest() != FeatureSchema({{"a", FeatureKind::numeric, {}}}).digest());
}

TEST_CASE("dataset validates times and feature kinds") {
  const FeatureSchema s({{"o", FeatureKind::ordered_integer, {}}, {"c", FeatureKind::categorical, {"x", "y"}}});
  CHECK_NOTHROW(SurvivalDataset(s, {1, 0, 2, 1}, {{1, true}, {2, false}}));
  CHECK_THROWS_AS(SurvivalDataset(s, {1, 0, 2, 1}, {{-1, true}, {2, false}}), ValidationError);
  CHECK_THROWS_AS(SurvivalDataset(s, {1.5, 0, 2, 1}, {{1, true}, {2, false}}), ValidationError);
  CHECK_THROWS_AS(SurvivalDataset(s, {1, 2, 2, 1}, {{1, true}, {2, false}}), ValidationError);
  CHECK_THROWS_AS(SurvivalDataset(s, {1, 0, 2}, {{1, true}, {2, false}}), ValidationError);
}

TEST_CASE("parse_csv: three rows, one numeric feature") {
  CsvConfig cfg;
  cfg.time_col = "time";
  cfg.status_col = "status";
  const auto ds = parse_csv("x,time,status\n0.5,5,1\n1.5,10,0\n2.5,15,1\n", cfg);
  CHECK(ds.size() == 3);
  CHECK(ds.num_features() == 1);
  CHECK(ds.num_events() == 2);
  CHECK(ds.outcome(1).time == 10.0);
  CHECK_FALSE(ds.outcome(1).event);
  CHECK(ds.value(2, 0) == 2.5);
}

TEST_CASE("parse_csv: explicit event encoding") {
  const auto cfg = parse_config("time_col = t\nstatus_col = s\nevent_value = dead\n");
  const auto ds = parse_csv("t,s,x\n1,dead,0\n2,alive,1\n3,dead,2\n", cfg);
  CHECK(ds.outcome(0).event);
  CHECK_FALSE(ds.outcome(1).event);
  CHECK(ds.outcome(2).event);
}

TEST_CASE("parse_csv errors") {
  CsvConfig cfg;
  cfg.time_col = "time";
  cfg.status_col = "status";
  SUBCASE("negative time names the row") {
    try {
      parse_csv("x,time,status\n1,2,1\n1,-1,1\n", cfg);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.row() == 2);
      CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
  }
  SUBCASE("non-numeric time") {
    try {
      parse_csv("x,time,status\n1,abc,1\n", cfg);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.row() == 1);
    }
  }
  SUBCASE("missing column") { CHECK_THROWS_AS(parse_csv("x,t,status\n1,2,1\n", cfg), ConfigError); }
  SUBCASE("missing feature value") { CHECK_THROWS_AS(parse_csv("x,time,status\n,2,1\n", cfg), ParseError); }
  SUBCASE("NA feature value") { CHECK_THROWS_AS(parse_csv("x,time,status\nNA,2,1\n", cfg), ParseError); }
  SUBCASE("unknown supplied level") {
    cfg.features.push_back({"x", FeatureKind::categorical, std::vector<std::string>{"a", "b"}});
    CHECK_THROWS_AS(parse_csv("x,time,status\nc,2,1\n", cfg), ValidationError);
  }
}

TEST_CASE("parse_csv infers categorical levels in order of appearance and honours quotes") {
  const auto cfg = parse_config("time_col = time\nstatus_col = status\nfeature.c = categorical\nignore = id\n");
  const auto ds = parse_csv("id,c,time,status\n7,\"b,1\",1,1\n8,a,2,0\n9,\"b,1\",3,1\n", cfg);
  CHECK(ds.num_features() == 1);
  CHECK(ds.schema()[0].levels == std::vector<std::string>{"b,1", "a"});
  CHECK(ds.value(1, 0) == 1.0);
  CHECK(ds.value(2, 0) == 0.0);
}

TEST_CASE("config parsing errors") {
  CHECK_THROWS_AS(parse_config("time_col = t\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("time_col = t\nstatus_col = s\ncolour = red\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("time_col = t\nstatus_col = s\nfeature.x = fuzzy\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("time_col t\n"), ConfigError);
}

TEST_CASE("csv round trip") {
  const auto ds = fixtures::synthetic(40, 3, 11);
  const auto back = parse_csv(serialize_csv(ds), csv_config_for(ds.schema()));
  REQUIRE(back.size() == ds.size());
  REQUIRE(back.schema() == ds.schema());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back.outcome(i) == ds.outcome(i));
    for (std::size_t f = 0; f < ds.num_features(); ++f) CHECK(back.value(i, f) == ds.value(i, f));
  }

  const auto vet = load_dataset(fixtures::data_path("veteran.csv"), fixtures::data_path("veteran.cfg"));
  const auto vet_back = parse_csv(serialize_csv(vet), csv_config_for(vet.schema()));
  CHECK(vet_back.schema() == vet.schema());
  CHECK(serialize_csv(vet_back) == serialize_csv(vet));
  const auto cfg_back = parse_config(serialize_config(csv_config_for(vet.schema())));
  CHECK(cfg_back.features.size() == vet.num_features());
}

TEST_CASE("veteran fixture loads") {
  const auto vet = load_dataset(fixtures::data_path("veteran.csv"), fixtures::data_path("veteran.cfg"));
  CHECK(vet.size() == 137);
  CHECK(vet.num_events() == 128);
  CHECK(vet.num_features() == 6);
}

TEST_CASE("split: sizes, disjointness, determinism") {
  const auto ds = fixtures::numeric(1, std::vector<double>(10, 0.0),
                                    std::vector<Observation>(10, Observation{1.0, true}));
  Rng a(5), b(5);
  const auto s1 = split(ds, 0.7, a);
  const auto s2 = split(ds, 0.7, b);
  CHECK(s1.train.size() == 7);
  CHECK(s1.test.size() == 3);
  CHECK(s1.train == s2.train);
  CHECK(s1.test == s2.test);
  std::vector<std::size_t> all = s1.train;
  all.insert(all.end(), s1.test.begin(), s1.test.end());
  std::sort(all.begin(), all.end());
  CHECK(all == fixtures::all_rows(ds));

  Rng c(9);
  const auto nested = split(ds, s1.train, 0.95, c);
  CHECK(nested.train.size() == 6);  // round(0.95 * 7) = 7 would leave L_V empty
  CHECK(nested.test.size() == 1);

  CHECK_THROWS_AS(split(ds, 0.0, a), ValidationError);
  CHECK_THROWS_AS(split(ds, 1.0, a), ValidationError);
  CHECK_THROWS_AS(split(ds, 0.1, a), ValidationError);
}

TEST_CASE("split: L_B size is round(0.95 |train|)") {
  const auto ds = fixtures::synthetic(137, 2, 3);
  Rng rng(1);
  const auto outer = split(ds, 0.7, rng);
  const auto inner = split(ds, outer.train, 0.95, rng);
  CHECK(outer.train.size() == 96);
  CHECK(inner.train.size() == 91);
  CHECK(inner.test.size() == 5);
}

TEST_CASE("split: index algebra holds exhaustively for small n") {
  for (std::size_t n = 2; n <= 12; ++n) {
    const auto ds = fixtures::numeric(1, std::vector<double>(n, 1.0), std::vector<Observation>(n, {1.0, true}));
    for (double frac : {0.3, 0.5, 0.7, 0.9}) {
      if (n * frac < 2) continue;
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        const auto s = split(ds, frac, rng);
        std::vector<std::size_t> both;
        std::set_intersection(s.train.begin(), s.train.end(), s.test.begin(), s.test.end(), std::back_inserter(both));
        CHECK(both.empty());
        CHECK(s.train.size() + s.test.size() == n);
        CHECK_FALSE(s.test.empty());
      }
    }
  }
}

TEST_CASE("split without training events is degenerate") {
  const auto ds = fixtures::numeric(1, std::vector<double>(10, 1.0),
                                    {{1, true}, {1, false}, {1, false}, {1, false}, {1, false}, {1, false},
                                     {1, false}, {1, false}, {1, false}, {1, false}});
  std::size_t degenerate = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng(seed);
    try {
      const auto s = split(ds, 0.5, rng);
      CHECK(std::find(s.train.begin(), s.train.end(), 0u) != s.train.end());
    } catch (const DegenerateSplitError&) {
      ++degenerate;
    }
  }
  CHECK(degenerate > 0);
}

TEST_CASE("bootstrap") {
  SUBCASE("single element") {
    const std::vector<std::size_t> pool{0};
    Rng rng(3);
    const auto b = bootstrap(pool, rng);
    CHECK(b.in_bag == IndexSet{0});
    CHECK(b.oob.empty());
  }
  SUBCASE("oob fraction near 1/e and multiset algebra") {
    std::vector<std::size_t> pool(1000);
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(seed);
      const auto b = bootstrap(pool, rng);
      CHECK(b.in_bag.size() == pool.size());
      const double frac = static_cast<double>(b.oob.size()) / 1000.0;
      CHECK(frac > 0.30);
      CHECK(frac < 0.43);
      std::set<std::size_t> in(b.in_bag.begin(), b.in_bag.end());
      CHECK(in.size() + b.oob.size() == pool.size());
      for (auto i : b.oob) CHECK(in.count(i) == 0);
      CHECK(std::is_sorted(b.oob.begin(), b.oob.end()));
    }
  }
  SUBCASE("deterministic") {
    const std::vector<std::size_t> pool{4, 8, 15, 16, 23, 42};
    Rng a(77), b(77);
    CHECK(bootstrap(pool, a).in_bag == bootstrap(pool, b).in_bag);
  }
  SUBCASE("empty input") {
    Rng rng(1);
    CHECK_THROWS_AS(bootstrap(std::vector<std::size_t>{}, rng), ValidationError);
  }
}

TEST_CASE("derived seeds differ across indices and are stable") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(42, i));
  CHECK(seen.size() == 1000);
  CHECK(derive_seed(42, 3) == derive_seed(42, 3));
  CHECK(derive_seed(42, 3, 0) != derive_seed(42, 3, 1));
}
