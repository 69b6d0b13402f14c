#include "oste/serialize.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "oste/csv.hpp"
#include "oste/error.hpp"

namespace oste {
namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

template <typename T>
T field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw ValidationError(std::string("missing field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("bad field '") + key + "': " + e.what());
  }
}

std::string tree_file(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "tree_%04zu.json", i);
  return buf;
}

Json parse_json(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(origin + ": " + e.what());
  }
}

Json summary_json(const Summary& s) {
  return {{"mean", number_or_null(s.mean)}, {"sd", number_or_null(s.sd)}, {"count", s.count}};
}

Json method_json(const MethodResult& r, bool include_timing) {
  Json j = {{"method", to_string(r.method)}, {"ibs", r.ibs},           {"c_index", optional_number(r.c_index)},
            {"size", r.size},                {"B", r.num_trees},       {"p", r.mtry}};
  if (include_timing) j["wall_ms"] = r.wall_ms;
  return j;
}

void csv_rows(std::ostringstream& out, const std::string& prefix, const RunReport& report, bool include_timing) {
  for (const auto& run : report.runs) {
    for (const auto& m : run.methods) {
      out << prefix << run.run << ',' << to_string(m.method) << ',' << run.seed << ',' << run.attempts << ','
          << fmt(m.ibs) << ',' << (m.c_index ? fmt(*m.c_index) : "NA") << ',' << m.size << ',' << m.num_trees << ','
          << m.mtry;
      if (include_timing) out << ',' << fmt(m.wall_ms);
      out << '\n';
    }
  }
}

const char* csv_header(bool include_timing) {
  return include_timing ? "run,method,seed,attempts,ibs,c_index,size,B,p,wall_ms\n"
                        : "run,method,seed,attempts,ibs,c_index,size,B,p\n";
}

}  // namespace

Json to_json(const StepFunction& f) {
  return {{"kind", f.kind() == CurveKind::survival ? "survival" : "cumulative_hazard"},
          {"knots", f.knots()},
          {"values", f.values()}};
}

StepFunction step_function_from_json(const Json& j) {
  const auto kind = field<std::string>(j, "kind");
  if (kind != "survival" && kind != "cumulative_hazard") {
    throw ValidationError("unknown curve kind '" + kind + "'");
  }
  return StepFunction(kind == "survival" ? CurveKind::survival : CurveKind::cumulative_hazard,
                      field<std::vector<double>>(j, "knots"), field<std::vector<double>>(j, "values"));
}

Json to_json(const FeatureSchema& schema) {
  Json features = Json::array();
  for (const auto& f : schema.features()) {
    Json jf = {{"name", f.name}, {"kind", to_string(f.kind)}};
    if (f.kind == FeatureKind::categorical) jf["levels"] = f.levels;
    features.push_back(std::move(jf));
  }
  return features;
}

FeatureSchema schema_from_json(const Json& j) {
  if (!j.is_array()) throw ValidationError("schema must be an array");
  std::vector<FeatureSpec> specs;
  for (const auto& jf : j) {
    FeatureSpec spec;
    spec.name = field<std::string>(jf, "name");
    const auto kind = field<std::string>(jf, "kind");
    if (kind == "numeric") {
      spec.kind = FeatureKind::numeric;
    } else if (kind == "ordered") {
      spec.kind = FeatureKind::ordered_integer;
    } else if (kind == "categorical") {
      spec.kind = FeatureKind::categorical;
      spec.levels = field<std::vector<std::string>>(jf, "levels");
    } else {
      throw ValidationError("unknown feature kind '" + kind + "'");
    }
    specs.push_back(std::move(spec));
  }
  return FeatureSchema(std::move(specs));
}

Json to_json(const SurvivalTree& tree) {
  Json nodes = Json::array();
  for (const auto& node : tree.nodes()) {
    Json jn = {{"size", node.size}};
    if (node.is_leaf()) {
      jn["curve"] = to_json(node.curve);
    } else {
      jn["feature"] = node.rule->feature;
      jn["left"] = node.left;
      jn["right"] = node.right;
      if (const auto* num = std::get_if<NumericSplit>(&node.rule->test)) {
        jn["threshold"] = num->threshold;
      } else {
        const auto& cat = std::get<CategoricalSplit>(node.rule->test);
        jn["left_levels"] = cat.left_levels;
        jn["right_levels"] = cat.right_levels;
        jn["unseen_left"] = cat.unseen_left;
      }
    }
    nodes.push_back(std::move(jn));
  }
  return {{"seed", tree.seed()},
          {"params", {{"mtry", tree.params().mtry}, {"min_node_size", tree.params().min_node_size}}},
          {"in_bag", tree.in_bag()},
          {"oob", tree.oob()},
          {"nodes", std::move(nodes)}};
}

SurvivalTree tree_from_json(const Json& j) {
  const Json params_json = field<Json>(j, "params");
  const TreeParams params{field<std::size_t>(params_json, "mtry"), field<std::size_t>(params_json, "min_node_size")};
  std::vector<TreeNode> nodes;
  for (const auto& jn : field<Json>(j, "nodes")) {
    TreeNode node;
    node.size = field<std::size_t>(jn, "size");
    if (jn.contains("curve")) {
      node.curve = step_function_from_json(jn.at("curve"));
    } else {
      SplitRule rule;
      rule.feature = field<std::size_t>(jn, "feature");
      if (jn.contains("threshold")) {
        rule.test = NumericSplit{field<double>(jn, "threshold")};
      } else {
        rule.test = CategoricalSplit{field<std::vector<std::uint32_t>>(jn, "left_levels"),
                                     field<std::vector<std::uint32_t>>(jn, "right_levels"),
                                     field<bool>(jn, "unseen_left")};
      }
      node.rule = std::move(rule);
      node.left = field<std::size_t>(jn, "left");
      node.right = field<std::size_t>(jn, "right");
    }
    nodes.push_back(std::move(node));
  }
  return SurvivalTree(std::move(nodes), field<IndexSet>(j, "in_bag"), field<IndexSet>(j, "oob"), params,
                      field<std::uint64_t>(j, "seed"));
}

void save_forest(const SurvivalForest& forest, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
  const auto& p = forest.params();
  Json files = Json::array();
  Json seeds = Json::array();
  for (std::size_t i = 0; i < forest.size(); ++i) {
    files.push_back(tree_file(i));
    seeds.push_back(forest[i].seed());
    write_file((std::filesystem::path(dir) / tree_file(i)).string(), to_json(forest[i]).dump() + "\n");
  }
  const Json manifest = {
      {"params",
       {{"B", p.num_trees}, {"p", p.mtry}, {"min_node_size", p.min_node_size}, {"master_seed", p.master_seed}}},
      {"schema", to_json(forest.schema())},
      {"schema_digest", forest.schema().digest()},
      {"event_grid", forest.event_grid()},
      {"tree_seeds", std::move(seeds)},
      {"trees", std::move(files)}};
  write_file((std::filesystem::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

SurvivalForest load_forest(const std::string& dir) {
  const auto manifest_path = (std::filesystem::path(dir) / "manifest.json").string();
  const Json manifest = parse_json(read_file(manifest_path), manifest_path);
  const Json pj = field<Json>(manifest, "params");
  const ForestParams params{field<std::size_t>(pj, "B"), field<std::size_t>(pj, "p"),
                            field<std::size_t>(pj, "min_node_size"), field<std::uint64_t>(pj, "master_seed")};
  FeatureSchema schema = schema_from_json(field<Json>(manifest, "schema"));
  if (schema.digest() != field<std::uint64_t>(manifest, "schema_digest")) {
    throw ValidationError("schema digest mismatch in " + manifest_path);
  }
  const auto files = field<std::vector<std::string>>(manifest, "trees");
  const auto seeds = field<std::vector<std::uint64_t>>(manifest, "tree_seeds");
  if (files.size() != seeds.size()) throw ValidationError("manifest lists trees and seeds of different lengths");
  std::vector<SurvivalTree> trees;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const auto path = (std::filesystem::path(dir) / files[i]).string();
    trees.push_back(tree_from_json(parse_json(read_file(path), path)));
    if (trees.back().seed() != seeds[i]) throw ValidationError("tree seed in " + path + " disagrees with manifest");
  }
  return SurvivalForest(std::move(trees), std::move(schema), params,
                        field<std::vector<double>>(manifest, "event_grid"));
}

Json to_json(const OsteSelection& s) {
  return {{"m_fraction", s.m_fraction},       {"weighting", to_string(s.weighting)}, {"ranking", s.ranking},
          {"m_pool", s.m_pool},               {"accepted", s.accepted},
          {"ibs_trajectory", s.ibs_trajectory}, {"candidate_ibs", s.candidate_ibs}};
}

OsteSelection selection_from_json(const Json& j) {
  OsteSelection s;
  s.m_fraction = field<double>(j, "m_fraction");
  const auto weighting = field<std::string>(j, "weighting");
  if (weighting != "time" && weighting != "points") throw ValidationError("unknown weighting '" + weighting + "'");
  s.weighting = weighting == "time" ? IbsWeighting::time : IbsWeighting::points;
  s.ranking = field<std::vector<std::size_t>>(j, "ranking");
  s.m_pool = field<std::vector<std::size_t>>(j, "m_pool");
  s.accepted = field<std::vector<std::size_t>>(j, "accepted");
  s.ibs_trajectory = field<std::vector<double>>(j, "ibs_trajectory");
  s.candidate_ibs = field<std::vector<double>>(j, "candidate_ibs");
  return s;
}

std::string brier_curve_csv(const BrierCurve& curve) {
  std::ostringstream out;
  out << "time,brier\n";
  for (std::size_t i = 0; i < curve.grid.size(); ++i) out << fmt(curve.grid[i]) << ',' << fmt(curve.scores[i]) << '\n';
  return out.str();
}

Json brier_curve_summary(const BrierCurve& curve) {
  return {{"ibs", curve.ibs}, {"t_star", curve.t_star}, {"points", curve.grid.size()}, {"skipped", curve.skipped}};
}

Json to_json(const ImportanceReport& report) {
  Json features = Json::array();
  for (const auto& f : report.features) features.push_back({{"feature", f.feature}, {"importance", f.importance}});
  return {{"trees_used", report.trees_used}, {"features", std::move(features)}};
}

Json to_json(const ExperimentConfig& c) {
  Json methods = Json::array();
  for (Method m : c.methods) methods.push_back(to_string(m));
  Json j = {{"data", c.data_path},
            {"columns", c.config_path},
            {"methods", std::move(methods)},
            {"runs", c.runs},
            {"train_fraction", c.train_fraction},
            {"lb_fraction", c.lb_fraction},
            {"B", c.num_trees},
            {"M_fraction", c.m_fraction},
            {"p", c.mtry ? Json(*c.mtry) : Json(nullptr)},
            {"min_node_size", c.min_node_size},
            {"master_seed", c.master_seed},
            {"max_attempts", c.max_attempts},
            {"ibs_weighting", to_string(c.ibs_weighting)}};
  if (c.tuning.folds >= 2) {
    j["tuning"] = {{"folds", c.tuning.folds}, {"tree_grid", c.tuning.tree_grid}, {"tune_p", c.tuning.tune_mtry}};
  }
  return j;
}

Json to_json(const RunReport& report, bool include_timing) {
  Json runs = Json::array();
  for (const auto& run : report.runs) {
    Json methods = Json::array();
    for (const auto& m : run.methods) methods.push_back(method_json(m, include_timing));
    Json jr = {{"run", run.run},
               {"seed", run.seed},
               {"attempts", run.attempts},
               {"sizes", {{"train", run.train_size}, {"test", run.test_size}, {"lb", run.lb_size}, {"lv", run.lv_size}}},
               {"methods", std::move(methods)}};
    if (run.selection) {
      jr["oste"] = {{"pool", run.selection->m_pool.size()},
                    {"accepted", run.selection->accepted},
                    {"ibs_trajectory", run.selection->ibs_trajectory}};
    }
    runs.push_back(std::move(jr));
  }
  Json summary = Json::array();
  for (const auto& s : report.summary) {
    summary.push_back({{"method", to_string(s.method)},
                       {"ibs", summary_json(s.ibs)},
                       {"c_index", summary_json(s.c_index)},
                       {"size", summary_json(s.size)}});
  }
  return {{"config", to_json(report.config)},
          {"dataset", {{"n", report.n}, {"d", report.d}, {"events", report.events}}},
          {"runs", std::move(runs)},
          {"summary", std::move(summary)}};
}

std::string report_csv(const RunReport& report, bool include_timing) {
  std::ostringstream out;
  out << csv_header(include_timing);
  csv_rows(out, "", report, include_timing);
  return out.str();
}

Json sweep_to_json(SweepParameter parameter, std::span<const SweepPoint> points, bool include_timing) {
  Json jp = Json::array();
  for (const auto& p : points) jp.push_back({{"value", p.value}, {"report", to_json(p.report, include_timing)}});
  return {{"parameter", to_string(parameter)}, {"points", std::move(jp)}};
}

std::string sweep_csv(SweepParameter parameter, std::span<const SweepPoint> points, bool include_timing) {
  std::ostringstream out;
  out << to_string(parameter) << ',' << csv_header(include_timing);
  for (const auto& p : points) csv_rows(out, fmt(p.value) + ",", p.report, include_timing);
  return out.str();
}

}  // namespace oste
