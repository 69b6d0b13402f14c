#pragma once

#include <string>

#include <json.hpp>

#include "oste/forest.hpp"
#include "oste/harness.hpp"
#include "oste/metrics.hpp"
#include "oste/selection.hpp"
#include "oste/step_function.hpp"
#include "oste/tree.hpp"

namespace oste {

using Json = nlohmann::json;

Json to_json(const StepFunction& f);
StepFunction step_function_from_json(const Json& j);

Json to_json(const FeatureSchema& schema);
FeatureSchema schema_from_json(const Json& j);

Json to_json(const SurvivalTree& tree);
SurvivalTree tree_from_json(const Json& j);

// Directory with manifest.json (params, tree seeds, schema and its digest,
// event grid) and one tree_NNNN.json per tree. Throws IoError on file
// problems and ValidationError when a tree file disagrees with the manifest.
void save_forest(const SurvivalForest& forest, const std::string& dir);
SurvivalForest load_forest(const std::string& dir);

Json to_json(const OsteSelection& selection);
OsteSelection selection_from_json(const Json& j);

// "time,brier" rows over the retained grid.
std::string brier_curve_csv(const BrierCurve& curve);
Json brier_curve_summary(const BrierCurve& curve);

Json to_json(const ImportanceReport& report);

// Wall-clock figures vary between invocations, so they are only written when
// asked for; without them equal inputs give byte-identical output.
Json to_json(const ExperimentConfig& config);
Json to_json(const RunReport& report, bool include_timing = false);
// One row per run x method.
std::string report_csv(const RunReport& report, bool include_timing = false);

Json sweep_to_json(SweepParameter parameter, std::span<const SweepPoint> points, bool include_timing = false);
// One row per value x run x method, with the swept value first.
std::string sweep_csv(SweepParameter parameter, std::span<const SweepPoint> points, bool include_timing = false);

}  // namespace oste
