#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oste/dataset.hpp"

namespace oste {

struct FeatureDecl {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;
  // Categorical only; when set, observed values outside this list are rejected.
  std::optional<std::vector<std::string>> levels;
};

// Column roles for parse_csv. Columns that are neither time, status, ignored
// nor declared in `features` become numeric features.
struct CsvConfig {
  std::string time_col;
  std::string status_col;
  std::string event_value = "1";
  std::vector<FeatureDecl> features;
  std::vector<std::string> ignore;
};

// Key-value config file:
//   time_col = time
//   status_col = status
//   event_value = dead
//   ignore = id, note
//   feature.age = numeric
//   feature.karno = ordered
//   feature.celltype = categorical
//   feature.trt = categorical:standard,test
// Blank lines and lines starting with '#' are skipped.
CsvConfig parse_config(std::string_view text);
std::string serialize_config(const CsvConfig& config);

// RFC-4180 fields (quoted fields may contain commas, doubled quotes and
// newlines). A header row is required.
std::vector<std::vector<std::string>> read_csv_records(std::string_view text);

SurvivalDataset parse_csv(std::string_view text, const CsvConfig& config);

// Writes features, then `time`, then `status` (1 = event). `csv_config_for`
// gives the config that parses it back.
std::string serialize_csv(const SurvivalDataset& ds);
CsvConfig csv_config_for(const FeatureSchema& schema);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

SurvivalDataset load_dataset(const std::string& csv_path, const std::string& config_path);

}  // namespace oste
