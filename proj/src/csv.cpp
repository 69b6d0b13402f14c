#include "oste/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "oste/error.hpp"

namespace oste {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string_view::npos ? s.size() : comma;
    auto item = trim(s.substr(start, end - start));
    if (!item.empty()) {
      out.push_back(std::move(item));
    }
    if (comma == std::string_view::npos) {
      break;
    }
    start = comma + 1;
  }
  return out;
}

std::optional<double> parse_number(const std::string& field) {
  const auto s = trim(field);
  if (s.empty()) {
    return std::nullopt;
  }
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (*begin == '+') {
    ++begin;
  }
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) {
    return s;
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') {
      out += '"';
    }
    out += c;
  }
  out += '"';
  return out;
}

std::string unique_column_name(const FeatureSchema& schema, std::string base) {
  while (schema.index_of(base)) {
    base = "_" + base;
  }
  return base;
}

}  // namespace

CsvConfig parse_config(std::string_view text) {
  CsvConfig config;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto content = trim(line);
    if (content.empty() || content.front() == '#') {
      continue;
    }
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(std::string_view(content).substr(0, eq));
    const auto value = trim(std::string_view(content).substr(eq + 1));
    if (key == "time_col") {
      config.time_col = value;
    } else if (key == "status_col") {
      config.status_col = value;
    } else if (key == "event_value") {
      config.event_value = value;
    } else if (key == "ignore") {
      config.ignore = split_list(value);
    } else if (key.rfind("feature.", 0) == 0) {
      FeatureDecl decl;
      decl.name = key.substr(8);
      if (decl.name.empty()) {
        throw ConfigError("config line " + std::to_string(line_no) + ": empty feature name");
      }
      const auto colon = value.find(':');
      const auto kind = trim(std::string_view(value).substr(0, colon));
      if (kind == "numeric" || kind == "real") {
        decl.kind = FeatureKind::numeric;
      } else if (kind == "ordered" || kind == "integer") {
        decl.kind = FeatureKind::ordered_integer;
      } else if (kind == "categorical" || kind == "nominal") {
        decl.kind = FeatureKind::categorical;
        if (colon != std::string::npos) {
          decl.levels = split_list(std::string_view(value).substr(colon + 1));
        }
      } else {
        throw ConfigError("config line " + std::to_string(line_no) + ": unknown feature kind '" + kind + "'");
      }
      config.features.push_back(std::move(decl));
    } else {
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  if (config.time_col.empty() || config.status_col.empty()) {
    throw ConfigError("config must name time_col and status_col");
  }
  return config;
}

std::string serialize_config(const CsvConfig& config) {
  std::string out;
  out += "time_col = " + config.time_col + "\n";
  out += "status_col = " + config.status_col + "\n";
  out += "event_value = " + config.event_value + "\n";
  if (!config.ignore.empty()) {
    out += "ignore = ";
    for (std::size_t i = 0; i < config.ignore.size(); ++i) {
      out += (i ? "," : "") + config.ignore[i];
    }
    out += "\n";
  }
  for (const auto& f : config.features) {
    out += "feature." + f.name + " = " + to_string(f.kind);
    if (f.levels) {
      out += ":";
      for (std::size_t i = 0; i < f.levels->size(); ++i) {
        out += (i ? "," : "") + (*f.levels)[i];
      }
    }
    out += "\n";
  }
  return out;
}

std::vector<std::vector<std::string>> read_csv_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // A bare newline (e.g. trailing) is not a record.
    if (!(record.size() == 1 && record.front().empty())) {
      records.push_back(std::move(record));
    }
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_record();
    } else if (c == '\r') {
      if (i + 1 < text.size() && text[i + 1] == '\n') {
        ++i;
      }
      end_record();
    } else {
      field += c;
      field_started = true;
    }
  }
  if (in_quotes) {
    throw ParseError("unterminated quoted field", records.size());
  }
  if (field_started || !field.empty() || !record.empty()) {
    end_record();
  }
  return records;
}

SurvivalDataset parse_csv(std::string_view text, const CsvConfig& config) {
  const auto records = read_csv_records(text);
  if (records.empty()) {
    throw ParseError("missing header row", 0);
  }
  const auto& header = records.front();
  std::map<std::string, std::size_t> column;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto name = trim(header[c]);
    if (!column.emplace(name, c).second) {
      throw ConfigError("duplicate column '" + name + "' in header");
    }
  }
  auto require_column = [&](const std::string& name) {
    const auto it = column.find(name);
    if (it == column.end()) {
      throw ConfigError("missing column '" + name + "'");
    }
    return it->second;
  };
  const std::size_t time_col = require_column(config.time_col);
  const std::size_t status_col = require_column(config.status_col);
  for (const auto& f : config.features) {
    require_column(f.name);
  }

  // Feature columns in header order.
  struct Column {
    std::size_t index;
    FeatureDecl decl;
  };
  std::vector<Column> feature_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto name = trim(header[c]);
    if (c == time_col || c == status_col ||
        std::find(config.ignore.begin(), config.ignore.end(), name) != config.ignore.end()) {
      continue;
    }
    const auto declared = std::find_if(config.features.begin(), config.features.end(),
                                       [&](const FeatureDecl& f) { return f.name == name; });
    feature_cols.push_back({c, declared != config.features.end() ? *declared : FeatureDecl{name, FeatureKind::numeric, std::nullopt}});
  }

  const std::size_t n = records.size() - 1;
  const std::size_t d = feature_cols.size();
  std::vector<Observation> outcomes(n);
  std::vector<double> values(n * d);
  std::vector<std::vector<std::string>> levels(d);
  for (std::size_t f = 0; f < d; ++f) {
    if (feature_cols[f].decl.levels) {
      levels[f] = *feature_cols[f].decl.levels;
    }
  }

  for (std::size_t r = 0; r < n; ++r) {
    const auto& rec = records[r + 1];
    const std::size_t row_no = r + 1;  // 1-based data row, header excluded
    if (rec.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(rec.size()),
                       row_no);
    }
    const auto time = parse_number(rec[time_col]);
    if (!time) {
      throw ParseError("time '" + rec[time_col] + "' is not numeric", row_no);
    }
    if (*time < 0.0) {
      throw ParseError("time " + trim(rec[time_col]) + " is negative", row_no);
    }
    const auto status = trim(rec[status_col]);
    if (status.empty()) {
      throw ParseError("missing status", row_no);
    }
    outcomes[r] = {*time, status == config.event_value};

    for (std::size_t f = 0; f < d; ++f) {
      const auto& decl = feature_cols[f].decl;
      const auto raw = trim(rec[feature_cols[f].index]);
      if (raw.empty() || raw == "NA") {
        throw ParseError("missing value for feature '" + decl.name + "'", row_no);
      }
      double& slot = values[r * d + f];
      if (decl.kind == FeatureKind::categorical) {
        auto& lv = levels[f];
        const auto it = std::find(lv.begin(), lv.end(), raw);
        if (it != lv.end()) {
          slot = static_cast<double>(it - lv.begin());
        } else if (decl.levels) {
          throw ValidationError("row " + std::to_string(row_no) + ": unknown level '" + raw + "' for feature '" +
                                decl.name + "'");
        } else {
          slot = static_cast<double>(lv.size());
          lv.push_back(raw);
        }
        continue;
      }
      const auto v = parse_number(raw);
      if (!v) {
        throw ParseError("value '" + raw + "' of feature '" + decl.name + "' is not numeric", row_no);
      }
      if (decl.kind == FeatureKind::ordered_integer && *v != std::floor(*v)) {
        throw ParseError("value '" + raw + "' of ordered feature '" + decl.name + "' is not an integer", row_no);
      }
      slot = *v;
    }
  }

  std::vector<FeatureSpec> specs;
  specs.reserve(d);
  for (std::size_t f = 0; f < d; ++f) {
    const auto& decl = feature_cols[f].decl;
    if (decl.kind == FeatureKind::categorical && levels[f].empty()) {
      throw ValidationError("categorical feature '" + decl.name + "' has no levels");
    }
    specs.push_back({decl.name, decl.kind, decl.kind == FeatureKind::categorical ? levels[f]
                                                                                  : std::vector<std::string>{}});
  }
  return SurvivalDataset(FeatureSchema(std::move(specs)), std::move(values), std::move(outcomes));
}

CsvConfig csv_config_for(const FeatureSchema& schema) {
  CsvConfig config;
  config.time_col = unique_column_name(schema, "time");
  config.status_col = unique_column_name(schema, "status");
  config.event_value = "1";
  for (const auto& f : schema.features()) {
    FeatureDecl decl{f.name, f.kind, std::nullopt};
    if (f.kind == FeatureKind::categorical) {
      decl.levels = f.levels;
    }
    config.features.push_back(std::move(decl));
  }
  return config;
}

std::string serialize_csv(const SurvivalDataset& ds) {
  const auto& schema = ds.schema();
  const auto config = csv_config_for(schema);
  std::string out;
  for (const auto& f : schema.features()) {
    out += quote_if_needed(f.name) + ",";
  }
  out += quote_if_needed(config.time_col) + "," + quote_if_needed(config.status_col) + "\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t f = 0; f < schema.size(); ++f) {
      const double v = ds.value(i, f);
      if (schema[f].kind == FeatureKind::categorical) {
        out += quote_if_needed(schema[f].levels[static_cast<std::size_t>(v)]);
      } else {
        out += format_double(v);
      }
      out += ",";
    }
    out += format_double(ds.outcome(i).time) + (ds.outcome(i).event ? ",1\n" : ",0\n");
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write '" + path + "'");
  }
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) {
    throw IoError("write to '" + path + "' failed");
  }
}

SurvivalDataset load_dataset(const std::string& csv_path, const std::string& config_path) {
  return parse_csv(read_file(csv_path), parse_config(read_file(config_path)));
}

}  // namespace oste
