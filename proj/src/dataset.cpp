#include "tabser/dataset.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "tabser/errors.hpp"
#include "tabser/text.hpp"

namespace tabser {

using json = nlohmann::json;

FeatureValue FeatureValue::number(double value) {
  if (!std::isfinite(value)) {
    throw DataError(ErrorKind::parse_error, "numeric feature values must be finite");
  }
  FeatureValue v;
  v.kind_ = Kind::numeric;
  v.num_ = value;
  return v;
}

FeatureValue FeatureValue::category(std::string value) {
  if (value.empty()) {
    throw DataError(ErrorKind::parse_error,
                    "categorical feature values must be non-empty; use missing instead");
  }
  FeatureValue v;
  v.kind_ = Kind::categorical;
  v.cat_ = std::move(value);
  return v;
}

bool FeatureValue::operator==(const FeatureValue& other) const {
  if (kind_ != other.kind_) return false;
  switch (kind_) {
    case Kind::missing: return true;
    case Kind::numeric: return num_ == other.num_;
    case Kind::categorical: return cat_ == other.cat_;
  }
  return false;
}

std::string format_value(const FeatureValue& value) {
  switch (value.kind()) {
    case FeatureValue::Kind::missing: return "";
    case FeatureValue::Kind::numeric: return format_number(value.num());
    case FeatureValue::Kind::categorical: return value.cat();
  }
  return "";
}

void Dataset::validate() const {
  std::set<std::string> names;
  for (const auto& col : columns) {
    if (col.display_name.empty()) {
      throw DataError(ErrorKind::parse_error, "column '" + col.raw_name + "' has empty display name");
    }
    if (!names.insert(col.raw_name).second) {
      throw DataError(ErrorKind::parse_error, "duplicate column raw name '" + col.raw_name + "'");
    }
  }
  if (rows.size() != labels.size()) {
    throw DataError(ErrorKind::parse_error, "row and label counts differ");
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != columns.size()) {
      throw DataError(ErrorKind::arity_mismatch,
                      "row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                          " values for " + std::to_string(columns.size()) + " columns");
    }
    if (labels[i] >= class_names.size()) {
      throw DataError(ErrorKind::parse_error, "label index out of range at row " + std::to_string(i));
    }
  }
}

namespace {

ColumnKind parse_kind(const std::string& text) {
  if (text == "numeric") return ColumnKind::numeric;
  if (text == "categorical") return ColumnKind::categorical;
  throw DataError(ErrorKind::parse_error, "unknown column kind '" + text + "'");
}

std::vector<ColumnSpec> parse_column_array(const json& arr) {
  std::vector<ColumnSpec> columns;
  for (const auto& item : arr) {
    ColumnSpec spec;
    spec.raw_name = item.at("raw_name").get<std::string>();
    spec.display_name = item.value("display_name", spec.raw_name);
    spec.kind = parse_kind(item.value("kind", std::string("categorical")));
    if (item.contains("value_display_map")) {
      for (const auto& [key, value] : item.at("value_display_map").items()) {
        spec.value_display_map[key] = value.get<std::string>();
      }
    }
    columns.push_back(std::move(spec));
  }
  return columns;
}

}  // namespace

DatasetMetadata DatasetMetadata::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& ex) {
    throw DataError(ErrorKind::parse_error, std::string("invalid metadata JSON: ") + ex.what());
  }
  DatasetMetadata meta;
  try {
    if (doc.is_array()) {
      meta.columns = parse_column_array(doc);
    } else if (doc.is_object()) {
      meta.columns = parse_column_array(doc.at("columns"));
      if (doc.contains("class_names")) {
        meta.class_names = doc.at("class_names").get<std::vector<std::string>>();
      }
    } else {
      throw DataError(ErrorKind::parse_error, "metadata must be a JSON array or object");
    }
  } catch (const json::exception& ex) {
    throw DataError(ErrorKind::parse_error, std::string("invalid metadata JSON: ") + ex.what());
  }
  return meta;
}

DatasetMetadata DatasetMetadata::load(const std::string& path) {
  return from_json_text(read_file(path));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError(ErrorKind::io_error, "cannot open '" + path + "'");
  }
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (!field_started || field.empty()) {
          quoted = true;
          field_started = true;
        } else {
          field.push_back(ch);
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(ch);
        field_started = true;
        break;
    }
  }
  if (quoted) {
    throw DataError(ErrorKind::parse_error, "unterminated quote in CSV input");
  }
  if (field_started || !field.empty() || !record.empty()) {
    end_record();
  }
  return records;
}

namespace {

FeatureValue parse_cell(const std::string& cell, const ColumnSpec& spec, std::size_t row,
                        const std::string& column) {
  if (cell.empty()) {
    return FeatureValue::missing();
  }
  if (spec.kind == ColumnKind::categorical) {
    return FeatureValue::category(cell);
  }
  std::size_t consumed = 0;
  double value = 0.0;
  try {
    value = std::stod(cell, &consumed);
  } catch (const std::exception&) {
    throw DataError(ErrorKind::parse_error, "row " + std::to_string(row) + ", column '" + column +
                                                "': '" + cell + "' is not numeric");
  }
  if (consumed != cell.size() || !std::isfinite(value)) {
    throw DataError(ErrorKind::parse_error, "row " + std::to_string(row) + ", column '" + column +
                                                "': '" + cell + "' is not a finite number");
  }
  return FeatureValue::number(value);
}

}  // namespace

Dataset load_csv_text(const std::string& text, const DatasetMetadata& metadata,
                      const std::string& label_column) {
  const auto records = parse_csv(text);
  if (records.empty()) {
    throw DataError(ErrorKind::empty_dataset, "no header row");
  }
  const auto& header = records.front();

  std::map<std::string, std::size_t> header_index;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!header_index.emplace(header[i], i).second) {
      throw DataError(ErrorKind::parse_error, "duplicate header column '" + header[i] + "'");
    }
  }
  auto label_it = header_index.find(label_column);
  if (label_it == header_index.end()) {
    throw DataError(ErrorKind::missing_column, "label column '" + label_column + "' not in header");
  }
  const std::size_t label_pos = label_it->second;

  // Metadata order defines the dataset column order.
  std::vector<std::size_t> source_pos;
  std::set<std::size_t> covered{label_pos};
  for (const auto& spec : metadata.columns) {
    auto it = header_index.find(spec.raw_name);
    if (it == header_index.end()) {
      throw DataError(ErrorKind::missing_column, "metadata column '" + spec.raw_name + "' not in header");
    }
    source_pos.push_back(it->second);
    covered.insert(it->second);
  }
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!covered.count(i)) {
      throw DataError(ErrorKind::missing_column, "header column '" + header[i] + "' not covered by metadata");
    }
  }

  Dataset ds;
  ds.columns = metadata.columns;
  ds.class_names = metadata.class_names;

  std::map<std::string, std::size_t> class_index;
  for (std::size_t i = 0; i < ds.class_names.size(); ++i) {
    class_index[ds.class_names[i]] = i;
  }

  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& record = records[r];
    if (record.size() == 1 && record[0].empty()) {
      continue;  // trailing blank line
    }
    if (record.size() != header.size()) {
      throw DataError(ErrorKind::parse_error, "row " + std::to_string(r) + " has " +
                                                  std::to_string(record.size()) + " cells, expected " +
                                                  std::to_string(header.size()));
    }
    std::vector<FeatureValue> row;
    row.reserve(ds.columns.size());
    for (std::size_t c = 0; c < ds.columns.size(); ++c) {
      row.push_back(parse_cell(record[source_pos[c]], ds.columns[c], r, ds.columns[c].raw_name));
    }
    const std::string& label_text = record[label_pos];
    auto it = class_index.find(label_text);
    if (it == class_index.end()) {
      if (!metadata.class_names.empty()) {
        throw DataError(ErrorKind::parse_error,
                        "row " + std::to_string(r) + ": label '" + label_text + "' not in class_names");
      }
      it = class_index.emplace(label_text, ds.class_names.size()).first;
      ds.class_names.push_back(label_text);
    }
    ds.rows.push_back(std::move(row));
    ds.labels.push_back(it->second);
  }

  if (ds.rows.empty()) {
    throw DataError(ErrorKind::empty_dataset, "no data rows");
  }
  ds.validate();
  return ds;
}

Dataset load_csv(const std::string& path, const DatasetMetadata& metadata,
                 const std::string& label_column) {
  return load_csv_text(read_file(path), metadata, label_column);
}

Dataset apply_display_maps(const Dataset& ds) {
  Dataset out = ds;
  for (std::size_t c = 0; c < out.columns.size(); ++c) {
    const auto& map = out.columns[c].value_display_map;
    if (map.empty()) continue;
    for (auto& row : out.rows) {
      if (!row[c].is_categorical()) continue;
      auto it = map.find(row[c].cat());
      if (it != map.end()) {
        row[c] = FeatureValue::category(it->second);
      }
    }
  }
  return out;
}

}  // namespace tabser
