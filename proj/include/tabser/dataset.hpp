#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tabser {

enum class ColumnKind { numeric, categorical };

/// One cell of a table: a finite number, a non-empty category token, or
/// explicitly missing.
class FeatureValue {
 public:
  enum class Kind { missing, numeric, categorical };

  FeatureValue() = default;

  static FeatureValue number(double value);
  static FeatureValue category(std::string value);
  static FeatureValue missing() { return FeatureValue(); }

  Kind kind() const { return kind_; }
  bool is_missing() const { return kind_ == Kind::missing; }
  bool is_numeric() const { return kind_ == Kind::numeric; }
  bool is_categorical() const { return kind_ == Kind::categorical; }

  double num() const { return num_; }
  const std::string& cat() const { return cat_; }

  bool operator==(const FeatureValue& other) const;

 private:
  Kind kind_ = Kind::missing;
  double num_ = 0.0;
  std::string cat_;
};

/// Text rendered for a value inside a serialization; missing renders as "".
std::string format_value(const FeatureValue& value);

struct ColumnSpec {
  std::string raw_name;
  std::string display_name;
  ColumnKind kind = ColumnKind::categorical;
  std::map<std::string, std::string> value_display_map;
};

struct Dataset {
  std::vector<ColumnSpec> columns;
  std::vector<std::vector<FeatureValue>> rows;
  std::vector<std::size_t> labels;
  std::vector<std::string> class_names;

  std::size_t n_rows() const { return rows.size(); }
  std::size_t n_cols() const { return columns.size(); }

  /// Throws DataError if any structural invariant is violated.
  void validate() const;
};

struct DatasetMetadata {
  std::vector<ColumnSpec> columns;
  std::vector<std::string> class_names;  // optional; empty means first-appearance order

  static DatasetMetadata from_json_text(const std::string& text);
  static DatasetMetadata load(const std::string& path);
};

/// RFC-4180 CSV: quoted fields, "" escapes, LF or CRLF records.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);
std::string read_file(const std::string& path);

Dataset load_csv(const std::string& path, const DatasetMetadata& metadata,
                 const std::string& label_column);
Dataset load_csv_text(const std::string& text, const DatasetMetadata& metadata,
                      const std::string& label_column);

/// Replaces categorical values that have a display mapping; numbers pass
/// through unchanged, as do unmapped categories.
Dataset apply_display_maps(const Dataset& ds);

}  // namespace tabser
