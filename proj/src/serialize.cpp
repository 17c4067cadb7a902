#include "tabser/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <set>

#include "tabser/errors.hpp"
#include "tabser/rng.hpp"
#include "tabser/text.hpp"

namespace tabser {

namespace {

void check_arity(const std::vector<ColumnSpec>& cols, const std::vector<FeatureValue>& row) {
  if (cols.size() != row.size()) {
    throw DataError(ErrorKind::arity_mismatch, "row has " + std::to_string(row.size()) +
                                                   " values for " + std::to_string(cols.size()) +
                                                   " columns");
  }
}

std::string list_line(const std::string& name, const FeatureValue& value) {
  return "- " + name + ": " + format_value(value);
}

}  // namespace

SerializedExample list_template(const std::vector<ColumnSpec>& cols,
                                const std::vector<FeatureValue>& row, std::size_t row_index) {
  check_arity(cols, row);
  std::vector<std::string> lines;
  lines.reserve(cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i) {
    lines.push_back(list_line(cols[i].display_name, row[i]));
  }
  return {join(lines, "\n"), "list", row_index, std::nullopt};
}

SerializedExample text_template(const std::vector<ColumnSpec>& cols,
                                const std::vector<FeatureValue>& row, std::size_t row_index) {
  check_arity(cols, row);
  std::vector<std::string> sentences;
  sentences.reserve(cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const std::string value = format_value(row[i]);
    // A missing value leaves no space before the period: "The x is."
    std::string sentence = "The " + cols[i].display_name + " is";
    if (!value.empty()) {
      sentence += " " + value;
    }
    sentence += ".";
    sentences.push_back(std::move(sentence));
  }
  return {join(sentences, " "), "text", row_index, std::nullopt};
}

SerializedExample list_only_values(const std::vector<ColumnSpec>& cols,
                                   const std::vector<FeatureValue>& row, std::size_t row_index) {
  check_arity(cols, row);
  std::vector<std::string> lines;
  lines.reserve(row.size());
  for (const auto& value : row) {
    lines.push_back("- " + format_value(value));
  }
  return {join(lines, "\n"), "list-values", row_index, std::nullopt};
}

SerializedExample list_short(const std::vector<ColumnSpec>& cols,
                             const std::vector<FeatureValue>& row, std::size_t max_features,
                             std::size_t row_index) {
  check_arity(cols, row);
  const std::size_t take = std::min(max_features, cols.size());
  std::vector<std::string> lines;
  lines.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    lines.push_back(list_line(cols[i].display_name, row[i]));
  }
  return {join(lines, "\n"), "list-short", row_index, std::nullopt};
}

std::size_t bin_index(const std::vector<double>& edges, double value) {
  const double lo = edges.front();
  const double hi = edges.back();
  if (value >= hi) return edges.size() - 2;
  if (value <= lo) return 0;
  const std::size_t bins = edges.size() - 1;
  auto idx = static_cast<std::size_t>((value - lo) / (hi - lo) * static_cast<double>(bins));
  if (idx >= bins) idx = bins - 1;
  // Guard against rounding at bin boundaries.
  while (idx > 0 && value < edges[idx]) --idx;
  while (idx + 1 < bins && value >= edges[idx + 1]) ++idx;
  return idx;
}

PermutationPlan build_permutation_plan(const Dataset& ds, PermutationMode mode,
                                       std::uint64_t seed) {
  PermutationPlan plan;
  plan.seed = seed;
  if (mode == PermutationMode::names) {
    Rng rng = make_rng(seed, 0x6e616d65);  // "name"
    plan.name_permutation = random_non_identity_permutation(ds.n_cols(), rng);
    return plan;
  }

  Rng rng = make_rng(seed, 0x76616c75);  // "valu"
  plan.value_permutations.resize(ds.n_cols());
  for (std::size_t c = 0; c < ds.n_cols(); ++c) {
    auto& perm = plan.value_permutations[c];
    if (ds.columns[c].kind == ColumnKind::categorical) {
      std::set<std::string> observed;
      for (const auto& row : ds.rows) {
        if (row[c].is_categorical()) observed.insert(row[c].cat());
      }
      std::vector<std::string> tokens(observed.begin(), observed.end());
      const auto mapping = random_non_identity_permutation(tokens.size(), rng);
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        perm.categories[tokens[i]] = tokens[mapping[i]];
      }
      continue;
    }

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& row : ds.rows) {
      if (row[c].is_numeric()) {
        lo = std::min(lo, row[c].num());
        hi = std::max(hi, row[c].num());
      }
    }
    if (!(lo < hi)) {
      // Degenerate column (constant or all-missing): identity bin map.
      const double base = std::isfinite(lo) ? lo : 0.0;
      NumericBinPermutation bins;
      bins.edges.resize(11);
      for (std::size_t i = 0; i <= 10; ++i) {
        bins.edges[i] = base + static_cast<double>(i);
      }
      for (std::size_t i = 0; i < 10; ++i) bins.mapping[i] = i;
      perm.bins = bins;
      continue;
    }
    NumericBinPermutation bins;
    bins.edges.resize(11);
    for (std::size_t i = 0; i <= 10; ++i) {
      bins.edges[i] = lo + (hi - lo) * (static_cast<double>(i) / 10.0);
    }
    bins.edges.front() = lo;
    bins.edges.back() = hi;
    const auto mapping = random_non_identity_permutation(10, rng);
    std::copy(mapping.begin(), mapping.end(), bins.mapping.begin());
    perm.bins = bins;
  }
  return plan;
}

SerializedExample list_permuted_names(const std::vector<ColumnSpec>& cols,
                                      const std::vector<FeatureValue>& row,
                                      const PermutationPlan& plan, std::size_t row_index) {
  check_arity(cols, row);
  std::vector<std::string> lines;
  lines.reserve(cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const std::size_t source = plan.name_permutation ? (*plan.name_permutation)[i] : i;
    lines.push_back(list_line(cols[source].display_name, row[i]));
  }
  return {join(lines, "\n"), "list-permuted-names", row_index, plan.seed};
}

SerializedExample list_permuted_values(const std::vector<ColumnSpec>& cols,
                                       const std::vector<FeatureValue>& row,
                                       const PermutationPlan& plan, std::size_t row_index) {
  check_arity(cols, row);
  if (plan.value_permutations.size() != cols.size()) {
    throw DataError(ErrorKind::arity_mismatch, "permutation plan does not match column count");
  }
  std::vector<std::string> lines;
  lines.reserve(cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const auto& perm = plan.value_permutations[i];
    FeatureValue value = row[i];  // missing maps to missing
    if (value.is_categorical()) {
      auto it = perm.categories.find(value.cat());
      if (it != perm.categories.end()) {
        value = FeatureValue::category(it->second);
      }
    } else if (value.is_numeric() && perm.bins) {
      const auto& bins = *perm.bins;
      const std::size_t source_bin = bin_index(bins.edges, value.num());
      const std::size_t image_bin = bins.mapping[source_bin];
      value = FeatureValue::number((bins.edges[image_bin] + bins.edges[image_bin + 1]) / 2.0);
    }
    lines.push_back(list_line(cols[i].display_name, value));
  }
  return {join(lines, "\n"), "list-permuted-values", row_index, plan.seed};
}

RowSerializer make_template_serializer(const Dataset& ds, const std::string& format,
                                       std::uint64_t seed, std::size_t max_features) {
  if (format == "list") {
    return {"list", [](const Dataset& d, std::size_t r) {
              return list_template(d.columns, d.rows[r], r);
            }};
  }
  if (format == "text") {
    return {"text", [](const Dataset& d, std::size_t r) {
              return text_template(d.columns, d.rows[r], r);
            }};
  }
  if (format == "list-values") {
    return {"list-values", [](const Dataset& d, std::size_t r) {
              return list_only_values(d.columns, d.rows[r], r);
            }};
  }
  if (format == "list-short") {
    return {"list-short", [max_features](const Dataset& d, std::size_t r) {
              return list_short(d.columns, d.rows[r], max_features, r);
            }};
  }
  if (format == "list-permuted-names") {
    auto plan = std::make_shared<PermutationPlan>(
        build_permutation_plan(ds, PermutationMode::names, seed));
    return {"list-permuted-names", [plan](const Dataset& d, std::size_t r) {
              return list_permuted_names(d.columns, d.rows[r], *plan, r);
            }};
  }
  if (format == "list-permuted-values") {
    auto plan = std::make_shared<PermutationPlan>(
        build_permutation_plan(ds, PermutationMode::values, seed));
    return {"list-permuted-values", [plan](const Dataset& d, std::size_t r) {
              return list_permuted_values(d.columns, d.rows[r], *plan, r);
            }};
  }
  throw UsageError("unknown serialization format '" + format + "'");
}

}  // namespace tabser
