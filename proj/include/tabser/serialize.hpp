#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tabser/dataset.hpp"

namespace tabser {

struct SerializedExample {
  std::string text;
  std::string serializer_id;
  std::size_t row_index = 0;
  std::optional<std::uint64_t> seed;
};

SerializedExample list_template(const std::vector<ColumnSpec>& cols,
                                const std::vector<FeatureValue>& row, std::size_t row_index = 0);

SerializedExample text_template(const std::vector<ColumnSpec>& cols,
                                const std::vector<FeatureValue>& row, std::size_t row_index = 0);

SerializedExample list_only_values(const std::vector<ColumnSpec>& cols,
                                   const std::vector<FeatureValue>& row, std::size_t row_index = 0);

SerializedExample list_short(const std::vector<ColumnSpec>& cols,
                             const std::vector<FeatureValue>& row, std::size_t max_features = 10,
                             std::size_t row_index = 0);

enum class PermutationMode { names, values };

/// Ten uniform-width bins over the column's observed [min, max] plus a
/// bijection over the bin indices. Bins are left-closed, right-open; the last
/// bin is closed so the maximum falls in bin 9.
struct NumericBinPermutation {
  std::vector<double> edges;  // 11 strictly increasing edges
  std::array<std::size_t, 10> mapping{};
};

struct ColumnValuePermutation {
  std::map<std::string, std::string> categories;  // bijection over observed tokens
  std::optional<NumericBinPermutation> bins;
};

struct PermutationPlan {
  std::optional<std::vector<std::size_t>> name_permutation;
  std::vector<ColumnValuePermutation> value_permutations;  // one per column (values mode)
  std::uint64_t seed = 0;
};

PermutationPlan build_permutation_plan(const Dataset& ds, PermutationMode mode, std::uint64_t seed);

std::size_t bin_index(const std::vector<double>& edges, double value);

SerializedExample list_permuted_names(const std::vector<ColumnSpec>& cols,
                                      const std::vector<FeatureValue>& row,
                                      const PermutationPlan& plan, std::size_t row_index = 0);

SerializedExample list_permuted_values(const std::vector<ColumnSpec>& cols,
                                       const std::vector<FeatureValue>& row,
                                       const PermutationPlan& plan, std::size_t row_index = 0);

/// A serializer bound to one dataset, usable row-by-row.
struct RowSerializer {
  std::string id;
  std::function<SerializedExample(const Dataset&, std::size_t)> run;
};

/// Builds one of the template-based serializers by CLI format name:
/// list | text | list-values | list-permuted-names | list-permuted-values | list-short.
RowSerializer make_template_serializer(const Dataset& ds, const std::string& format,
                                       std::uint64_t seed = 0, std::size_t max_features = 10);

}  // namespace tabser
