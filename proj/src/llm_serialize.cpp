#include "tabser/llm_serialize.hpp"

#include <algorithm>

#include "tabser/errors.hpp"
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

std::string pair_text(const ColumnSpec& col, const FeatureValue& value) {
  return col.display_name + ": " + format_value(value);
}

std::string run_unit(Backend& backend, GenerationRequest request, const char* what,
                     std::size_t unit_index) {
  try {
    return backend.generate(request);
  } catch (const BackendError& err) {
    throw BackendError(err.kind(), std::string(what) + " unit " + std::to_string(unit_index) +
                                       ": " + err.what(),
                       err.status());
  }
}

}  // namespace

SerializedExample table_to_text(const std::vector<ColumnSpec>& cols,
                                const std::vector<FeatureValue>& row, Backend& backend,
                                std::size_t row_index, const GenerationRequest& params) {
  check_arity(cols, row);
  std::vector<std::string> generations;
  generations.reserve(cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i) {
    GenerationRequest request = params;
    request.prompt = pair_text(cols[i], row[i]);
    generations.push_back(run_unit(backend, request, "table-to-text", i));
  }
  return {join(generations, " "), "table2text", row_index, std::nullopt};
}

SerializedExample text_t0_pairs(const std::vector<ColumnSpec>& cols,
                                const std::vector<FeatureValue>& row, Backend& backend,
                                std::size_t row_index, const GenerationRequest& params) {
  check_arity(cols, row);
  std::vector<std::string> generations;
  for (std::size_t start = 0; start < cols.size(); start += 2) {
    const std::size_t end = std::min(start + 2, cols.size());
    std::vector<std::string> pairs;
    for (std::size_t i = start; i < end; ++i) {
      pairs.push_back(pair_text(cols[i], row[i]));
    }
    GenerationRequest request = params;
    request.prompt = "Write this information as a sentence: " + join(pairs, ", ");
    generations.push_back(run_unit(backend, request, "text-pairs", start / 2));
  }
  return {join(generations, " "), "text-pairs", row_index, std::nullopt};
}

const std::vector<std::string>& default_subjects() {
  static const std::vector<std::string> subjects{"person", "car", "patient"};
  return subjects;
}

SerializedExample text_gpt3_full(const std::vector<ColumnSpec>& cols,
                                 const std::vector<FeatureValue>& row, Backend& backend,
                                 const std::string& subject, std::size_t row_index,
                                 const GenerationRequest& params) {
  check_arity(cols, row);
  const auto& subjects = default_subjects();
  if (std::find(subjects.begin(), subjects.end(), subject) == subjects.end()) {
    throw DataError(ErrorKind::unknown_subject, "subject '" + subject + "' is not supported");
  }
  const std::string guide = "The " + subject + " is";
  GenerationRequest request = params;
  request.guide_prefix = guide;
  request.prompt = "Rewrite all list items in the input as a natural text.\n\n" +
                   list_template(cols, row, row_index).text + "\n\n" + guide;
  const std::string generation = run_unit(backend, request, "text-full", 0);
  return {guide + generation, "text-full", row_index, std::nullopt};
}

double value_coverage(const std::vector<ColumnSpec>& cols, const std::vector<FeatureValue>& row,
                      const std::string& output) {
  check_arity(cols, row);
  std::size_t present = 0;
  std::size_t total = 0;
  for (const auto& value : row) {
    if (value.is_missing()) continue;
    ++total;
    if (output.find(format_value(value)) != std::string::npos) {
      ++present;
    }
  }
  if (total == 0) return 1.0;
  return static_cast<double>(present) / static_cast<double>(total);
}

}  // namespace tabser
