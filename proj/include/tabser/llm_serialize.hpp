#pragma once

#include <string>
#include <vector>

#include "tabser/backend.hpp"
#include "tabser/serialize.hpp"

namespace tabser {

/// Serializes by sending each "name: value" pair to the backend separately
/// and concatenating the generations in column order.
SerializedExample table_to_text(const std::vector<ColumnSpec>& cols,
                                const std::vector<FeatureValue>& row, Backend& backend,
                                std::size_t row_index = 0, const GenerationRequest& params = {});

/// Serializes consecutive column pairs (last group may be a singleton) with
/// the instruction "Write this information as a sentence: ".
SerializedExample text_t0_pairs(const std::vector<ColumnSpec>& cols,
                                const std::vector<FeatureValue>& row, Backend& backend,
                                std::size_t row_index = 0, const GenerationRequest& params = {});

/// One-call rewrite of the whole list serialization, guided with
/// "The {subject} is"; the guide prefix is kept on the output.
SerializedExample text_gpt3_full(const std::vector<ColumnSpec>& cols,
                                 const std::vector<FeatureValue>& row, Backend& backend,
                                 const std::string& subject, std::size_t row_index = 0,
                                 const GenerationRequest& params = {});

const std::vector<std::string>& default_subjects();  // person, car, patient

/// Fraction of the row's non-missing values that appear verbatim in the
/// generated text. Diagnostic only; faithfulness is not enforced.
double value_coverage(const std::vector<ColumnSpec>& cols, const std::vector<FeatureValue>& row,
                      const std::string& output);

}  // namespace tabser
