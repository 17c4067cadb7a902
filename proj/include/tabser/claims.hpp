#pragma once

#include <compare>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tabser/serialize.hpp"

namespace tabser {

struct Date {
  int year = 0;
  int month = 1;  // 1..12
  int day = 1;    // 1..31

  auto operator<=>(const Date&) const = default;

  static Date parse(std::string_view text);  // "YYYY-MM-DD"
  std::string long_format() const;           // "May 30, 2014"
  std::string iso_format() const;            // "2014-05-30"
};

enum class VisitKind { outpatient, inpatient };

struct ConceptRef {
  std::string id;
  std::string name;
};

struct Visit {
  Date date;
  VisitKind kind = VisitKind::outpatient;
  std::optional<std::string> specialty;  // outpatient
  std::optional<int> stay_days;          // inpatient
  std::string primary_complaint;
  std::vector<ConceptRef> conditions;
  std::vector<ConceptRef> procedures;
};

struct ClaimsRecord {
  std::string patient_id;
  int age = 0;
  std::string sex;
  std::string race;
  std::vector<Visit> visits;  // ascending by date after ingestion
};

enum class ConceptKind { condition, procedure };

/// A patient-level medical concept: occurrences across visits collapse to one
/// entry with its frequency and first/last occurrence dates.
struct Concept {
  std::string id;
  std::string name;
  ConceptKind kind = ConceptKind::condition;
  int frequency = 1;
  Date first_date;
  Date last_date;
};

enum class SelectionOrder { least_frequent, most_frequent, oldest, most_recent };
enum class SelectionScope { conditions, procedures, both };

struct SelectionStrategy {
  SelectionOrder order = SelectionOrder::most_frequent;
  SelectionScope scope = SelectionScope::conditions;
};

SelectionOrder parse_selection_order(const std::string& text);
SelectionScope parse_selection_scope(const std::string& text);

enum class ClaimsStyle { list, text, list_short };

/// ceil(words * 1024 / 400): the scoring model's token limit of 1024 roughly
/// corresponds to 400 words.
long long estimate_tokens(std::string_view text);

using TokenEstimator = std::function<long long(std::string_view)>;

/// Unique concepts of the patient within `scope`, unranked.
std::vector<Concept> patient_concepts(const ClaimsRecord& rec, SelectionScope scope);

/// Concepts ranked by the strategy. Frequency orders break ties by earlier
/// first occurrence, then id; date orders break ties by id.
std::vector<Concept> rank_concepts(const ClaimsRecord& rec, SelectionStrategy strategy);

/// Longest prefix of the ranked concepts whose serialization (in `style`)
/// fits the token budget. A custom estimator switches the cost model from the
/// incremental word count to full re-serialization per prefix.
std::vector<Concept> select_concepts(const ClaimsRecord& rec, SelectionStrategy strategy,
                                     long long budget, ClaimsStyle style = ClaimsStyle::list,
                                     const TokenEstimator& estimator = {});

/// Renders the patient summary plus every visit that carries at least one
/// selected concept. Selected concepts are matched to visits by id and render
/// under the selected name.
SerializedExample serialize_claims(const ClaimsRecord& rec, const std::vector<Concept>& selected,
                                   ClaimsStyle style, std::size_t row_index = 0);

/// Replaces concept names through an id -> alternative-name map; unmapped
/// concepts keep their original name.
std::vector<Concept> apply_concept_map(const std::vector<Concept>& concepts,
                                       const std::map<std::string, std::string>& name_map);

std::vector<ClaimsRecord> load_claims_jsonl(const std::string& path);
std::vector<ClaimsRecord> parse_claims_jsonl(const std::string& text);

/// Two-column TSV: concept id, alternative name. A "-" name means unmapped.
std::map<std::string, std::string> load_concept_map_tsv(const std::string& path);

}  // namespace tabser
