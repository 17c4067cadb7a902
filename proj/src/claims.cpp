#include "tabser/claims.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "tabser/dataset.hpp"
#include "tabser/errors.hpp"
#include "tabser/text.hpp"

namespace tabser {

using json = nlohmann::json;

namespace {

const char* kMonthNames[12] = {"January", "February", "March",     "April",   "May",      "June",
                               "July",    "August",   "September", "October", "November", "December"};

std::string pronoun_for(const std::string& sex) {
  const std::string lowered = to_lower(sex);
  if (lowered == "male") return "He";
  if (lowered == "female") return "She";
  throw DataError(ErrorKind::unknown_sex, "cannot map sex '" + sex + "' to man/woman wording");
}

std::string noun_for(const std::string& sex) {
  const std::string lowered = to_lower(sex);
  if (lowered == "male") return "man";
  if (lowered == "female") return "woman";
  throw DataError(ErrorKind::unknown_sex, "cannot map sex '" + sex + "' to man/woman wording");
}

}  // namespace

Date Date::parse(std::string_view text) {
  const auto bad = [&] {
    throw DataError(ErrorKind::parse_error, "invalid date '" + std::string(text) + "', expected YYYY-MM-DD");
  };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') bad();
  Date date;
  try {
    date.year = std::stoi(std::string(text.substr(0, 4)));
    date.month = std::stoi(std::string(text.substr(5, 2)));
    date.day = std::stoi(std::string(text.substr(8, 2)));
  } catch (const std::exception&) {
    bad();
  }
  if (date.month < 1 || date.month > 12 || date.day < 1 || date.day > 31) bad();
  return date;
}

std::string Date::long_format() const {
  return std::string(kMonthNames[month - 1]) + " " + std::to_string(day) + ", " +
         std::to_string(year);
}

std::string Date::iso_format() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

SelectionOrder parse_selection_order(const std::string& text) {
  if (text == "least_frequent") return SelectionOrder::least_frequent;
  if (text == "most_frequent") return SelectionOrder::most_frequent;
  if (text == "oldest") return SelectionOrder::oldest;
  if (text == "most_recent") return SelectionOrder::most_recent;
  throw UsageError("unknown selection order '" + text + "'");
}

SelectionScope parse_selection_scope(const std::string& text) {
  if (text == "conditions") return SelectionScope::conditions;
  if (text == "procedures") return SelectionScope::procedures;
  if (text == "both") return SelectionScope::both;
  throw UsageError("unknown selection scope '" + text + "'");
}

long long estimate_tokens(std::string_view text) {
  const long long words = word_count(text);
  return (words * 1024 + 399) / 400;
}

namespace {

struct ConceptKey {
  ConceptKind kind;
  std::string id;
  bool operator<(const ConceptKey& other) const {
    return std::tie(kind, id) < std::tie(other.kind, other.id);
  }
};

bool scope_includes(SelectionScope scope, ConceptKind kind) {
  switch (scope) {
    case SelectionScope::conditions: return kind == ConceptKind::condition;
    case SelectionScope::procedures: return kind == ConceptKind::procedure;
    case SelectionScope::both: return true;
  }
  return false;
}

/// Occurrences of a concept id within one visit section, deduplicated.
std::vector<const ConceptRef*> section_refs(const Visit& visit, ConceptKind kind) {
  std::vector<const ConceptRef*> refs;
  std::set<std::string> seen;
  const auto& source = kind == ConceptKind::condition ? visit.conditions : visit.procedures;
  for (const auto& ref : source) {
    if (seen.insert(ref.id).second) {
      refs.push_back(&ref);
    }
  }
  return refs;
}

}  // namespace

std::vector<Concept> patient_concepts(const ClaimsRecord& rec, SelectionScope scope) {
  std::map<ConceptKey, Concept> unique;
  for (const auto& visit : rec.visits) {
    for (ConceptKind kind : {ConceptKind::condition, ConceptKind::procedure}) {
      if (!scope_includes(scope, kind)) continue;
      for (const ConceptRef* ref : section_refs(visit, kind)) {
        auto [it, inserted] = unique.try_emplace(ConceptKey{kind, ref->id});
        Concept& entry = it->second;
        if (inserted) {
          entry.id = ref->id;
          entry.name = ref->name;
          entry.kind = kind;
          entry.frequency = 1;
          entry.first_date = visit.date;
          entry.last_date = visit.date;
        } else {
          entry.frequency += 1;
          entry.first_date = std::min(entry.first_date, visit.date);
          entry.last_date = std::max(entry.last_date, visit.date);
        }
      }
    }
  }
  std::vector<Concept> concepts;
  concepts.reserve(unique.size());
  for (auto& [key, entry] : unique) {
    concepts.push_back(std::move(entry));
  }
  return concepts;
}

std::vector<Concept> rank_concepts(const ClaimsRecord& rec, SelectionStrategy strategy) {
  std::vector<Concept> concepts = patient_concepts(rec, strategy.scope);
  auto id_key = [](const Concept& c) { return std::tie(c.id, c.kind); };
  switch (strategy.order) {
    case SelectionOrder::most_frequent:
      std::sort(concepts.begin(), concepts.end(), [&](const Concept& a, const Concept& b) {
        if (a.frequency != b.frequency) return a.frequency > b.frequency;
        if (a.first_date != b.first_date) return a.first_date < b.first_date;
        return id_key(a) < id_key(b);
      });
      break;
    case SelectionOrder::least_frequent:
      std::sort(concepts.begin(), concepts.end(), [&](const Concept& a, const Concept& b) {
        if (a.frequency != b.frequency) return a.frequency < b.frequency;
        if (a.first_date != b.first_date) return a.first_date < b.first_date;
        return id_key(a) < id_key(b);
      });
      break;
    case SelectionOrder::oldest:
      std::sort(concepts.begin(), concepts.end(), [&](const Concept& a, const Concept& b) {
        if (a.first_date != b.first_date) return a.first_date < b.first_date;
        return id_key(a) < id_key(b);
      });
      break;
    case SelectionOrder::most_recent:
      std::sort(concepts.begin(), concepts.end(), [&](const Concept& a, const Concept& b) {
        if (a.last_date != b.last_date) return a.last_date > b.last_date;
        return id_key(a) < id_key(b);
      });
      break;
  }
  return concepts;
}

namespace {

std::string summary_sentence(const ClaimsRecord& rec) {
  return "Summary: The patient is a " + std::to_string(rec.age) + " year old " + rec.race + " " +
         noun_for(rec.sex) + ".";
}

std::string visit_header(const Visit& visit) {
  if (visit.kind == VisitKind::outpatient) {
    return visit.date.long_format() + ": saw a doctor for " + visit.specialty.value_or("");
  }
  return visit.date.long_format() + ": visited the hospital for " +
         std::to_string(visit.stay_days.value_or(0)) + " days";
}

std::string visit_base_sentence(const ClaimsRecord& rec, const Visit& visit) {
  std::string sentence = "On " + visit.date.long_format() + " the patient ";
  if (visit.kind == VisitKind::outpatient) {
    sentence += "saw a doctor for " + visit.specialty.value_or("");
  } else {
    sentence += "visited the hospital for " + std::to_string(visit.stay_days.value_or(0)) + " days";
  }
  sentence += " with a primary complaint of " + visit.primary_complaint + ".";
  (void)rec;
  return sentence;
}

/// The name each selected id renders under (concept maps may have renamed it).
struct SelectedIndex {
  std::map<ConceptKey, const Concept*> by_key;
  std::vector<const Concept*> in_order;

  explicit SelectedIndex(const std::vector<Concept>& selected) {
    for (const auto& entry : selected) {
      auto [it, inserted] = by_key.try_emplace(ConceptKey{entry.kind, entry.id}, &entry);
      if (inserted) in_order.push_back(&entry);
    }
  }

  const Concept* find(ConceptKind kind, const std::string& id) const {
    auto it = by_key.find(ConceptKey{kind, id});
    return it == by_key.end() ? nullptr : it->second;
  }
};

/// Names of selected concepts occurring in one visit section, in visit order.
std::vector<std::string> selected_names_in(const Visit& visit, ConceptKind kind,
                                           const SelectedIndex& selected) {
  std::vector<std::string> names;
  for (const ConceptRef* ref : section_refs(visit, kind)) {
    if (const Concept* entry = selected.find(kind, ref->id)) {
      names.push_back(entry->name);
    }
  }
  return names;
}

std::string render_visit_list(const Visit& visit, const SelectedIndex& selected) {
  std::vector<std::string> lines{visit_header(visit)};
  const auto conditions = selected_names_in(visit, ConceptKind::condition, selected);
  if (!conditions.empty()) {
    lines.push_back("Conditions:");
    for (const auto& name : conditions) lines.push_back("- " + name);
  }
  const auto procedures = selected_names_in(visit, ConceptKind::procedure, selected);
  if (!procedures.empty()) {
    lines.push_back("Procedures:");
    for (const auto& name : procedures) lines.push_back("- " + name);
  }
  return join(lines, "\n");
}

std::string render_visit_text(const ClaimsRecord& rec, const Visit& visit,
                              const SelectedIndex& selected) {
  std::string block = visit_base_sentence(rec, visit);
  std::vector<std::string> extra;
  for (const auto& name : selected_names_in(visit, ConceptKind::condition, selected)) {
    if (name != visit.primary_complaint) extra.push_back(name);
  }
  const std::string pronoun = pronoun_for(rec.sex);
  if (!extra.empty()) {
    block += " " + pronoun + " was also treated for " + join_natural(extra) + ".";
  }
  const auto procedures = selected_names_in(visit, ConceptKind::procedure, selected);
  if (!procedures.empty()) {
    block += " " + pronoun + " underwent " + join_natural(procedures) + ".";
  }
  return block;
}

bool visit_has_selection(const Visit& visit, const SelectedIndex& selected) {
  for (ConceptKind kind : {ConceptKind::condition, ConceptKind::procedure}) {
    for (const ConceptRef* ref : section_refs(visit, kind)) {
      if (selected.find(kind, ref->id)) return true;
    }
  }
  return false;
}

const char* style_id(ClaimsStyle style) {
  switch (style) {
    case ClaimsStyle::list: return "claims-list";
    case ClaimsStyle::text: return "claims-text";
    case ClaimsStyle::list_short: return "claims-list-short";
  }
  return "claims";
}

constexpr std::size_t kListShortConceptCap = 10;

}  // namespace

SerializedExample serialize_claims(const ClaimsRecord& rec, const std::vector<Concept>& selected,
                                   ClaimsStyle style, std::size_t row_index) {
  std::vector<Concept> capped;
  const std::vector<Concept>* use = &selected;
  if (style == ClaimsStyle::list_short && selected.size() > kListShortConceptCap) {
    capped.assign(selected.begin(), selected.begin() + kListShortConceptCap);
    use = &capped;
  }
  const SelectedIndex index(*use);

  std::vector<std::string> blocks{summary_sentence(rec)};
  for (const auto& visit : rec.visits) {
    if (!visit_has_selection(visit, index)) continue;
    if (style == ClaimsStyle::text) {
      blocks.push_back(render_visit_text(rec, visit, index));
    } else {
      blocks.push_back(render_visit_list(visit, index));
    }
  }
  return {join(blocks, "\n\n"), style_id(style), row_index, std::nullopt};
}

namespace {

/// Incremental word accounting that mirrors serialize_claims exactly for the
/// default token estimator.
class SelectionLedger {
 public:
  SelectionLedger(const ClaimsRecord& rec, ClaimsStyle style)
      : rec_(rec), style_(style), words_(word_count(summary_sentence(rec))) {
    states_.resize(rec.visits.size());
  }

  long long words() const { return words_; }

  /// Words added if `entry` were admitted next.
  long long probe(const Concept& entry) const {
    long long delta = 0;
    for (std::size_t v = 0; v < rec_.visits.size(); ++v) {
      const Visit& visit = rec_.visits[v];
      if (!occurs_in(visit, entry)) continue;
      const VisitState& state = states_[v];
      bool counted_open = state.open;
      if (!counted_open) {
        delta += style_ == ClaimsStyle::text ? word_count(visit_base_sentence(rec_, visit))
                                             : word_count(visit_header(visit));
        counted_open = true;
      }
      if (style_ == ClaimsStyle::text) {
        if (entry.kind == ConceptKind::condition) {
          if (entry.name != visit.primary_complaint) {
            if (state.extra_conditions == 0) delta += 5;  // "He was also treated for"
            if (state.extra_conditions == 1) delta += 1;  // the "and" joining two items
            delta += word_count(entry.name);
          }
        } else {
          if (state.procedures == 0) delta += 2;  // "He underwent"
          if (state.procedures == 1) delta += 1;
          delta += word_count(entry.name);
        }
      } else {
        if (entry.kind == ConceptKind::condition) {
          if (state.conditions == 0) delta += 1;  // "Conditions:"
        } else {
          if (state.procedures == 0) delta += 1;  // "Procedures:"
        }
        delta += 1 + word_count(entry.name);  // "- name"
      }
    }
    return delta;
  }

  void admit(const Concept& entry) {
    words_ += probe(entry);
    for (std::size_t v = 0; v < rec_.visits.size(); ++v) {
      const Visit& visit = rec_.visits[v];
      if (!occurs_in(visit, entry)) continue;
      VisitState& state = states_[v];
      state.open = true;
      if (entry.kind == ConceptKind::condition) {
        state.conditions += 1;
        if (style_ != ClaimsStyle::text || entry.name != visit.primary_complaint) {
          state.extra_conditions += 1;
        }
      } else {
        state.procedures += 1;
      }
    }
  }

 private:
  struct VisitState {
    bool open = false;
    int conditions = 0;
    int extra_conditions = 0;
    int procedures = 0;
  };

  static bool occurs_in(const Visit& visit, const Concept& entry) {
    const auto& source =
        entry.kind == ConceptKind::condition ? visit.conditions : visit.procedures;
    return std::any_of(source.begin(), source.end(),
                       [&](const ConceptRef& ref) { return ref.id == entry.id; });
  }

  const ClaimsRecord& rec_;
  ClaimsStyle style_;
  long long words_;
  std::vector<VisitState> states_;
};

}  // namespace

std::vector<Concept> select_concepts(const ClaimsRecord& rec, SelectionStrategy strategy,
                                     long long budget, ClaimsStyle style,
                                     const TokenEstimator& estimator) {
  if (budget <= 0) {
    throw DataError(ErrorKind::parse_error, "token budget must be positive");
  }
  const std::vector<Concept> ranked = rank_concepts(rec, strategy);
  std::vector<Concept> admitted;

  if (estimator) {
    // Custom estimators fall back to exact re-serialization per prefix.
    for (const auto& entry : ranked) {
      admitted.push_back(entry);
      if (estimator(serialize_claims(rec, admitted, style).text) > budget) {
        admitted.pop_back();
        break;
      }
    }
    return admitted;
  }

  SelectionLedger ledger(rec, style);
  for (const auto& entry : ranked) {
    const long long next_words = ledger.words() + ledger.probe(entry);
    if ((next_words * 1024 + 399) / 400 > budget) {
      break;
    }
    ledger.admit(entry);
    admitted.push_back(entry);
  }
  return admitted;
}

std::vector<Concept> apply_concept_map(const std::vector<Concept>& concepts,
                                       const std::map<std::string, std::string>& name_map) {
  std::vector<Concept> out = concepts;
  for (auto& entry : out) {
    auto it = name_map.find(entry.id);
    if (it != name_map.end()) {
      entry.name = it->second;
    }
  }
  return out;
}

namespace {

Visit parse_visit(const json& doc) {
  Visit visit;
  visit.date = Date::parse(doc.at("date").get<std::string>());
  const std::string kind = doc.at("kind").get<std::string>();
  if (kind == "outpatient") {
    visit.kind = VisitKind::outpatient;
  } else if (kind == "inpatient") {
    visit.kind = VisitKind::inpatient;
  } else {
    throw DataError(ErrorKind::parse_error, "unknown visit kind '" + kind + "'");
  }
  if (doc.contains("specialty")) visit.specialty = doc["specialty"].get<std::string>();
  if (doc.contains("stay_days")) visit.stay_days = doc["stay_days"].get<int>();
  if (visit.kind == VisitKind::outpatient && !visit.specialty) {
    throw DataError(ErrorKind::parse_error, "outpatient visit lacks a specialty");
  }
  if (visit.kind == VisitKind::inpatient && (!visit.stay_days || *visit.stay_days < 1)) {
    throw DataError(ErrorKind::parse_error, "inpatient visit lacks a positive stay_days");
  }
  visit.primary_complaint = doc.value("primary_complaint", std::string());
  auto parse_refs = [](const json& arr) {
    std::vector<ConceptRef> refs;
    for (const auto& item : arr) {
      refs.push_back({item.at("id").get<std::string>(), item.at("name").get<std::string>()});
    }
    return refs;
  };
  if (doc.contains("conditions")) visit.conditions = parse_refs(doc["conditions"]);
  if (doc.contains("procedures")) visit.procedures = parse_refs(doc["procedures"]);
  return visit;
}

}  // namespace

std::vector<ClaimsRecord> parse_claims_jsonl(const std::string& text) {
  std::vector<ClaimsRecord> records;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json doc;
    try {
      doc = json::parse(line);
      ClaimsRecord rec;
      rec.patient_id = doc.value("patient_id", std::string());
      rec.age = doc.at("age").get<int>();
      rec.sex = doc.at("sex").get<std::string>();
      rec.race = doc.at("race").get<std::string>();
      if (doc.contains("visits")) {
        for (const auto& visit : doc["visits"]) {
          rec.visits.push_back(parse_visit(visit));
        }
      }
      if (rec.age < 0) {
        throw DataError(ErrorKind::parse_error, "age must be non-negative");
      }
      std::stable_sort(rec.visits.begin(), rec.visits.end(),
                       [](const Visit& a, const Visit& b) { return a.date < b.date; });
      records.push_back(std::move(rec));
    } catch (const json::exception& ex) {
      throw DataError(ErrorKind::parse_error,
                      "claims line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return records;
}

std::vector<ClaimsRecord> load_claims_jsonl(const std::string& path) {
  return parse_claims_jsonl(read_file(path));
}

std::map<std::string, std::string> load_concept_map_tsv(const std::string& path) {
  std::map<std::string, std::string> map;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError(ErrorKind::parse_error, "concept map line lacks a tab: '" + line + "'");
    }
    const std::string id = trim(line.substr(0, tab));
    const std::string name = trim(line.substr(tab + 1));
    if (name.empty() || name == "-") continue;  // no mapping available
    map[id] = name;
  }
  return map;
}

}  // namespace tabser
