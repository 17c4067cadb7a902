#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "tabser/backend.hpp"
#include "tabser/claims.hpp"
#include "tabser/dataset.hpp"
#include "tabser/errors.hpp"
#include "tabser/eval.hpp"
#include "tabser/introspect.hpp"
#include "tabser/llm_serialize.hpp"
#include "tabser/manifest.hpp"
#include "tabser/prompt.hpp"
#include "tabser/serialize.hpp"
#include "tabser/text.hpp"

namespace {

using tabser::RunManifest;
using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

struct GlobalOptions {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string log_level = "warn";
};

struct BackendOptions {
  std::string spec;
  std::string cache_path;
  std::string auth_env;
  int max_concurrency = 4;
  double timeout = 30.0;
  int retries = 3;

  std::unique_ptr<tabser::Backend> build() const {
    tabser::BackendConfig config;
    config.cache_path = cache_path;
    config.auth_token_env = auth_env;
    config.max_concurrency = max_concurrency;
    config.timeout_seconds = timeout;
    config.retries = retries;
    return tabser::make_backend(spec, config);
  }
};

void add_backend_flags(CLI::App* cmd, BackendOptions& options, bool required) {
  auto* flag = cmd->add_option("--backend", options.spec,
                               "Backend spec: echo, mock:<rules.json> or http:<url>");
  if (required) flag->required();
  cmd->add_option("--cache", options.cache_path, "JSONL response cache path (http backend)");
  cmd->add_option("--auth-env", options.auth_env, "Env var holding the bearer token");
  cmd->add_option("--max-concurrency", options.max_concurrency, "Max in-flight requests");
  cmd->add_option("--timeout", options.timeout, "Request timeout in seconds");
  cmd->add_option("--retries", options.retries, "Retries on timeout/429/5xx");
}

std::string quote_argument(const std::string& arg) {
  if (arg.find_first_of(" \t\"'") == std::string::npos) return arg;
  std::string quoted = "'";
  for (char ch : arg) {
    if (ch == '\'') {
      quoted += "'\\''";
    } else {
      quoted.push_back(ch);
    }
  }
  quoted += "'";
  return quoted;
}

std::string command_line_of(int argc, char** argv) {
  std::string line;
  for (int i = 0; i < argc; ++i) {
    if (i > 0) line += " ";
    line += quote_argument(argv[i]);
  }
  return line;
}

tabser::Dataset load_dataset(const std::string& csv_path, const std::string& meta_path,
                             const std::string& label_column, bool apply_maps,
                             RunManifest& manifest) {
  manifest.add_input(csv_path);
  manifest.add_input(meta_path);
  const auto meta = tabser::DatasetMetadata::load(meta_path);
  tabser::Dataset ds = tabser::load_csv(csv_path, meta, label_column);
  if (apply_maps) {
    ds = tabser::apply_display_maps(ds);
  }
  return ds;
}

int run_serialize(const GlobalOptions& global, const std::string& command_line,
                  const std::string& dataset_path, const std::string& meta_path,
                  const std::string& label_column, const std::string& format,
                  std::size_t max_features, const BackendOptions& backend_options,
                  const std::string& subject, bool raw_values, const std::string& out_path) {
  RunManifest manifest;
  manifest.command_line = command_line;
  const tabser::Dataset ds =
      load_dataset(dataset_path, meta_path, label_column, !raw_values, manifest);

  const bool llm_format = format == "table2text" || format == "text-pairs" || format == "text-full";
  std::unique_ptr<tabser::Backend> backend;
  tabser::RowSerializer serializer;
  if (llm_format) {
    if (backend_options.spec.empty()) {
      throw tabser::UsageError("--backend is required for LLM-assisted formats");
    }
    backend = backend_options.build();
    tabser::Backend* raw = backend.get();
    if (format == "table2text") {
      serializer = {"table2text", [raw](const tabser::Dataset& d, std::size_t r) {
                      return tabser::table_to_text(d.columns, d.rows[r], *raw, r);
                    }};
    } else if (format == "text-pairs") {
      serializer = {"text-pairs", [raw](const tabser::Dataset& d, std::size_t r) {
                      return tabser::text_t0_pairs(d.columns, d.rows[r], *raw, r);
                    }};
    } else {
      serializer = {"text-full", [raw, subject](const tabser::Dataset& d, std::size_t r) {
                      return tabser::text_gpt3_full(d.columns, d.rows[r], *raw, subject, r);
                    }};
    }
  } else {
    serializer = tabser::make_template_serializer(ds, format, global.seed, max_features);
  }

  const bool seeded = format == "list-permuted-names" || format == "list-permuted-values";
  if (seeded) {
    manifest.seeds = {global.seed};
  }

  std::ostringstream out;
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    const tabser::SerializedExample example = serializer.run(ds, r);
    ordered_json row;
    row["row_index"] = example.row_index;
    row["serializer_id"] = example.serializer_id;
    if (example.seed) {
      row["seed"] = *example.seed;
    } else {
      row["seed"] = nullptr;
    }
    row["text"] = example.text;
    out << row.dump() << "\n";
  }
  tabser::write_output_with_manifest(out_path, out.str(), std::move(manifest));
  return 0;
}

int run_classify(const std::string& command_line, const std::string& template_path,
                 const std::string& serializations_path, const BackendOptions& backend_options,
                 const std::string& out_path) {
  RunManifest manifest;
  manifest.command_line = command_line;
  manifest.add_input(template_path);
  manifest.add_input(serializations_path);

  const tabser::TaskTemplate tpl = tabser::load_template(template_path);
  auto backend = backend_options.build();

  std::ostringstream out;
  std::istringstream in(tabser::read_file(serializations_path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json row = json::parse(line, nullptr, false);
    if (row.is_discarded() || !row.contains("text")) {
      throw tabser::DataError(tabser::ErrorKind::parse_error,
                              "serializations line " + std::to_string(line_no) +
                                  " is not a JSON object with a text field");
    }
    tabser::SerializedExample example;
    example.text = row["text"].get<std::string>();
    example.row_index = row.value("row_index", line_no - 1);
    example.serializer_id = row.value("serializer_id", std::string());

    const tabser::ClassScores scores = tabser::classify(tabser::render(tpl, example), *backend);
    ordered_json result;
    result["row_index"] = example.row_index;
    result["probs"] = scores.probs;
    result["predicted"] = scores.predicted;
    out << result.dump() << "\n";
  }
  tabser::write_output_with_manifest(out_path, out.str(), std::move(manifest));
  return 0;
}

int run_eval(const GlobalOptions& global, const std::string& command_line,
             const std::string& dataset_path, const std::string& meta_path,
             const std::string& label_column, const std::string& template_path,
             const std::string& format, std::size_t max_features,
             const BackendOptions& backend_options, const std::string& shots_text,
             std::size_t n_seeds, const std::string& out_path, std::string shots_out) {
  RunManifest manifest;
  manifest.command_line = command_line;
  const tabser::Dataset ds = load_dataset(dataset_path, meta_path, label_column, true, manifest);
  manifest.add_input(template_path);
  const tabser::TaskTemplate tpl = tabser::load_template(template_path);
  if (backend_options.spec.rfind("mock:", 0) == 0) {
    manifest.add_input(backend_options.spec.substr(5));
  }
  auto backend = backend_options.build();

  tabser::ExperimentConfig config;
  config.shots_grid.clear();
  for (const auto& part : tabser::split(shots_text, ',')) {
    const std::string token = tabser::trim(part);
    if (token.empty()) continue;
    config.shots_grid.push_back(static_cast<std::size_t>(std::stoull(token)));
  }
  if (config.shots_grid.empty()) {
    throw tabser::UsageError("--shots must list at least one shot count");
  }
  config.seeds.clear();
  for (std::size_t s = 0; s < n_seeds; ++s) {
    config.seeds.push_back(s);
  }
  config.threads = global.threads;
  manifest.seeds = config.seeds;

  const tabser::RowSerializer serializer =
      tabser::make_template_serializer(ds, format, global.seed, max_features);
  const tabser::ExperimentResult result =
      tabser::run_experiment(ds, tpl, serializer, *backend, config);

  ordered_json doc;
  doc["config"] = ordered_json{{"dataset", dataset_path},
                               {"meta", meta_path},
                               {"label_column", label_column},
                               {"template", template_path},
                               {"format", format},
                               {"backend", backend_options.spec},
                               {"shots", shots_text},
                               {"seeds", config.seeds},
                               {"plan_seed", global.seed},
                               {"tool_version", tabser::kToolVersion}};
  auto& reports = doc["reports"] = ordered_json::array();
  for (const auto& report : result.reports) {
    reports.push_back(ordered_json{{"k", report.k},
                                   {"serializer_id", report.serializer_id},
                                   {"per_seed_auc", report.per_seed_auc},
                                   {"mean", report.mean},
                                   {"sd", report.sd}});
  }
  tabser::write_output_with_manifest(out_path, doc.dump(2) + "\n", manifest);

  if (!result.shot_sets.empty()) {
    if (shots_out.empty()) {
      std::filesystem::path base(out_path);
      base.replace_extension();
      shots_out = base.string() + "_shots";
    }
    for (const auto& shots : result.shot_sets) {
      ordered_json shot_doc{{"seed", shots.seed}, {"k", shots.k}, {"indices", shots.indices}};
      const std::string name = "shots_seed" + std::to_string(shots.seed) + "_k" +
                               std::to_string(shots.k) + ".json";
      tabser::atomic_write_file((std::filesystem::path(shots_out) / name).string(),
                                shot_doc.dump(2) + "\n");
    }
    RunManifest shots_manifest = manifest;
    tabser::atomic_write_file((std::filesystem::path(shots_out) / "manifest.json").string(),
                              [&] {
                                shots_manifest.finalize();
                                return shots_manifest.to_json();
                              }());
  }
  return 0;
}

int run_introspect(const std::string& command_line, const std::string& dataset_path,
                   const std::string& meta_path, const std::string& label_column,
                   const std::string& preds_path, int folds, std::uint64_t fold_seed,
                   const std::string& target, const std::string& out_path) {
  RunManifest manifest;
  manifest.command_line = command_line;
  const tabser::Dataset ds = load_dataset(dataset_path, meta_path, label_column, false, manifest);
  manifest.add_input(preds_path);

  std::vector<double> probs(ds.n_rows(), 0.0);
  std::vector<bool> seen(ds.n_rows(), false);
  std::istringstream in(tabser::read_file(preds_path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json row = json::parse(line, nullptr, false);
    if (row.is_discarded() || !row.contains("row_index") || !row.contains("probs")) {
      throw tabser::DataError(tabser::ErrorKind::parse_error,
                              "predictions must be JSONL rows with row_index and probs");
    }
    const auto index = row["row_index"].get<std::size_t>();
    if (index >= ds.n_rows()) {
      throw tabser::DataError(tabser::ErrorKind::parse_error,
                              "prediction row_index " + std::to_string(index) + " out of range");
    }
    const auto row_probs = row["probs"].get<std::vector<double>>();
    if (row_probs.size() < 2) {
      throw tabser::DataError(tabser::ErrorKind::parse_error,
                              "binary class probabilities required");
    }
    probs[index] = row_probs[1];
    seen[index] = true;
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) {
      throw tabser::DataError(tabser::ErrorKind::parse_error,
                              "no prediction for row " + std::to_string(i));
    }
  }

  tabser::SurrogateOptions options;
  options.folds = folds;
  options.fold_seed = fold_seed;
  options.target = target == "probability" ? tabser::SurrogateTarget::probability
                                           : tabser::SurrogateTarget::hard_label;
  const tabser::SurrogateResult result = tabser::surrogate_importance(ds, probs, options);

  std::vector<std::size_t> by_rank(result.weights.size());
  for (std::size_t i = 0; i < result.ranks.size(); ++i) {
    by_rank[result.ranks[i] - 1] = i;
  }
  ordered_json doc;
  doc["folds"] = result.folds;
  doc["chosen_c"] = result.chosen_c;
  doc["intercept"] = result.intercept;
  auto& features = doc["features"] = ordered_json::array();
  for (std::size_t rank = 0; rank < by_rank.size(); ++rank) {
    const std::size_t i = by_rank[rank];
    features.push_back(ordered_json{{"name", result.feature_names[i]},
                                    {"rank", rank + 1},
                                    {"weight", result.weights[i]}});
  }
  tabser::write_output_with_manifest(out_path, doc.dump(2) + "\n", std::move(manifest));
  return 0;
}

int run_rr(const std::string& command_line, const std::string& claims_path,
           const std::string& labels_path, const std::string& out_path) {
  RunManifest manifest;
  manifest.command_line = command_line;
  manifest.add_input(claims_path);
  manifest.add_input(labels_path);

  const auto records = tabser::load_claims_jsonl(claims_path);

  std::map<std::string, int> labels;
  const auto rows = tabser::parse_csv(tabser::read_file(labels_path));
  if (rows.empty() || rows[0].size() < 2) {
    throw tabser::DataError(tabser::ErrorKind::parse_error,
                            "labels CSV needs patient_id,label columns");
  }
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() == 1 && rows[r][0].empty()) continue;
    if (rows[r].size() < 2) {
      throw tabser::DataError(tabser::ErrorKind::parse_error,
                              "labels row " + std::to_string(r) + " lacks a label");
    }
    labels[rows[r][0]] = std::stoi(rows[r][1]);
  }

  // Feature name -> patient ids having it.
  std::map<std::string, std::set<std::string>> exposure;
  std::size_t n_pos = 0, n_total = 0;
  for (const auto& rec : records) {
    auto it = labels.find(rec.patient_id);
    if (it == labels.end()) {
      throw tabser::DataError(tabser::ErrorKind::parse_error,
                              "no label for patient '" + rec.patient_id + "'");
    }
    ++n_total;
    if (it->second != 0) ++n_pos;
    exposure["sex_" + tabser::to_lower(rec.sex)].insert(rec.patient_id);
    exposure["race_" + tabser::to_lower(rec.race)].insert(rec.patient_id);
    for (const auto& entry : tabser::patient_concepts(rec, tabser::SelectionScope::both)) {
      exposure[entry.name].insert(rec.patient_id);
    }
  }
  (void)n_pos;
  (void)n_total;

  ordered_json doc;
  auto& features = doc["features"] = ordered_json::array();
  for (const auto& [feature, patients] : exposure) {
    long long a = 0, b = 0, c = 0, d = 0;
    for (const auto& rec : records) {
      const bool exposed = patients.count(rec.patient_id) > 0;
      const bool positive = labels.at(rec.patient_id) != 0;
      if (exposed && positive) ++a;
      if (exposed && !positive) ++b;
      if (!exposed && positive) ++c;
      if (!exposed && !positive) ++d;
    }
    if (a + b == 0 || c + d == 0) continue;  // feature present in all or no patients
    const tabser::RelativeRisk rr = tabser::relative_risk(a, b, c, d);
    ordered_json entry;
    entry["feature"] = feature;
    entry["exposed"] = a + b;
    entry["rr"] = std::isfinite(rr.rr) ? json(rr.rr) : json(nullptr);
    entry["ci_low"] = rr.ci_defined ? json(rr.ci_low) : json(nullptr);
    entry["ci_high"] = rr.ci_defined ? json(rr.ci_high) : json(nullptr);
    entry["ci_defined"] = rr.ci_defined;
    features.push_back(std::move(entry));
  }
  tabser::write_output_with_manifest(out_path, doc.dump(2) + "\n", std::move(manifest));
  return 0;
}

int run_claims(const std::string& command_line, const std::string& claims_path,
               const std::string& order_text, const std::string& scope_text,
               const std::string& style_text, long long budget, const std::string& template_path,
               const std::string& concept_map_path, const std::string& out_path) {
  RunManifest manifest;
  manifest.command_line = command_line;
  manifest.add_input(claims_path);

  tabser::SelectionStrategy strategy{tabser::parse_selection_order(order_text),
                                     tabser::parse_selection_scope(scope_text)};
  tabser::ClaimsStyle style;
  if (style_text == "list") {
    style = tabser::ClaimsStyle::list;
  } else if (style_text == "text") {
    style = tabser::ClaimsStyle::text;
  } else if (style_text == "list-short") {
    style = tabser::ClaimsStyle::list_short;
  } else {
    throw tabser::UsageError("unknown claims style '" + style_text + "'");
  }

  if (!template_path.empty()) {
    manifest.add_input(template_path);
    const tabser::TaskTemplate tpl = tabser::load_template(template_path);
    std::string body = tpl.body;
    const auto pos = body.find("{{serialization}}");
    body.erase(pos, std::string("{{serialization}}").size());
    budget -= tabser::estimate_tokens(body);
  }
  if (budget <= 0) {
    throw tabser::UsageError("token budget leaves no room for the serialization");
  }

  std::map<std::string, std::string> name_map;
  if (!concept_map_path.empty()) {
    manifest.add_input(concept_map_path);
    name_map = tabser::load_concept_map_tsv(concept_map_path);
  }

  auto records = tabser::load_claims_jsonl(claims_path);
  std::ostringstream out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    tabser::ClaimsRecord rec = records[i];
    if (!name_map.empty()) {
      for (auto& visit : rec.visits) {
        for (auto* refs : {&visit.conditions, &visit.procedures}) {
          for (auto& ref : *refs) {
            auto it = name_map.find(ref.id);
            if (it != name_map.end()) ref.name = it->second;
          }
        }
      }
    }
    const tabser::ClaimsStyle selection_style =
        style == tabser::ClaimsStyle::text ? tabser::ClaimsStyle::text : tabser::ClaimsStyle::list;
    const auto selected = tabser::select_concepts(rec, strategy, budget, selection_style);
    const tabser::SerializedExample example = tabser::serialize_claims(rec, selected, style, i);
    ordered_json row;
    row["patient_id"] = rec.patient_id;
    row["serializer_id"] = example.serializer_id;
    row["n_concepts"] = selected.size();
    row["text"] = example.text;
    out << row.dump() << "\n";
  }
  tabser::write_output_with_manifest(out_path, out.str(), std::move(manifest));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tabular-to-text serialization and few-shot evaluation toolkit"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--seed", global.seed, "Seed for permutation plans")->capture_default_str();
  app.add_option("--threads", global.threads, "Worker threads for classification")
      ->capture_default_str();
  app.add_option("--log-level", global.log_level, "debug|info|warn|error")->capture_default_str();

  const std::string command_line = command_line_of(argc, argv);

  // serialize
  auto* serialize_cmd = app.add_subcommand("serialize", "Serialize dataset rows to text");
  std::string s_dataset, s_meta, s_label, s_format, s_subject = "person", s_out;
  std::size_t s_max_features = 10;
  bool s_raw = false;
  BackendOptions s_backend;
  serialize_cmd->add_option("--dataset", s_dataset, "CSV input")->required();
  serialize_cmd->add_option("--meta", s_meta, "Column metadata JSON")->required();
  serialize_cmd->add_option("--label-column", s_label, "Label column name")->required();
  serialize_cmd
      ->add_option("--format", s_format,
                   "list|text|list-values|list-permuted-names|list-permuted-values|list-short|"
                   "table2text|text-pairs|text-full")
      ->required();
  serialize_cmd->add_option("--max-features", s_max_features, "Cap for list-short")
      ->capture_default_str();
  serialize_cmd->add_option("--subject", s_subject, "Guide subject for text-full")
      ->capture_default_str();
  serialize_cmd->add_flag("--raw-values", s_raw, "Skip the value display maps");
  add_backend_flags(serialize_cmd, s_backend, false);
  serialize_cmd->add_option("--out", s_out, "Output JSONL")->required();

  // classify
  auto* classify_cmd = app.add_subcommand("classify", "Score serialized rows against a template");
  std::string c_template, c_serializations, c_out;
  BackendOptions c_backend;
  classify_cmd->add_option("--template", c_template, "Task template file")->required();
  classify_cmd->add_option("--serializations", c_serializations, "JSONL from serialize")->required();
  add_backend_flags(classify_cmd, c_backend, true);
  classify_cmd->add_option("--out", c_out, "Output predictions JSONL")->required();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Run the few-shot evaluation protocol");
  std::string e_dataset, e_meta, e_label, e_template, e_format = "text", e_shots = "0", e_out,
              e_shots_out;
  std::size_t e_seeds = 5, e_max_features = 10;
  BackendOptions e_backend;
  eval_cmd->add_option("--dataset", e_dataset, "CSV input")->required();
  eval_cmd->add_option("--meta", e_meta, "Column metadata JSON")->required();
  eval_cmd->add_option("--label-column", e_label, "Label column name")->required();
  eval_cmd->add_option("--template", e_template, "Task template file")->required();
  eval_cmd->add_option("--format", e_format, "Serialization format")->capture_default_str();
  eval_cmd->add_option("--max-features", e_max_features, "Cap for list-short")
      ->capture_default_str();
  add_backend_flags(eval_cmd, e_backend, true);
  eval_cmd->add_option("--shots", e_shots, "Comma-separated shot counts")->capture_default_str();
  eval_cmd->add_option("--seeds", e_seeds, "Number of seeds (0..N-1)")->capture_default_str();
  eval_cmd->add_option("--out", e_out, "Report JSON")->required();
  eval_cmd->add_option("--shots-out", e_shots_out, "Directory for shot exports");

  // introspect
  auto* introspect_cmd = app.add_subcommand("introspect", "Surrogate feature importance");
  std::string i_dataset, i_meta, i_label, i_preds, i_target = "hard", i_out;
  int i_folds = 4;
  std::uint64_t i_fold_seed = 0;
  introspect_cmd->add_option("--dataset", i_dataset, "CSV input")->required();
  introspect_cmd->add_option("--meta", i_meta, "Column metadata JSON")->required();
  introspect_cmd->add_option("--label-column", i_label, "Label column name")->required();
  introspect_cmd->add_option("--preds", i_preds, "Predictions JSONL from classify")->required();
  introspect_cmd->add_option("--folds", i_folds, "CV folds")->capture_default_str();
  introspect_cmd->add_option("--fold-seed", i_fold_seed, "Fold assignment seed")
      ->capture_default_str();
  introspect_cmd->add_option("--target", i_target, "hard|probability")->capture_default_str();
  introspect_cmd->add_option("--out", i_out, "Importance JSON")->required();

  // rr
  auto* rr_cmd = app.add_subcommand("rr", "Relative risk per claims feature");
  std::string r_claims, r_labels, r_out;
  rr_cmd->add_option("--claims", r_claims, "Claims JSONL")->required();
  rr_cmd->add_option("--labels", r_labels, "CSV with patient_id,label")->required();
  rr_cmd->add_option("--out", r_out, "Relative risk JSON")->required();

  // claims
  auto* claims_cmd = app.add_subcommand("claims", "Serialize claims records under a budget");
  std::string cl_claims, cl_order = "most_frequent", cl_scope = "conditions", cl_style = "list",
              cl_template, cl_map, cl_out;
  long long cl_budget = 1024;
  claims_cmd->add_option("--claims", cl_claims, "Claims JSONL")->required();
  claims_cmd->add_option("--order", cl_order, "least_frequent|most_frequent|oldest|most_recent")
      ->capture_default_str();
  claims_cmd->add_option("--scope", cl_scope, "conditions|procedures|both")->capture_default_str();
  claims_cmd->add_option("--style", cl_style, "list|text|list-short")->capture_default_str();
  claims_cmd->add_option("--budget", cl_budget, "Token budget")->capture_default_str();
  claims_cmd->add_option("--template", cl_template, "Task template whose cost is subtracted");
  claims_cmd->add_option("--concept-map", cl_map, "TSV id -> alternative name");
  claims_cmd->add_option("--out", cl_out, "Output JSONL")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == static_cast<int>(CLI::ExitCodes::Success) ? 0 : 1;
  }

  try {
    if (serialize_cmd->parsed()) {
      return run_serialize(global, command_line, s_dataset, s_meta, s_label, s_format,
                           s_max_features, s_backend, s_subject, s_raw, s_out);
    }
    if (classify_cmd->parsed()) {
      return run_classify(command_line, c_template, c_serializations, c_backend, c_out);
    }
    if (eval_cmd->parsed()) {
      return run_eval(global, command_line, e_dataset, e_meta, e_label, e_template, e_format,
                      e_max_features, e_backend, e_shots, e_seeds, e_out, e_shots_out);
    }
    if (introspect_cmd->parsed()) {
      return run_introspect(command_line, i_dataset, i_meta, i_label, i_preds, i_folds,
                            i_fold_seed, i_target, i_out);
    }
    if (rr_cmd->parsed()) {
      return run_rr(command_line, r_claims, r_labels, r_out);
    }
    if (claims_cmd->parsed()) {
      return run_claims(command_line, cl_claims, cl_order, cl_scope, cl_style, cl_budget,
                        cl_template, cl_map, cl_out);
    }
  } catch (const tabser::UsageError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const tabser::BackendError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 3;
  } catch (const tabser::DataError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  return 0;
}
