#include "tabser/prompt.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tabser/dataset.hpp"
#include "tabser/errors.hpp"
#include "tabser/text.hpp"

namespace tabser {

namespace {

constexpr std::string_view kPlaceholder = "{{serialization}}";
constexpr std::string_view kTrainingClause = "\n|||\n{{ answer_choices[label] }}";

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t count = 0;
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string_view::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

}  // namespace

std::string TaskTemplate::render_source() const {
  return "answer_choices: '" + join(answer_choices, " ||| ") + "'\njinja: '" + raw_body + "'\n";
}

TaskTemplate parse_template(std::string_view source) {
  constexpr std::string_view kChoicesKey = "answer_choices: '";
  constexpr std::string_view kJinjaKey = "jinja: '";

  const auto choices_pos = source.find(kChoicesKey);
  if (choices_pos == std::string_view::npos) {
    throw DataError(ErrorKind::empty_choices, "template lacks an answer_choices line");
  }
  const auto choices_start = choices_pos + kChoicesKey.size();
  const auto choices_end = source.find('\'', choices_start);
  if (choices_end == std::string_view::npos) {
    throw DataError(ErrorKind::parse_error, "unterminated answer_choices quote");
  }
  const std::string choices_text(source.substr(choices_start, choices_end - choices_start));

  TaskTemplate tpl;
  for (const auto& part : split_on(choices_text, "|||")) {
    tpl.answer_choices.push_back(trim(part));
  }
  if (tpl.answer_choices.empty() ||
      std::any_of(tpl.answer_choices.begin(), tpl.answer_choices.end(),
                  [](const std::string& c) { return c.empty(); })) {
    throw DataError(ErrorKind::empty_choices, "answer_choices must be non-empty");
  }
  std::set<std::string> unique(tpl.answer_choices.begin(), tpl.answer_choices.end());
  if (unique.size() != tpl.answer_choices.size()) {
    throw DataError(ErrorKind::duplicate_choices, "answer_choices must be pairwise distinct");
  }

  const auto jinja_pos = source.find(kJinjaKey, choices_end);
  if (jinja_pos == std::string_view::npos) {
    throw DataError(ErrorKind::missing_placeholder, "template lacks a jinja line");
  }
  const auto body_start = jinja_pos + kJinjaKey.size();
  const auto body_end = source.rfind('\'');
  if (body_end == std::string_view::npos || body_end <= body_start) {
    throw DataError(ErrorKind::parse_error, "unterminated jinja quote");
  }
  tpl.raw_body = std::string(source.substr(body_start, body_end - body_start));

  tpl.body = tpl.raw_body;
  if (ends_with(tpl.body, kTrainingClause)) {
    tpl.body.erase(tpl.body.size() - kTrainingClause.size());
  }

  if (count_occurrences(tpl.body, kPlaceholder) != 1) {
    throw DataError(ErrorKind::missing_placeholder,
                    "template body must contain {{serialization}} exactly once");
  }
  return tpl;
}

TaskTemplate load_template(const std::string& path) {
  return parse_template(read_file(path));
}

RenderedPrompt render(const TaskTemplate& tpl, const SerializedExample& example) {
  const auto pos = tpl.body.find(kPlaceholder);
  std::string text = tpl.body;
  text.replace(pos, kPlaceholder.size(), example.text);
  return {std::move(text), tpl.answer_choices};
}

ClassScores normalize_scores(const std::vector<double>& logprobs) {
  if (logprobs.empty()) {
    throw DataError(ErrorKind::empty_choices, "no choice scores to normalize");
  }
  for (double v : logprobs) {
    if (!std::isfinite(v)) {
      throw DataError(ErrorKind::non_finite_score, "choice log-probability is not finite");
    }
  }
  const double max_score = *std::max_element(logprobs.begin(), logprobs.end());
  ClassScores scores;
  scores.probs.reserve(logprobs.size());
  double total = 0.0;
  for (double v : logprobs) {
    const double e = std::exp(v - max_score);
    scores.probs.push_back(e);
    total += e;
  }
  for (double& p : scores.probs) {
    p /= total;
  }
  scores.predicted = static_cast<std::size_t>(
      std::max_element(scores.probs.begin(), scores.probs.end()) - scores.probs.begin());
  return scores;
}

ClassScores classify(const RenderedPrompt& prompt, Backend& backend) {
  std::vector<std::string> spaced;
  spaced.reserve(prompt.choices.size());
  for (const auto& choice : prompt.choices) {
    spaced.push_back(" " + choice);
  }
  return normalize_scores(backend.score_choices(prompt.text, spaced));
}

}  // namespace tabser
