#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tabser/backend.hpp"
#include "tabser/serialize.hpp"

namespace tabser {

/// A task prompt in the answer_choices/jinja file format. The body carries a
/// single {{serialization}} slot; choice i verbalizes class i.
struct TaskTemplate {
  std::vector<std::string> answer_choices;
  std::string body;      // inference body, training-target clause stripped
  std::string raw_body;  // body exactly as written in the source

  /// Reconstructs the canonical source text (lossless for files written in
  /// the canonical form).
  std::string render_source() const;
};

TaskTemplate parse_template(std::string_view source);
TaskTemplate load_template(const std::string& path);

struct RenderedPrompt {
  std::string text;
  std::vector<std::string> choices;
};

/// Substitutes the serialization into the template body, single pass.
RenderedPrompt render(const TaskTemplate& tpl, const SerializedExample& example);

struct ClassScores {
  std::vector<double> probs;   // normalized across choices
  std::size_t predicted = 0;   // argmax, ties to the lowest index
};

/// Softmax over raw choice log-probabilities.
ClassScores normalize_scores(const std::vector<double>& logprobs);

/// Scores each answer choice under the backend and normalizes across
/// choices. Choices are scored with a single leading space.
ClassScores classify(const RenderedPrompt& prompt, Backend& backend);

}  // namespace tabser
