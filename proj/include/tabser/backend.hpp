#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace tabser {

/// One free-generation request handed to a backend.
struct GenerationRequest {
  std::string prompt;
  std::optional<std::string> guide_prefix;
  int max_tokens = 128;
  double temperature = 0.0;
};

/// A language-model backend: free text generation plus answer-choice scoring.
/// Implementations must be safe for concurrent calls.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string name() const = 0;

  virtual std::string generate(const GenerationRequest& request) = 0;

  /// Log-probability of generating each choice string after `prompt`,
  /// unnormalized across choices.
  virtual std::vector<double> score_choices(const std::string& prompt,
                                            const std::vector<std::string>& choices) = 0;
};

/// Replies with the prompt itself; scores every choice 0.
class EchoBackend final : public Backend {
 public:
  std::string name() const override { return "echo"; }
  std::string generate(const GenerationRequest& request) override;
  std::vector<double> score_choices(const std::string& prompt,
                                    const std::vector<std::string>& choices) override;
};

/// Canned replies keyed by SHA-256 of the prompt; unknown prompts yield "".
class TableBackend final : public Backend {
 public:
  explicit TableBackend(std::unordered_map<std::string, std::string> replies_by_hash)
      : replies_(std::move(replies_by_hash)) {}

  std::string name() const override { return "table"; }
  std::string generate(const GenerationRequest& request) override;
  std::vector<double> score_choices(const std::string& prompt,
                                    const std::vector<std::string>& choices) override;

 private:
  std::unordered_map<std::string, std::string> replies_;
};

struct ScorerWeight {
  std::string token;        // substring matched against the prompt
  std::size_t class_index;  // choice the weight pushes toward
  double weight;
};

/// Deterministic scorer: choice i gets bias[i] plus the sum of weights whose
/// token occurs in the prompt and whose class is i.
class LinearScorerBackend final : public Backend {
 public:
  LinearScorerBackend(std::vector<double> bias, std::vector<ScorerWeight> weights);

  std::string name() const override { return "linear_scorer"; }
  std::string generate(const GenerationRequest& request) override;
  std::vector<double> score_choices(const std::string& prompt,
                                    const std::vector<std::string>& choices) override;

 private:
  std::vector<double> bias_;
  std::vector<ScorerWeight> weights_;
};

struct BackendConfig {
  std::string endpoint;
  std::string auth_token_env;
  int max_concurrency = 4;
  double timeout_seconds = 30.0;
  int retries = 3;
  std::string cache_path;
};

struct HttpResult {
  int status = 0;
  std::string body;
};

/// POST transport, injectable for tests. Throws BackendError(timeout) on
/// connection-level failures.
using HttpTransport = std::function<HttpResult(
    const std::string& url, const std::string& body,
    const std::vector<std::pair<std::string, std::string>>& headers, double timeout_seconds)>;

using Sleeper = std::function<void(std::chrono::milliseconds)>;

HttpTransport default_http_transport();

/// Generic JSON completion client. Requests are
///   {prompt, max_tokens, temperature[, logprobs, echo]}
/// and responses must carry choices[0].text, plus per-token logprobs
/// (choices[0].logprobs.{tokens,token_logprobs}) when scoring. Choice tokens
/// are located as the suffix of the echoed prompt+choice text.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(BackendConfig config, HttpTransport transport = default_http_transport(),
                       Sleeper sleeper = nullptr);
  ~HttpBackend() override;

  std::string name() const override { return "http"; }
  std::string generate(const GenerationRequest& request) override;
  std::vector<double> score_choices(const std::string& prompt,
                                    const std::vector<std::string>& choices) override;

  /// Sum of the trailing token logprobs covering `choice`, given the
  /// response's token/logprob arrays for the echoed prompt+choice.
  static double choice_logprob_sum(const std::vector<std::string>& tokens,
                                   const std::vector<double>& token_logprobs,
                                   const std::string& choice);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Builds a backend from a CLI spec: "echo", "mock:<rules.json>" or
/// "http:<endpoint-url>".
std::unique_ptr<Backend> make_backend(const std::string& spec, const BackendConfig& config = {});

/// Parses a MockRule JSON document ({"kind": "echo" | "table" | "linear_scorer", ...}).
std::unique_ptr<Backend> make_mock_backend_from_json(const std::string& json_text);

}  // namespace tabser
