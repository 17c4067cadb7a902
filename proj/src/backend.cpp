#include "tabser/backend.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <semaphore>
#include <sstream>
#include <thread>

#include "tabser/errors.hpp"
#include "tabser/hash.hpp"

namespace tabser {

using json = nlohmann::json;

std::string EchoBackend::generate(const GenerationRequest& request) { return request.prompt; }

std::vector<double> EchoBackend::score_choices(const std::string&,
                                               const std::vector<std::string>& choices) {
  return std::vector<double>(choices.size(), 0.0);
}

std::string TableBackend::generate(const GenerationRequest& request) {
  auto it = replies_.find(sha256_hex(request.prompt));
  return it == replies_.end() ? std::string() : it->second;
}

std::vector<double> TableBackend::score_choices(const std::string&,
                                                const std::vector<std::string>& choices) {
  return std::vector<double>(choices.size(), 0.0);
}

LinearScorerBackend::LinearScorerBackend(std::vector<double> bias,
                                         std::vector<ScorerWeight> weights)
    : bias_(std::move(bias)), weights_(std::move(weights)) {
  for (double b : bias_) {
    if (!std::isfinite(b)) {
      throw DataError(ErrorKind::parse_error, "linear_scorer bias must be finite");
    }
  }
  for (const auto& w : weights_) {
    if (!std::isfinite(w.weight)) {
      throw DataError(ErrorKind::parse_error, "linear_scorer weights must be finite");
    }
  }
}

std::string LinearScorerBackend::generate(const GenerationRequest&) { return ""; }

std::vector<double> LinearScorerBackend::score_choices(const std::string& prompt,
                                                       const std::vector<std::string>& choices) {
  std::vector<double> scores(choices.size(), 0.0);
  for (std::size_t i = 0; i < choices.size() && i < bias_.size(); ++i) {
    scores[i] = bias_[i];
  }
  for (const auto& w : weights_) {
    if (w.class_index >= scores.size()) continue;
    if (prompt.find(w.token) != std::string::npos) {
      scores[w.class_index] += w.weight;
    }
  }
  return scores;
}

HttpTransport default_http_transport();

namespace {

struct CacheEntry {
  json reply;
};

std::string cache_key(const std::string& prompt_hash, const json& params) {
  return prompt_hash + "|" + params.dump();
}

}  // namespace

struct HttpBackend::Impl {
  BackendConfig config;
  HttpTransport transport;
  Sleeper sleeper;
  std::counting_semaphore<> slots;
  std::mutex cache_mutex;
  std::map<std::string, json> cache;
  bool cache_enabled = false;

  Impl(BackendConfig cfg, HttpTransport t, Sleeper s)
      : config(std::move(cfg)),
        transport(std::move(t)),
        sleeper(std::move(s)),
        slots(std::max(1, config.max_concurrency)) {
    if (config.endpoint.empty()) {
      throw UsageError("http backend requires an endpoint");
    }
    if (!sleeper) {
      sleeper = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    }
    if (!config.cache_path.empty()) {
      cache_enabled = true;
      load_cache();
    }
  }

  void load_cache() {
    std::ifstream in(config.cache_path);
    if (!in) return;  // cache file created on first write
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json entry = json::parse(line, nullptr, false);
      if (entry.is_discarded() || !entry.contains("prompt_sha256") || !entry.contains("reply")) {
        continue;
      }
      cache[cache_key(entry["prompt_sha256"].get<std::string>(), entry.value("params", json::object()))] =
          entry["reply"];
    }
  }

  std::optional<json> cache_lookup(const std::string& prompt, const json& params) {
    if (!cache_enabled) return std::nullopt;
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find(cache_key(sha256_hex(prompt), params));
    if (it == cache.end()) return std::nullopt;
    return it->second;
  }

  void cache_store(const std::string& prompt, const json& params, const json& reply) {
    if (!cache_enabled) return;
    const std::string hash = sha256_hex(prompt);
    std::lock_guard<std::mutex> lock(cache_mutex);
    cache[cache_key(hash, params)] = reply;
    std::ofstream out(config.cache_path, std::ios::app);
    if (!out) {
      throw DataError(ErrorKind::io_error, "cannot write cache file '" + config.cache_path + "'");
    }
    json entry{{"prompt_sha256", hash}, {"params", params}, {"reply", reply}};
    out << entry.dump() << "\n";
  }

  std::vector<std::pair<std::string, std::string>> headers() const {
    std::vector<std::pair<std::string, std::string>> h{{"Content-Type", "application/json"}};
    if (!config.auth_token_env.empty()) {
      if (const char* token = std::getenv(config.auth_token_env.c_str())) {
        h.emplace_back("Authorization", std::string("Bearer ") + token);
      }
    }
    return h;
  }

  /// POST with retries on timeout/429/5xx: 1s, 2s, 4s backoff.
  json post(const json& body) {
    const std::string payload = body.dump();
    const auto hdrs = headers();
    int attempt = 0;
    while (true) {
      HttpResult result;
      bool timed_out = false;
      std::string timeout_message;
      try {
        slots.acquire();
        try {
          result = transport(config.endpoint, payload, hdrs, config.timeout_seconds);
        } catch (...) {
          slots.release();
          throw;
        }
        slots.release();
      } catch (const BackendError& err) {
        if (err.kind() != ErrorKind::timeout) throw;
        timed_out = true;
        timeout_message = err.what();
      }

      const bool retryable = timed_out || result.status == 429 || result.status >= 500;
      if (!timed_out && result.status >= 200 && result.status < 300) {
        json parsed = json::parse(result.body, nullptr, false);
        if (parsed.is_discarded()) {
          throw BackendError(ErrorKind::backend_error, "endpoint returned invalid JSON");
        }
        return parsed;
      }
      if (retryable && attempt < config.retries) {
        sleeper(std::chrono::milliseconds(1000L << attempt));
        ++attempt;
        continue;
      }
      if (timed_out) {
        throw BackendError(ErrorKind::timeout, timeout_message);
      }
      if (result.status == 429) {
        throw BackendError(ErrorKind::rate_limited, "rate limited after " +
                                                        std::to_string(attempt) + " retries",
                           429);
      }
      throw BackendError(ErrorKind::http_status,
                         "endpoint returned status " + std::to_string(result.status), result.status);
    }
  }
};

HttpBackend::HttpBackend(BackendConfig config, HttpTransport transport, Sleeper sleeper)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(transport), std::move(sleeper))) {}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::generate(const GenerationRequest& request) {
  if (request.max_tokens < 1) {
    throw UsageError("max_tokens must be >= 1");
  }
  const json params{{"mode", "generate"},
                    {"max_tokens", request.max_tokens},
                    {"temperature", request.temperature}};
  if (auto cached = impl_->cache_lookup(request.prompt, params)) {
    return cached->get<std::string>();
  }
  const json body{{"prompt", request.prompt},
                  {"max_tokens", request.max_tokens},
                  {"temperature", request.temperature}};
  const json response = impl_->post(body);
  std::string text;
  if (response.contains("choices") && !response["choices"].empty()) {
    text = response["choices"][0].value("text", std::string());
  }
  impl_->cache_store(request.prompt, params, text);
  return text;
}

double HttpBackend::choice_logprob_sum(const std::vector<std::string>& tokens,
                                       const std::vector<double>& token_logprobs,
                                       const std::string& choice) {
  if (tokens.size() != token_logprobs.size()) {
    throw BackendError(ErrorKind::missing_logprobs, "token and logprob arrays differ in length");
  }
  std::size_t covered = 0;
  double sum = 0.0;
  for (std::size_t i = tokens.size(); i-- > 0;) {
    if (covered >= choice.size()) break;
    covered += tokens[i].size();
    sum += token_logprobs[i];
  }
  if (covered < choice.size()) {
    throw BackendError(ErrorKind::missing_logprobs, "echoed tokens do not cover the choice text");
  }
  return sum;
}

std::vector<double> HttpBackend::score_choices(const std::string& prompt,
                                               const std::vector<std::string>& choices) {
  std::vector<double> scores;
  scores.reserve(choices.size());
  for (const auto& choice : choices) {
    const std::string full = prompt + choice;
    const json params{{"mode", "score"}, {"choice", choice}};
    if (auto cached = impl_->cache_lookup(full, params)) {
      scores.push_back(cached->get<double>());
      continue;
    }
    const json body{{"prompt", full},
                    {"max_tokens", 0},
                    {"temperature", 0.0},
                    {"logprobs", true},
                    {"echo", true}};
    const json response = impl_->post(body);
    if (!response.contains("choices") || response["choices"].empty() ||
        !response["choices"][0].contains("logprobs")) {
      throw BackendError(ErrorKind::missing_logprobs, "endpoint response lacks logprobs");
    }
    const json& lp = response["choices"][0]["logprobs"];
    if (!lp.contains("tokens") || !lp.contains("token_logprobs")) {
      throw BackendError(ErrorKind::missing_logprobs, "endpoint response lacks token logprobs");
    }
    const auto tokens = lp["tokens"].get<std::vector<std::string>>();
    std::vector<double> logprobs;
    logprobs.reserve(lp["token_logprobs"].size());
    for (const auto& item : lp["token_logprobs"]) {
      logprobs.push_back(item.is_null() ? 0.0 : item.get<double>());
    }
    const double sum = choice_logprob_sum(tokens, logprobs, choice);
    impl_->cache_store(full, params, sum);
    scores.push_back(sum);
  }
  return scores;
}

std::unique_ptr<Backend> make_mock_backend_from_json(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& ex) {
    throw DataError(ErrorKind::parse_error, std::string("invalid mock spec: ") + ex.what());
  }
  const std::string kind = doc.value("kind", std::string("echo"));
  if (kind == "echo") {
    return std::make_unique<EchoBackend>();
  }
  if (kind == "table") {
    std::unordered_map<std::string, std::string> replies;
    if (doc.contains("entries")) {
      for (const auto& [hash, reply] : doc["entries"].items()) {
        replies[hash] = reply.get<std::string>();
      }
    }
    return std::make_unique<TableBackend>(std::move(replies));
  }
  if (kind == "linear_scorer") {
    std::vector<double> bias;
    if (doc.contains("bias")) bias = doc["bias"].get<std::vector<double>>();
    std::vector<ScorerWeight> weights;
    if (doc.contains("weights")) {
      for (const auto& item : doc["weights"]) {
        weights.push_back({item.at("token").get<std::string>(),
                           item.at("class").get<std::size_t>(), item.at("weight").get<double>()});
      }
    }
    return std::make_unique<LinearScorerBackend>(std::move(bias), std::move(weights));
  }
  throw DataError(ErrorKind::parse_error, "unknown mock kind '" + kind + "'");
}

std::unique_ptr<Backend> make_backend(const std::string& spec, const BackendConfig& config) {
  if (spec == "echo" || spec == "mock") {
    return std::make_unique<EchoBackend>();
  }
  if (spec.rfind("mock:", 0) == 0) {
    const std::string path = spec.substr(5);
    std::ifstream in(path);
    if (!in) {
      throw DataError(ErrorKind::io_error, "cannot open mock spec '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return make_mock_backend_from_json(buffer.str());
  }
  if (spec.rfind("http:", 0) == 0 || spec.rfind("https:", 0) == 0 || spec == "http") {
    BackendConfig cfg = config;
    if (spec != "http") cfg.endpoint = spec;
    return std::make_unique<HttpBackend>(cfg);
  }
  throw UsageError("unknown backend spec '" + spec + "'");
}

}  // namespace tabser
