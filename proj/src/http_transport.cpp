// The only translation unit that includes cpp-httplib.
#ifdef TABSER_USE_TLS
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include <cmath>

#include "tabser/backend.hpp"
#include "tabser/errors.hpp"

namespace tabser {

namespace {

struct SplitUrl {
  std::string base;  // scheme://host[:port]
  std::string path;  // /path or /
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw UsageError("endpoint URL must include a scheme: '" + url + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    return {url, "/"};
  }
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpTransport default_http_transport() {
  return [](const std::string& url, const std::string& body,
            const std::vector<std::pair<std::string, std::string>>& headers,
            double timeout_seconds) -> HttpResult {
    const SplitUrl split = split_url(url);
    httplib::Client client(split.base);
    const auto seconds = static_cast<time_t>(timeout_seconds);
    const auto micros = static_cast<time_t>((timeout_seconds - std::floor(timeout_seconds)) * 1e6);
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    client.set_write_timeout(seconds, micros);

    httplib::Headers request_headers;
    std::string content_type = "application/json";
    for (const auto& [key, value] : headers) {
      if (key == "Content-Type") {
        content_type = value;
      } else {
        request_headers.emplace(key, value);
      }
    }
    auto result = client.Post(split.path, request_headers, body, content_type);
    if (!result) {
      throw BackendError(ErrorKind::timeout,
                         "request to " + url + " failed: " + httplib::to_string(result.error()));
    }
    return {result->status, result->body};
  };
}

}  // namespace tabser
