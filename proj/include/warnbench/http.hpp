#pragma once

#include <chrono>
#include <semaphore>
#include <string>

#include <nlohmann/json.hpp>

namespace warnbench {

struct HttpEndpoint {
  // Full URL, e.g. "http://127.0.0.1:8080/v1/chat/completions".
  std::string url;
  // Name of the environment variable holding the bearer token; empty for none.
  std::string api_key_env;
  std::chrono::milliseconds timeout{30000};
  int max_in_flight = 4;
};

// JSON-over-HTTP POST with a bounded number of in-flight requests.
// Thread-safe; a fresh connection is opened per request.
class JsonPoster {
 public:
  explicit JsonPoster(HttpEndpoint endpoint);

  // Throws BackendError: retryable for transport failures, 429 and 5xx.
  nlohmann::json post(const nlohmann::json& body);

  const HttpEndpoint& endpoint() const { return endpoint_; }

 private:
  HttpEndpoint endpoint_;
  std::string origin_;
  std::string path_;
  std::counting_semaphore<> slots_;
};

}  // namespace warnbench
