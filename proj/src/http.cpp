#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "warnbench/http.hpp"

#include <cstdlib>

#include <httplib.h>

#include "warnbench/error.hpp"

namespace warnbench {

namespace {

struct SplitUrl {
  std::string origin;
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw PreconditionError("endpoint url must include a scheme: " + url);
  }
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<>& s) : s_(s) { s_.acquire(); }
  ~SlotGuard() { s_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<>& s_;
};

}  // namespace

JsonPoster::JsonPoster(HttpEndpoint endpoint)
    : endpoint_(std::move(endpoint)),
      slots_(endpoint_.max_in_flight > 0 ? endpoint_.max_in_flight : 1) {
  auto parts = split_url(endpoint_.url);
  origin_ = std::move(parts.origin);
  path_ = std::move(parts.path);
}

nlohmann::json JsonPoster::post(const nlohmann::json& body) {
  SlotGuard guard(slots_);

  httplib::Client client(origin_);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint_.timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
      endpoint_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers;
  if (!endpoint_.api_key_env.empty()) {
    const char* key = std::getenv(endpoint_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw BackendError("environment variable " + endpoint_.api_key_env +
                             " is not set",
                         false);
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) {
    throw BackendError(endpoint_.url + ": " + httplib::to_string(res.error()),
                       true);
  }
  if (res->status < 200 || res->status >= 300) {
    bool retryable = res->status == 429 || res->status >= 500;
    throw BackendError(endpoint_.url + ": HTTP " + std::to_string(res->status) +
                           ": " + res->body.substr(0, 200),
                       retryable);
  }
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error& e) {
    throw BackendError(endpoint_.url + ": response is not JSON: " + e.what(),
                       false);
  }
}

}  // namespace warnbench
