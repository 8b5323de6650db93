#include "workbench/http_json.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "workbench/errors.hpp"

namespace workbench {

ParsedUrl parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw InputError("URL needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

nlohmann::json post_json(const HttpEndpoint& endpoint, const nlohmann::json& body) {
  const ParsedUrl target = parse_url(endpoint.url);
  httplib::Headers headers;
  if (!endpoint.token_env.empty()) {
    if (const char* token = std::getenv(endpoint.token_env.c_str()); token && *token) {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
  }
  const std::string payload = body.dump();
  const int max_attempts = endpoint.retries + 1;
  auto delay = endpoint.backoff;
  std::string last_error;
  bool all_unreachable = true;

  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    httplib::Client client(target.scheme_host_port);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    auto res = client.Post(target.path, headers, payload, "application/json");
    if (!res) {
      last_error = "POST " + endpoint.url + " failed: " + httplib::to_string(res.error());
    } else if (res->status < 200 || res->status >= 300) {
      all_unreachable = false;
      last_error = "POST " + endpoint.url + " returned HTTP " + std::to_string(res->status);
    } else {
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception& e) {
        all_unreachable = false;
        last_error = "POST " + endpoint.url + " returned invalid JSON: " + e.what();
      }
    }
    if (attempt < max_attempts) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
  }
  throw ProviderError(last_error, max_attempts, all_unreachable);
}

}  // namespace workbench
