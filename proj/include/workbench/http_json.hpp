#pragma once

#include <chrono>
#include <string>

#include <json.hpp>

namespace workbench {

struct HttpEndpoint {
  std::string url;        // e.g. http://127.0.0.1:7860/sdapi/v1/txt2img
  std::string token_env;  // name of the env var holding a bearer token; empty for none
  std::chrono::milliseconds timeout{60000};
  int retries = 2;
  std::chrono::milliseconds backoff{250};  // doubled after every failed attempt
};

struct ParsedUrl {
  std::string scheme_host_port;
  std::string path;
};

ParsedUrl parse_url(const std::string& url);

// One-shot JSON POST. Retries connection failures and non-2xx replies up to
// endpoint.retries times; throws ProviderError carrying the attempt count.
nlohmann::json post_json(const HttpEndpoint& endpoint, const nlohmann::json& body);

}  // namespace workbench
