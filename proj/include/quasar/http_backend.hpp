#pragma once

#include <atomic>
#include <cstdlib>
#include <string>

#include <httplib.h>

#include "quasar/gateway.hpp"

namespace quasar {

// Live backend speaking the OpenAI-compatible chat completions protocol:
// POST {base_url}/v1/chat/completions with the whole rendered prompt as a
// single user message. Auth tokens come from the environment variable the
// endpoint names, never from config files.
class HttpBackend : public ChatBackend {
 public:
  explicit HttpBackend(int timeout_seconds = 180) : timeout_seconds_(timeout_seconds) {}

  std::string complete(const ModelEndpoint& endpoint, const ChatRequest& request) override {
    auto [host, path_prefix] = split_url(endpoint.base_url);
    httplib::Client client(host);
    client.set_connection_timeout(timeout_seconds_, 0);
    client.set_read_timeout(timeout_seconds_, 0);
    client.set_write_timeout(timeout_seconds_, 0);

    httplib::Headers headers;
    if (!endpoint.auth_env.empty()) {
      const char* token = std::getenv(endpoint.auth_env.c_str());
      if (!token || !*token) {
        throw BackendError("auth variable " + endpoint.auth_env + " is not set",
                           /*retryable_error=*/false);
      }
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }

    Json body = {
        {"model", request.model_id},
        {"messages", Json::array({Json{{"role", "user"}, {"content", request.prompt}}})},
        {"temperature", request.temperature.to_double()},
        {"max_tokens", request.max_tokens},
    };

    network_calls_.fetch_add(1);
    auto result = client.Post(path_prefix + "/v1/chat/completions", headers, body.dump(),
                              "application/json");
    if (!result) {
      throw BackendError("network error: " + httplib::to_string(result.error()),
                         /*retryable_error=*/true);
    }
    int status = result->status;
    if (status == 401 || status == 403) {
      throw BackendError("authentication rejected (HTTP " + std::to_string(status) + ")",
                         /*retryable_error=*/false);
    }
    if (status == 408 || status == 429 || status >= 500) {
      throw BackendError("HTTP " + std::to_string(status) + ": " + result->body.substr(0, 200),
                         /*retryable_error=*/true);
    }
    if (status != 200) {
      throw BackendError("HTTP " + std::to_string(status) + ": " + result->body.substr(0, 200),
                         /*retryable_error=*/false);
    }
    try {
      Json doc = Json::parse(result->body);
      return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const std::exception& e) {
      throw BackendError(std::string("malformed completion response: ") + e.what(),
                         /*retryable_error=*/false);
    }
  }

  std::string kind() const override { return "live"; }

  long network_calls() const override { return network_calls_.load(); }

 private:
  // httplib's client wants scheme://host[:port]; any path component of the
  // base URL becomes a prefix of the request path.
  static std::pair<std::string, std::string> split_url(const std::string& base_url) {
    std::string url = base_url;
    while (!url.empty() && url.back() == '/') url.pop_back();
    size_t scheme = url.find("://");
    size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
    size_t slash = url.find('/', host_start);
    if (slash == std::string::npos) return {url, ""};
    return {url.substr(0, slash), url.substr(slash)};
  }

  int timeout_seconds_;
  std::atomic<long> network_calls_{0};
};

}  // namespace quasar
