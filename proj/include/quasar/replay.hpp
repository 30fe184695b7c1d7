#pragma once

#include <filesystem>
#include <string>

#include "quasar/gateway.hpp"

namespace quasar {

// Serves completions from a directory of recorded request/response files
// keyed by the request's cache key. A gateway cache directory from a live
// run can be replayed directly. Misses are errors, never network calls.
class ReplayBackend : public ChatBackend {
 public:
  explicit ReplayBackend(std::filesystem::path fixture_dir)
      : dir_(std::move(fixture_dir)) {
    if (!std::filesystem::is_directory(dir_)) {
      throw std::invalid_argument("replay directory does not exist: " + dir_.string());
    }
  }

  std::string complete(const ModelEndpoint& endpoint, const ChatRequest& request) override {
    (void)endpoint;
    std::string key = chat_cache_key(request);
    std::filesystem::path path = dir_ / (key + ".json");
    if (!std::filesystem::exists(path)) {
      std::string head = request.prompt.substr(0, 80);
      throw BackendError("no recorded reply for request key " + key + " (model " +
                             request.model_id + ", prompt starts: \"" + head + "\")",
                         /*retryable_error=*/false);
    }
    try {
      Json doc = Json::parse(read_text_file(path));
      return doc.at("response").get<std::string>();
    } catch (const std::exception& e) {
      throw BackendError("corrupt replay entry " + key + ": " + e.what(),
                         /*retryable_error=*/false);
    }
  }

  std::string kind() const override { return "replay"; }

 private:
  std::filesystem::path dir_;
};

// Records a reply under the same layout ReplayBackend (and the gateway
// cache) reads, for building fixtures.
inline void replay_store_put(const std::filesystem::path& dir, const ChatRequest& request,
                             const std::string& response) {
  std::filesystem::create_directories(dir);
  Json doc = {
      {"model_id", request.model_id},
      {"temperature", request.temperature.to_string()},
      {"max_tokens", request.max_tokens},
      {"prompt", request.prompt},
      {"response", response},
  };
  atomic_write_file(dir / (chat_cache_key(request) + ".json"), doc.dump(2) + "\n");
}

}  // namespace quasar
