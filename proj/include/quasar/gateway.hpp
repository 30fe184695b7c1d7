#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "quasar/decimal.hpp"
#include "quasar/io.hpp"
#include "quasar/jsonl.hpp"
#include "quasar/sha256.hpp"

namespace quasar {

struct ModelEndpoint {
  std::string name;              // handle used in configs and reports
  std::string base_url;          // e.g. http://127.0.0.1:8080
  std::string model_id;          // wire-level model name
  Decimal temperature{0};
  int max_tokens = 3500;
  std::string auth_env;          // env var holding the bearer token; empty = no auth
};

struct ChatRequest {
  std::string model_id;
  Decimal temperature;
  int max_tokens = 0;
  std::string prompt;
};

// Content address of a request: hash of the canonical encoding of everything
// that determines the reply. Distinct tuples cannot collide short of a hash
// collision because the encoding is length-delimited JSON.
inline std::string chat_cache_key(const ChatRequest& request) {
  Json key = Json::array(
      {request.model_id, request.temperature.to_string(), request.max_tokens, request.prompt});
  return sha256_hex(key.dump());
}

struct BackendError : std::runtime_error {
  explicit BackendError(const std::string& message, bool retryable_error = false)
      : std::runtime_error(message), retryable(retryable_error) {}
  bool retryable;
};

struct GatewayError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(const ModelEndpoint& endpoint, const ChatRequest& request) = 0;
  virtual std::string kind() const = 0;
  // Actual wire traffic, if this backend produces any.
  virtual long network_calls() const { return 0; }
};

struct ChatExchange {
  std::string prompt;
  std::string response;
  std::string cache_key;
  bool ok = false;
  bool cache_hit = false;
  int attempts = 0;
  long latency_ms = 0;
  std::string error;  // set when !ok
};

struct GatewayStats {
  long requests = 0;
  long cache_hits = 0;
  long backend_calls = 0;  // cache misses that reached the backend (incl. retries)
  long retries = 0;
  long failures = 0;
};

struct GatewayOptions {
  std::filesystem::path cache_dir;  // empty = in-memory cache only
  int max_in_flight = 4;
  int max_retries = 3;              // additional attempts after the first
  int backoff_base_ms = 250;
  int backoff_cap_ms = 8000;
  std::function<void(int)> sleep_ms;  // injectable for tests
};

// Front door for model calls: content-addressed caching, bounded retries
// with exponential backoff, and order-preserving bounded-concurrency
// batching. Single calls throw on failure; batch calls carry per-item
// errors so one bad item cannot poison a run.
class Gateway {
 public:
  Gateway(std::shared_ptr<ChatBackend> backend, GatewayOptions options)
      : backend_(std::move(backend)), options_(std::move(options)) {
    if (!backend_) throw std::invalid_argument("gateway needs a backend");
    if (options_.max_in_flight < 1) throw std::invalid_argument("max_in_flight must be >= 1");
    if (options_.max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
    if (!options_.sleep_ms) {
      options_.sleep_ms = [](int ms) {
        std::this_thread::sleep_for(std::chrono::milliseconds(ms));
      };
    }
    if (!options_.cache_dir.empty()) std::filesystem::create_directories(options_.cache_dir);
  }

  const ChatBackend& backend() const { return *backend_; }

  ChatExchange complete(const ModelEndpoint& endpoint, const std::string& prompt) {
    ChatExchange exchange = attempt(endpoint, prompt);
    if (!exchange.ok) throw GatewayError(exchange.error);
    return exchange;
  }

  std::vector<ChatExchange> complete_batch(const ModelEndpoint& endpoint,
                                           const std::vector<std::string>& prompts) {
    std::vector<ChatExchange> results(prompts.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
      while (true) {
        size_t i = next.fetch_add(1);
        if (i >= prompts.size()) return;
        results[i] = attempt(endpoint, prompts[i]);
      }
    };
    size_t thread_count =
        std::min(static_cast<size_t>(options_.max_in_flight), prompts.size());
    std::vector<std::thread> threads;
    threads.reserve(thread_count);
    for (size_t t = 0; t < thread_count; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    return results;
  }

  GatewayStats stats() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return stats_;
  }

 private:
  ChatExchange attempt(const ModelEndpoint& endpoint, const std::string& prompt) {
    ChatRequest request{endpoint.model_id, endpoint.temperature, endpoint.max_tokens, prompt};
    ChatExchange exchange;
    exchange.prompt = prompt;
    exchange.cache_key = chat_cache_key(request);
    auto started = std::chrono::steady_clock::now();
    {
      std::lock_guard<std::mutex> lock(mutex_);
      ++stats_.requests;
    }
    if (auto cached = cache_lookup(exchange.cache_key)) {
      std::lock_guard<std::mutex> lock(mutex_);
      ++stats_.cache_hits;
      exchange.response = *cached;
      exchange.ok = true;
      exchange.cache_hit = true;
      return exchange;
    }
    for (int attempt_no = 0; attempt_no <= options_.max_retries; ++attempt_no) {
      if (attempt_no > 0) {
        int delay = options_.backoff_base_ms;
        for (int i = 1; i < attempt_no; ++i) delay *= 2;
        options_.sleep_ms(std::min(delay, options_.backoff_cap_ms));
        std::lock_guard<std::mutex> lock(mutex_);
        ++stats_.retries;
      }
      exchange.attempts = attempt_no + 1;
      try {
        {
          std::lock_guard<std::mutex> lock(mutex_);
          ++stats_.backend_calls;
        }
        exchange.response = backend_->complete(endpoint, request);
        exchange.ok = true;
        cache_store(request, exchange.cache_key, exchange.response);
        break;
      } catch (const BackendError& e) {
        exchange.error = e.what();
        if (!e.retryable) break;
      } catch (const std::exception& e) {
        exchange.error = e.what();
        break;
      }
    }
    if (!exchange.ok) {
      std::lock_guard<std::mutex> lock(mutex_);
      ++stats_.failures;
      exchange.error = endpoint.name + ": giving up after " +
                       std::to_string(exchange.attempts) + " attempt(s): " + exchange.error;
    }
    exchange.latency_ms = static_cast<long>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                                std::chrono::steady_clock::now() - started)
                                                .count());
    return exchange;
  }

  std::optional<std::string> cache_lookup(const std::string& key) {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = memory_cache_.find(key);
      if (it != memory_cache_.end()) return it->second;
    }
    if (options_.cache_dir.empty()) return std::nullopt;
    std::filesystem::path path = options_.cache_dir / (key + ".json");
    if (!std::filesystem::exists(path)) return std::nullopt;
    try {
      Json doc = Json::parse(read_text_file(path));
      std::string response = doc.at("response").get<std::string>();
      std::lock_guard<std::mutex> lock(mutex_);
      memory_cache_[key] = response;
      return response;
    } catch (const std::exception&) {
      return std::nullopt;  // unreadable entry behaves like a miss
    }
  }

  void cache_store(const ChatRequest& request, const std::string& key,
                   const std::string& response) {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      memory_cache_[key] = response;
    }
    if (options_.cache_dir.empty()) return;
    Json doc = {
        {"model_id", request.model_id},
        {"temperature", request.temperature.to_string()},
        {"max_tokens", request.max_tokens},
        {"prompt", request.prompt},
        {"response", response},
    };
    atomic_write_file(options_.cache_dir / (key + ".json"), doc.dump(2) + "\n");
  }

  std::shared_ptr<ChatBackend> backend_;
  GatewayOptions options_;
  mutable std::mutex mutex_;
  GatewayStats stats_;
  std::map<std::string, std::string> memory_cache_;
};

}  // namespace quasar
