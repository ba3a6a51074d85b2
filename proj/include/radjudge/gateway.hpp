#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <type_traits>
#include <vector>

#include <unistd.h>

#include <httplib.h>
#include <json.hpp>

#include "radjudge/errors.hpp"
#include "radjudge/hash.hpp"
#include "radjudge/prompting.hpp"
#include "radjudge/rng.hpp"

namespace radjudge {

/// Network, auth, or provider-protocol failure. Retried with exponential
/// backoff on a budget separate from validation retries.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// The mock provider has no scripted completion left for a prompt.
class UnscriptedPrompt : public Error {
 public:
  using Error::Error;
};

/// Every validation attempt failed. Carries the last raw completion and the
/// last parse error for diagnostics.
class ExhaustedRetries : public Error {
 public:
  ExhaustedRetries(int attempts, std::string last_completion, std::string last_error)
      : Error("no valid completion after " + std::to_string(attempts) +
              " attempts; last error: " + last_error),
        attempts(attempts),
        last_completion(std::move(last_completion)),
        last_error(std::move(last_error)) {}

  int attempts;
  std::string last_completion;
  std::string last_error;
};

struct SamplingParams {
  double temperature = 0.0;
  int max_tokens = 0;  // 0 leaves the provider default in place
};

enum class ProviderKind { Mock, Http };

inline std::string_view provider_kind_name(ProviderKind k) {
  return k == ProviderKind::Mock ? "mock" : "http";
}

struct ProviderConfig {
  ProviderKind kind = ProviderKind::Mock;
  std::string endpoint;        // chat-completion URL for the http provider
  std::string model = "judge";
  std::string credential_env;  // environment variable NAME; never the secret itself
  int max_retries = 5;         // validation retries after the initial attempt
  int transport_retries = 3;   // extra attempts for transport failures
  int max_in_flight = 4;
  SamplingParams sampling;
  std::string cache_dir;     // empty disables the completion cache
  std::string script_path;   // mock provider script file
};

/// Stable content fingerprint of a chat prompt; mock scripts are keyed by it.
inline std::string prompt_fingerprint(const ChatMessages& messages) {
  std::string material;
  for (const ChatMessage& m : messages) {
    material += m.role;
    material += '\x1f';
    material += m.content;
    material += '\x1e';
  }
  return sha256_hex(material);
}

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual std::string complete(const ChatMessages& messages, const std::string& model,
                               const SamplingParams& sampling) = 0;
  virtual std::string_view kind_name() const = 0;
};

/// Deterministic scripted provider. Completions are queued per prompt
/// fingerprint and handed out in order; every request is recorded.
class MockProvider : public ChatProvider {
 public:
  MockProvider() = default;

  void script(const ChatMessages& prompt, std::vector<std::string> completions) {
    script_key(prompt_fingerprint(prompt), std::move(completions));
  }

  void script_key(const std::string& fingerprint, std::vector<std::string> completions) {
    std::lock_guard lock(mutex_);
    auto& queue = script_[fingerprint];
    for (auto& c : completions) queue.push_back(std::move(c));
  }

  static std::unique_ptr<MockProvider> from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read mock script: " + path.string());
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded() || !doc.is_object()) {
      throw Error("mock script is not a JSON object: " + path.string());
    }
    auto provider = std::make_unique<MockProvider>();
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      if (!it.value().is_array()) throw Error("mock script entries must be arrays of strings");
      std::vector<std::string> completions;
      for (const auto& item : it.value()) completions.push_back(item.get<std::string>());
      provider->script_key(it.key(), std::move(completions));
    }
    return provider;
  }

  std::string complete(const ChatMessages& messages, const std::string&,
                       const SamplingParams&) override {
    const std::string fingerprint = prompt_fingerprint(messages);
    std::lock_guard lock(mutex_);
    requests_.push_back(fingerprint);
    auto it = script_.find(fingerprint);
    if (it == script_.end() || it->second.empty()) {
      throw UnscriptedPrompt("no scripted completion for prompt " + fingerprint.substr(0, 12));
    }
    std::string completion = std::move(it->second.front());
    it->second.pop_front();
    return completion;
  }

  std::string_view kind_name() const override { return "mock"; }

  std::vector<std::string> requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
  }

  std::size_t request_count() const {
    std::lock_guard lock(mutex_);
    return requests_.size();
  }

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::deque<std::string>> script_;
  std::vector<std::string> requests_;
};

namespace detail {

/// Splits "http://host:port/path" into base URL and path.
inline std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) throw Error("endpoint must include a scheme: " + endpoint);
  const auto path_start = endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {endpoint, "/"};
  return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

}  // namespace detail

/// Live chat-completion provider speaking the common OpenAI-style wire
/// format. The credential is read from the configured environment variable at
/// request time and never stored.
class HttpProvider : public ChatProvider {
 public:
  HttpProvider(std::string endpoint, std::string credential_env)
      : endpoint_(std::move(endpoint)), credential_env_(std::move(credential_env)) {}

  std::string complete(const ChatMessages& messages, const std::string& model,
                       const SamplingParams& sampling) override {
    auto [base, path] = detail::split_endpoint(endpoint_);
    httplib::Client client(base);
    client.set_read_timeout(120, 0);
    client.set_connection_timeout(10, 0);

    nlohmann::json body;
    body["model"] = model;
    auto msgs = nlohmann::json::array();
    for (const ChatMessage& m : messages) {
      msgs.push_back({{"role", m.role}, {"content", m.content}});
    }
    body["messages"] = std::move(msgs);
    body["temperature"] = sampling.temperature;
    if (sampling.max_tokens > 0) body["max_tokens"] = sampling.max_tokens;

    httplib::Headers headers;
    if (!credential_env_.empty()) {
      if (const char* secret = std::getenv(credential_env_.c_str())) {
        headers.emplace("Authorization", std::string("Bearer ") + secret);
      }
    }

    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res) {
      throw TransportError("no response from " + endpoint_ + ": " +
                           httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw TransportError("HTTP " + std::to_string(res->status) + " from " + endpoint_);
    }
    nlohmann::json doc = nlohmann::json::parse(res->body, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded() || !doc.contains("choices") || !doc["choices"].is_array() ||
        doc["choices"].empty() || !doc["choices"][0].contains("message") ||
        !doc["choices"][0]["message"].contains("content") ||
        !doc["choices"][0]["message"]["content"].is_string()) {
      throw TransportError("malformed completion response from " + endpoint_);
    }
    return doc["choices"][0]["message"]["content"].get<std::string>();
  }

  std::string_view kind_name() const override { return "http"; }

 private:
  std::string endpoint_;
  std::string credential_env_;
};

namespace detail {

class Semaphore {
 public:
  explicit Semaphore(int count) : count_(count > 0 ? count : 1) {}

  void acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return count_ > 0; });
    --count_;
  }

  void release() {
    {
      std::lock_guard lock(mutex_);
      ++count_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  int count_;
};

class SemaphoreGuard {
 public:
  explicit SemaphoreGuard(Semaphore& s) : sem_(s) { sem_.acquire(); }
  ~SemaphoreGuard() { sem_.release(); }
  SemaphoreGuard(const SemaphoreGuard&) = delete;
  SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;

 private:
  Semaphore& sem_;
};

}  // namespace detail

/// Content-addressed completion cache: one file per entry, named by the hex
/// hash of the key. Writes go through a temp file and rename so concurrent
/// writers never leave a torn entry.
class CompletionCache {
 public:
  explicit CompletionCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  std::optional<std::string> lookup(const std::string& key_hash) const {
    const auto path = dir_ / key_hash;
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
  }

  void store(const std::string& key_hash, std::string_view completion) const {
    static std::atomic<std::uint64_t> counter{0};
    const auto final_path = dir_ / key_hash;
    const auto tmp_path = dir_ / (key_hash + ".tmp." + std::to_string(::getpid()) + "." +
                                  std::to_string(counter.fetch_add(1)));
    {
      std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
      if (!out) throw Error("cannot write cache entry: " + tmp_path.string());
      out.write(completion.data(), static_cast<std::streamsize>(completion.size()));
    }
    std::filesystem::rename(tmp_path, final_path);
  }

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

/// Provider-agnostic completion access with caching, in-flight limiting, and
/// transport backoff. Shareable across concurrent evaluation tasks.
class ChatGateway {
 public:
  ChatGateway(ProviderConfig config, std::unique_ptr<ChatProvider> provider)
      : config_(std::move(config)),
        provider_(std::move(provider)),
        semaphore_(config_.max_in_flight) {
    if (!config_.cache_dir.empty()) cache_.emplace(config_.cache_dir);
  }

  static ChatGateway from_config(const ProviderConfig& config) {
    std::unique_ptr<ChatProvider> provider;
    if (config.kind == ProviderKind::Mock) {
      provider = config.script_path.empty() ? std::make_unique<MockProvider>()
                                            : MockProvider::from_file(config.script_path);
    } else {
      provider = std::make_unique<HttpProvider>(config.endpoint, config.credential_env);
    }
    return ChatGateway(config, std::move(provider));
  }

  const ProviderConfig& config() const { return config_; }
  ChatProvider& provider() { return *provider_; }

  /// One raw completion for the given attempt index. Distinct attempt indexes
  /// cache independently, so retry diversity survives memoization.
  std::string complete_raw(const ChatMessages& messages, int attempt_index) {
    const std::string key = cache_key(messages, attempt_index);
    if (cache_) {
      if (auto hit = cache_->lookup(key)) {
        cache_hits_.fetch_add(1, std::memory_order_relaxed);
        return *hit;
      }
    }
    std::string completion = call_with_backoff(messages);
    if (cache_) cache_->store(key, completion);
    return completion;
  }

  std::size_t cache_hits() const { return cache_hits_.load(std::memory_order_relaxed); }
  std::size_t provider_calls() const { return provider_calls_.load(std::memory_order_relaxed); }

 private:
  std::string cache_key(const ChatMessages& messages, int attempt_index) const {
    std::string material = "v1";
    material += '\x1f';
    material += provider_kind_name(config_.kind);
    material += '\x1f';
    material += config_.model;
    material += '\x1f';
    char temp[64];
    std::snprintf(temp, sizeof temp, "%.17g", config_.sampling.temperature);
    material += temp;
    material += '\x1f';
    material += std::to_string(config_.sampling.max_tokens);
    material += '\x1f';
    material += std::to_string(attempt_index);
    material += '\x1f';
    for (const ChatMessage& m : messages) {
      material += m.role;
      material += '\x1f';
      material += m.content;
      material += '\x1e';
    }
    return sha256_hex(material);
  }

  std::string call_with_backoff(const ChatMessages& messages) {
    detail::SemaphoreGuard guard(semaphore_);
    std::chrono::milliseconds backoff(25);
    for (int attempt = 0;; ++attempt) {
      try {
        provider_calls_.fetch_add(1, std::memory_order_relaxed);
        return provider_->complete(messages, config_.model, config_.sampling);
      } catch (const TransportError&) {
        if (attempt >= config_.transport_retries) throw;
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
      }
    }
  }

  ProviderConfig config_;
  std::unique_ptr<ChatProvider> provider_;
  detail::Semaphore semaphore_;
  std::optional<CompletionCache> cache_;
  std::atomic<std::size_t> cache_hits_{0};
  std::atomic<std::size_t> provider_calls_{0};
};

template <typename T>
struct Validated {
  T value;
  int attempts = 1;
  std::string raw_completion;
};

/// Requests completions until the validator accepts one: a first attempt plus
/// up to max_retries re-attempts. Validator failures must be ValidationError
/// subclasses; anything else propagates immediately.
template <typename Validator>
auto complete_validated(ChatGateway& gateway, const ChatMessages& prompt, Validator&& validate)
    -> Validated<std::decay_t<decltype(validate(std::string{}))>> {
  const int max_attempts = 1 + std::max(0, gateway.config().max_retries);
  std::string last_raw;
  std::string last_error;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::string raw = gateway.complete_raw(prompt, attempt);
    try {
      auto value = validate(raw);
      return {std::move(value), attempt + 1, std::move(raw)};
    } catch (const ValidationError& e) {
      last_raw = std::move(raw);
      last_error = e.what();
    }
  }
  throw ExhaustedRetries(max_attempts, std::move(last_raw), std::move(last_error));
}

}  // namespace radjudge
