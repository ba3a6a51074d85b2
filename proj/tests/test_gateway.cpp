#include "radjudge/gateway.hpp"

#include <atomic>
#include <catch2/catch_amalgamated.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "radjudge/parser.hpp"

using namespace radjudge;

namespace {

const ChatMessages kPrompt = {{"user", "judge this report pair"}};

SegmentedReport one_line_candidate() {
  SegmentedReport r;
  r.lines = {"Lungs are clear."};
  return r;
}

/// Validator used throughout: parse the completion as a corrections object.
auto corrections_validator(const SegmentedReport& candidate) {
  return [&candidate](const std::string& raw) { return parse_corrections(raw, candidate).set; };
}

ProviderConfig mock_config() {
  ProviderConfig config;
  config.kind = ProviderKind::Mock;
  config.max_retries = 5;
  return config;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("radjudge-test-" + tag + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("a mock failing k times validates on attempt k+1") {
  const SegmentedReport candidate = one_line_candidate();
  for (int k = 0; k <= 5; ++k) {
    CAPTURE(k);
    auto provider = std::make_unique<MockProvider>();
    std::vector<std::string> completions(static_cast<std::size_t>(k), "this is not json");
    completions.push_back("{}");
    provider->script(kPrompt, completions);

    ChatGateway gateway(mock_config(), std::move(provider));
    const auto result = complete_validated(gateway, kPrompt, corrections_validator(candidate));
    CHECK(result.attempts == k + 1);
    CHECK(result.value.empty());
    CHECK(result.raw_completion == "{}");
  }
}

TEST_CASE("an always-failing mock exhausts after exactly six attempts") {
  const SegmentedReport candidate = one_line_candidate();
  auto provider = std::make_unique<MockProvider>();
  MockProvider* raw_provider = provider.get();
  provider->script(kPrompt, std::vector<std::string>(6, "still not json"));

  ChatGateway gateway(mock_config(), std::move(provider));
  try {
    complete_validated(gateway, kPrompt, corrections_validator(candidate));
    FAIL("expected ExhaustedRetries");
  } catch (const ExhaustedRetries& e) {
    CHECK(e.attempts == 6);
    CHECK(e.last_completion == "still not json");
    CHECK_FALSE(e.last_error.empty());
  }
  CHECK(raw_provider->request_count() == 6);
}

TEST_CASE("mock provider queue semantics and unscripted prompts") {
  MockProvider provider;
  provider.script(kPrompt, {"bad", "good-json"});
  CHECK(provider.complete(kPrompt, "m", {}) == "bad");
  CHECK(provider.complete(kPrompt, "m", {}) == "good-json");
  CHECK_THROWS_AS(provider.complete(kPrompt, "m", {}), UnscriptedPrompt);

  MockProvider empty;
  CHECK_THROWS_AS(empty.complete(kPrompt, "m", {}), UnscriptedPrompt);
  CHECK(provider.requests().size() == 3);
}

TEST_CASE("unscripted prompts are not retried as validation failures") {
  const SegmentedReport candidate = one_line_candidate();
  ChatGateway gateway(mock_config(), std::make_unique<MockProvider>());
  CHECK_THROWS_AS(complete_validated(gateway, kPrompt, corrections_validator(candidate)),
                  UnscriptedPrompt);
}

TEST_CASE("cache makes a second run identical without touching the provider") {
  TempDir tmp("cache");
  const SegmentedReport candidate = one_line_candidate();

  ProviderConfig config = mock_config();
  config.cache_dir = (tmp.path / "cache").string();

  auto provider = std::make_unique<MockProvider>();
  MockProvider* raw_provider = provider.get();
  provider->script(kPrompt, {"not json yet", "{}"});

  ChatGateway gateway(config, std::move(provider));
  const auto first = complete_validated(gateway, kPrompt, corrections_validator(candidate));
  CHECK(first.attempts == 2);
  CHECK(raw_provider->request_count() == 2);

  // Re-running hits the per-attempt cache entries: the failing first attempt
  // is replayed from cache, so the retry path is preserved byte-for-byte.
  const auto second = complete_validated(gateway, kPrompt, corrections_validator(candidate));
  CHECK(second.attempts == 2);
  CHECK(second.raw_completion == first.raw_completion);
  CHECK(raw_provider->request_count() == 2);
  CHECK(gateway.cache_hits() == 2);
}

TEST_CASE("credential bytes never land in cache files") {
  TempDir tmp("secret");
  const std::string sentinel = "s3cr3t-sentinel-0fbd2";
  ::setenv("RADJUDGE_TEST_CREDENTIAL", sentinel.c_str(), 1);

  ProviderConfig config = mock_config();
  config.cache_dir = (tmp.path / "cache").string();
  config.credential_env = "RADJUDGE_TEST_CREDENTIAL";

  auto provider = std::make_unique<MockProvider>();
  provider->script(kPrompt, {"{}"});
  ChatGateway gateway(config, std::move(provider));
  complete_validated(gateway, kPrompt, corrections_validator(one_line_candidate()));

  for (const auto& entry : std::filesystem::recursive_directory_iterator(config.cache_dir)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::string contents((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
    CAPTURE(entry.path().string());
    CHECK(contents.find(sentinel) == std::string::npos);
  }
  ::unsetenv("RADJUDGE_TEST_CREDENTIAL");
}

namespace {

/// Throws TransportError a fixed number of times, then yields a completion.
class FlakyProvider : public ChatProvider {
 public:
  FlakyProvider(int failures, std::string completion)
      : failures_(failures), completion_(std::move(completion)) {}

  std::string complete(const ChatMessages&, const std::string&, const SamplingParams&) override {
    ++calls_;
    if (failures_ > 0) {
      --failures_;
      throw TransportError("synthetic outage");
    }
    return completion_;
  }

  std::string_view kind_name() const override { return "mock"; }
  int calls() const { return calls_; }

 private:
  int failures_;
  std::string completion_;
  int calls_ = 0;
};

class BlockingProvider : public ChatProvider {
 public:
  std::string complete(const ChatMessages&, const std::string&, const SamplingParams&) override {
    const int now = active_.fetch_add(1) + 1;
    int seen = peak_.load();
    while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    active_.fetch_sub(1);
    return "{}";
  }
  std::string_view kind_name() const override { return "mock"; }
  int peak() const { return peak_.load(); }

 private:
  std::atomic<int> active_{0};
  std::atomic<int> peak_{0};
};

}  // namespace

TEST_CASE("transport errors back off on a separate budget") {
  const SegmentedReport candidate = one_line_candidate();

  SECTION("recovers within budget; validation attempts unaffected") {
    ProviderConfig config = mock_config();
    config.transport_retries = 3;
    auto provider = std::make_unique<FlakyProvider>(2, "{}");
    FlakyProvider* raw = provider.get();
    ChatGateway gateway(config, std::move(provider));
    const auto result = complete_validated(gateway, kPrompt, corrections_validator(candidate));
    CHECK(result.attempts == 1);
    CHECK(raw->calls() == 3);
  }

  SECTION("budget exhausted surfaces TransportError") {
    ProviderConfig config = mock_config();
    config.transport_retries = 2;
    auto provider = std::make_unique<FlakyProvider>(100, "{}");
    FlakyProvider* raw = provider.get();
    ChatGateway gateway(config, std::move(provider));
    CHECK_THROWS_AS(complete_validated(gateway, kPrompt, corrections_validator(candidate)),
                    TransportError);
    CHECK(raw->calls() == 3);  // initial + 2 transport retries
  }
}

TEST_CASE("gateway caps in-flight requests") {
  ProviderConfig config = mock_config();
  config.max_in_flight = 2;
  auto provider = std::make_unique<BlockingProvider>();
  BlockingProvider* raw = provider.get();
  ChatGateway gateway(config, std::move(provider));

  std::vector<std::thread> workers;
  for (int i = 0; i < 6; ++i) {
    workers.emplace_back([&gateway, i] {
      gateway.complete_raw({{"user", "prompt " + std::to_string(i)}}, 0);
    });
  }
  for (auto& w : workers) w.join();
  CHECK(raw->peak() <= 2);
  CHECK(raw->peak() >= 1);
}

TEST_CASE("http provider speaks the chat-completion wire format") {
  httplib::Server server;
  std::string seen_auth;
  std::string seen_body;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    seen_body = req.body;
    res.set_content(R"({"choices":[{"message":{"content":"{}"}}]})", "application/json");
  });
  server.Post("/broken", [](const httplib::Request&, httplib::Response& res) {
    res.status = 500;
    res.set_content("boom", "text/plain");
  });
  server.Post("/garbage", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("not json", "application/json");
  });

  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server_thread([&server] { server.listen_after_bind(); });
  server.wait_until_ready();

  const std::string base = "http://127.0.0.1:" + std::to_string(port);
  ::setenv("RADJUDGE_HTTP_TEST_KEY", "test-key-123", 1);

  SECTION("request and response round trip") {
    HttpProvider provider(base + "/v1/chat/completions", "RADJUDGE_HTTP_TEST_KEY");
    SamplingParams sampling;
    sampling.temperature = 0.25;
    const std::string completion =
        provider.complete({{"system", "sys"}, {"user", "hello"}}, "judge-1", sampling);
    CHECK(completion == "{}");
    CHECK(seen_auth == "Bearer test-key-123");

    const auto body = nlohmann::json::parse(seen_body);
    CHECK(body["model"] == "judge-1");
    CHECK(body["temperature"] == 0.25);
    REQUIRE(body["messages"].size() == 2);
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][1]["content"] == "hello");
  }

  SECTION("HTTP errors and malformed bodies are transport errors") {
    HttpProvider broken(base + "/broken", "");
    CHECK_THROWS_AS(broken.complete(kPrompt, "judge-1", {}), TransportError);
    HttpProvider garbage(base + "/garbage", "");
    CHECK_THROWS_AS(garbage.complete(kPrompt, "judge-1", {}), TransportError);
  }

  SECTION("connection refusal is a transport error") {
    HttpProvider unreachable("http://127.0.0.1:1/v1/chat/completions", "");
    CHECK_THROWS_AS(unreachable.complete(kPrompt, "judge-1", {}), TransportError);
  }

  ::unsetenv("RADJUDGE_HTTP_TEST_KEY");
  server.stop();
  server_thread.join();
}

TEST_CASE("mock script files load and replay") {
  TempDir tmp("script");
  const std::string fingerprint = prompt_fingerprint(kPrompt);
  nlohmann::json script;
  script[fingerprint] = {"first", "second"};
  const auto path = tmp.path / "script.json";
  std::ofstream(path) << script.dump();

  auto provider = MockProvider::from_file(path);
  CHECK(provider->complete(kPrompt, "m", {}) == "first");
  CHECK(provider->complete(kPrompt, "m", {}) == "second");
}
