#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <unistd.h>
#include <future>
#include <json.hpp>

#include "mock_servers.hpp"
#include "regstyle/error.hpp"
#include "regstyle/providers.hpp"

namespace fs = std::filesystem;
using namespace regstyle;
using namespace regstyle::providers;
using regstyle::mock::ChatMode;
using regstyle::mock::ChatOptions;
using regstyle::mock::MockChatServer;
using regstyle::mock::MockSidecar;

namespace {

ChatRequest user(const std::string& text) {
  ChatRequest r;
  r.model = "mock-model";
  r.messages = {{"user", text}};
  return r;
}

ChatConfig config_for(const MockChatServer& server, fs::path cache = {}) {
  ChatConfig c;
  c.base_url = server.base_url();
  c.api_key = "secret";
  c.cache_dir = std::move(cache);
  c.retry.base_delay = std::chrono::milliseconds(5);
  c.timeout = std::chrono::seconds(10);
  return c;
}

fs::path fresh_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("regstyle_providers_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  return dir;
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no Error thrown";
  return ErrorCode::Usage;
}

}  // namespace

TEST(Digest, KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Url, Parse) {
  auto u = Url::parse("https://api.example.org/openai/");
  EXPECT_EQ(u.scheme, "https");
  EXPECT_EQ(u.port, 443);
  EXPECT_EQ(u.prefix, "/openai");
  auto v = Url::parse("http://127.0.0.1:8080");
  EXPECT_EQ(v.host, "127.0.0.1");
  EXPECT_EQ(v.port, 8080);
  EXPECT_EQ(v.origin(), "http://127.0.0.1:8080");
}

TEST(ChatRequestBody, DefaultsOmitSampling) {
  auto body = nlohmann::json::parse(user("hi").body());
  EXPECT_EQ(body["max_tokens"], 1024);
  EXPECT_FALSE(body.contains("temperature"));
  EXPECT_FALSE(body.contains("top_p"));
  EXPECT_EQ(body["messages"].size(), 1u);
}

TEST(CacheKey, SensitiveToEveryField) {
  auto a = user("hi");
  auto b = a;
  EXPECT_EQ(cache_key("e", a), cache_key("e", b));
  b.temperature = 0.7;
  EXPECT_NE(cache_key("e", a), cache_key("e", b));
  EXPECT_NE(cache_key("e", a), cache_key("f", a));
  b = a;
  b.model = "other";
  EXPECT_NE(cache_key("e", a), cache_key("e", b));
}

TEST(ChatClient, EchoAndAuthorization) {
  MockChatServer server;
  ChatClient client(config_for(server));
  EXPECT_EQ(client.chat(user("  hello there  ")), "  hello there  ");
  auto body = nlohmann::json::parse(server.bodies().at(0));
  EXPECT_EQ(body["model"], "mock-model");
}

TEST(ChatClient, MemoryCacheSingleRoundTrip) {
  MockChatServer server;
  ChatClient client(config_for(server));
  EXPECT_EQ(client.chat(user("x")), "x");
  EXPECT_EQ(client.chat(user("x")), "x");
  EXPECT_EQ(server.requests(), 1u);
  EXPECT_EQ(client.stats().cache_hits, 1u);
}

TEST(ChatClient, DiskCachePersistsAcrossClients) {
  MockChatServer server;
  const auto dir = fresh_dir("disk");
  {
    ChatClient client(config_for(server, dir));
    client.chat(user("persist me"));
  }
  ChatClient second(config_for(server, dir));
  EXPECT_EQ(second.chat(user("persist me")), "persist me");
  EXPECT_EQ(server.requests(), 1u);
  fs::remove_all(dir);
}

TEST(ChatClient, CorruptCacheEntryIsAMiss) {
  MockChatServer server;
  const auto dir = fresh_dir("corrupt");
  auto cfg = config_for(server, dir);
  {
    ChatClient client(cfg);
    client.chat(user("y"));
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::ofstream(entry.path()) << "{not json";
  }
  ChatClient client(cfg);
  EXPECT_EQ(client.chat(user("y")), "y");
  EXPECT_EQ(server.requests(), 2u);
  fs::remove_all(dir);
}

TEST(ChatClient, RetriesTransientFailures) {
  ChatOptions opts;
  opts.fail_first = 2;
  MockChatServer server(opts);
  ChatClient client(config_for(server));
  EXPECT_EQ(client.chat(user("retry")), "retry");
  EXPECT_EQ(server.requests(), 3u);
}

TEST(ChatClient, RetriesRateLimit) {
  ChatOptions opts;
  opts.fail_first = 1;
  opts.fail_status = 429;
  MockChatServer server(opts);
  ChatClient client(config_for(server));
  EXPECT_EQ(client.chat(user("slow down")), "slow down");
  EXPECT_EQ(server.requests(), 2u);
}

TEST(ChatClient, GivesUpAfterThreeAttempts) {
  ChatOptions opts;
  opts.always_fail = true;
  MockChatServer server(opts);
  ChatClient client(config_for(server));
  EXPECT_EQ(code_of([&] { client.chat(user("z")); }), ErrorCode::EndpointUnavailable);
  EXPECT_EQ(server.requests(), 3u);
}

TEST(ChatClient, ClientErrorIsNotRetried) {
  ChatOptions opts;
  opts.always_fail = true;
  opts.fail_status = 400;
  MockChatServer server(opts);
  ChatClient client(config_for(server));
  EXPECT_EQ(code_of([&] { client.chat(user("z")); }), ErrorCode::BadRequest);
  EXPECT_EQ(server.requests(), 1u);
}

TEST(ChatClient, EmptyCompletion) {
  ChatOptions opts;
  opts.mode = ChatMode::Empty;
  MockChatServer server(opts);
  ChatClient client(config_for(server));
  EXPECT_EQ(code_of([&] { client.chat(user("z")); }), ErrorCode::EmptyCompletion);
}

TEST(ChatClient, UnreachableEndpoint) {
  int port;
  {
    MockChatServer server;
    port = server.port();
  }
  ChatConfig cfg;
  cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
  cfg.retry.base_delay = std::chrono::milliseconds(1);
  cfg.timeout = std::chrono::seconds(2);
  ChatClient client(cfg);
  EXPECT_EQ(code_of([&] { client.chat(user("z")); }), ErrorCode::EndpointUnavailable);
}

TEST(ChatClient, RequiresUserMessage) {
  MockChatServer server;
  ChatClient client(config_for(server));
  ChatRequest r;
  r.model = "m";
  r.messages = {{"system", "be terse"}};
  EXPECT_EQ(code_of([&] { client.chat(r); }), ErrorCode::InvalidRequest);
  EXPECT_EQ(server.requests(), 0u);
}

TEST(ChatClient, ConcurrentIdenticalRequestsShareOneCall) {
  ChatOptions opts;
  opts.delay = std::chrono::milliseconds(150);
  MockChatServer server(opts);
  ChatClient client(config_for(server));
  std::vector<std::future<std::string>> futures;
  for (int i = 0; i < 8; ++i) futures.push_back(std::async(std::launch::async, [&] { return client.chat(user("same")); }));
  for (auto& f : futures) EXPECT_EQ(f.get(), "same");
  EXPECT_EQ(server.requests(), 1u);
}

TEST(ChatClient, ConcurrencyIsBounded) {
  ChatOptions opts;
  opts.delay = std::chrono::milliseconds(100);
  MockChatServer server(opts);
  auto cfg = config_for(server);
  cfg.concurrency = 2;
  ChatClient client(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::future<std::string>> futures;
  for (int i = 0; i < 4; ++i) {
    futures.push_back(std::async(std::launch::async, [&, i] { return client.chat(user("p" + std::to_string(i))); }));
  }
  for (auto& f : futures) f.get();
  // Four requests through two slots need at least two delay periods.
  EXPECT_GE(std::chrono::steady_clock::now() - t0, std::chrono::milliseconds(195));
  EXPECT_EQ(server.requests(), 4u);
}

TEST(Stylist, RecognizesPrompts) {
  using regstyle::mock::stylist_reply;
  EXPECT_EQ(stylist_reply("Source text: Passage: abc Paraphrase the passage in a simple neutral style."),
            "In plain words: abc");
  EXPECT_EQ(stylist_reply("Here is a text: abc Rewrite the text to be more x, y. Strictly output only the "
                          "rewritten text without any other content."),
            "Rewritten text: Honestly, abc");
  EXPECT_EQ(stylist_reply("unrelated"), "unrelated");
}

TEST(Scorer, KindNames) {
  for (auto k : {ScorerKind::EmbedSbert, ScorerKind::EmbedLuar, ScorerKind::EmbedStylecav, ScorerKind::ScoreMis,
                 ScorerKind::ScoreCola, ScorerKind::ClassifyFormality}) {
    EXPECT_EQ(scorer_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW(scorer_kind_from_string("embed_bogus"), Error);
}

TEST(Scorer, RequestValidation) {
  ScorerRequest r;
  r.kind = ScorerKind::ScoreMis;
  r.texts = {"a"};
  EXPECT_EQ(code_of([&] { r.validate(); }), ErrorCode::InvalidRequest);
  r = {};
  r.kind = ScorerKind::EmbedSbert;
  r.pairs = {{"a", "b"}};
  EXPECT_EQ(code_of([&] { r.validate(); }), ErrorCode::InvalidRequest);
}

TEST(Scorer, HealthEmbedScore) {
  MockSidecar sidecar;
  ScorerClient client({sidecar.base_url(), "", "", 4, std::chrono::seconds(10)});
  auto h = client.health();
  EXPECT_EQ(h.status, "ok");
  EXPECT_TRUE(h.advertises(ScorerKind::EmbedLuar));

  ScorerRequest e{ScorerKind::EmbedSbert, {"the cat sat", "a dog ran"}, {}};
  auto vectors = client.embed(e);
  ASSERT_EQ(vectors.size(), 2u);
  EXPECT_EQ(vectors[0].size(), 64u);
  double norm = 0;
  for (double x : vectors[0]) norm += x * x;
  EXPECT_NEAR(norm, 1.0, 1e-9);

  ScorerRequest m{ScorerKind::ScoreMis, {}, {{"a b", "a b"}, {"a b", "c d"}}};
  auto mis = client.score(m);
  ASSERT_EQ(mis.size(), 2u);
  EXPECT_DOUBLE_EQ(mis[0], 1.0);
  EXPECT_DOUBLE_EQ(mis[1], 0.0);

  ScorerRequest f{ScorerKind::ClassifyFormality, {"I would appreciate your reply.", "lol gonna b late"}, {}};
  auto p = client.score(f);
  EXPECT_GT(p[0], 0.5);
  EXPECT_LT(p[1], 0.5);

  EXPECT_TRUE(client.embed({ScorerKind::EmbedLuar, {}, {}}).empty());
}

TEST(Scorer, Errors) {
  MockSidecar sidecar({{"embed_sbert"}, 256});
  ScorerClient client({sidecar.base_url(), "", "", 4, std::chrono::seconds(10)});
  EXPECT_EQ(code_of([&] { client.embed({ScorerKind::EmbedLuar, {"x"}, {}}); }), ErrorCode::BadRequest);
  sidecar.stop();
  EXPECT_EQ(code_of([&] { client.embed({ScorerKind::EmbedSbert, {"x"}, {}}); }), ErrorCode::ScorerUnavailable);
}
