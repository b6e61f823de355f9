#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <utility>
#include <vector>

namespace regstyle::providers {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

/// scheme://host[:port][/prefix]
struct Url {
  std::string scheme = "http";
  std::string host;
  int port = 80;
  std::string prefix;  // no trailing slash

  static Url parse(std::string_view url);
  std::string origin() const;  // scheme://host:port
};

// ---------------------------------------------------------------------------
// Chat completions

struct Message {
  std::string role;  // system, user or assistant
  std::string content;

  bool operator==(const Message&) const = default;
};

struct ChatRequest {
  std::string model;
  std::vector<Message> messages;
  std::size_t max_new_tokens = 1024;
  // Absent means the server's defaults apply.
  std::optional<double> temperature;
  std::optional<double> top_p;

  /// Request body for POST /v1/chat/completions.
  std::string body() const;
};

/// Digest of endpoint, model, messages and decoding parameters.
std::string cache_key(std::string_view endpoint, const ChatRequest& req);

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds base_delay{1000};  // doubled after each failure
};

struct ChatConfig {
  std::string base_url;
  std::string api_key_header = "Authorization";
  std::string api_key;                // sent as "Bearer <key>" for Authorization
  std::filesystem::path cache_dir;    // empty disables the disk cache
  std::size_t concurrency = 4;
  RetryPolicy retry;
  std::chrono::seconds timeout{300};
};

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual std::string chat(const ChatRequest& req) = 0;
};

struct ChatStats {
  std::size_t network_requests = 0;  // HTTP attempts, retries included
  std::size_t cache_hits = 0;
};

/// OpenAI-compatible chat client with an on-disk response cache.
/// Thread-safe; concurrent identical requests share one network round trip.
class ChatClient : public ChatProvider {
 public:
  explicit ChatClient(ChatConfig config);
  ~ChatClient() override;

  std::string chat(const ChatRequest& req) override;
  ChatStats stats() const;
  const ChatConfig& config() const { return config_; }

 private:
  std::optional<std::string> cache_lookup(const std::string& key);
  void cache_store(const std::string& key, const std::string& content);
  std::string fetch(const ChatRequest& req);

  ChatConfig config_;
  Url url_;
  std::counting_semaphore<1024> slots_;
  std::mutex mu_;
  std::map<std::string, std::string> memory_;
  std::map<std::string, std::shared_future<std::string>> in_flight_;
  std::atomic<std::size_t> network_requests_{0};
  std::atomic<std::size_t> cache_hits_{0};
};

// ---------------------------------------------------------------------------
// Scoring sidecar

enum class ScorerKind { EmbedSbert, EmbedLuar, EmbedStylecav, ScoreMis, ScoreCola, ClassifyFormality };

std::string_view to_string(ScorerKind kind);
ScorerKind scorer_kind_from_string(std::string_view name);
bool is_embed(ScorerKind kind);

struct ScorerRequest {
  ScorerKind kind = ScorerKind::EmbedSbert;
  std::vector<std::string> texts;
  std::vector<std::pair<std::string, std::string>> pairs;

  /// Throws InvalidRequest unless pairs are used exactly for score_mis.
  void validate() const;
};

struct SidecarHealth {
  std::string status;
  std::vector<std::string> kinds;

  bool advertises(ScorerKind kind) const;
};

struct ScorerConfig {
  std::string base_url;
  std::string secret_header;  // optional shared-secret header name
  std::string secret;
  std::size_t concurrency = 4;
  std::chrono::seconds timeout{300};
};

/// Client for GET /health, POST /embed and POST /score. Network failures
/// surface as ScorerUnavailable, 4xx replies as BadRequest.
class ScorerClient {
 public:
  explicit ScorerClient(ScorerConfig config);

  SidecarHealth health();
  std::vector<std::vector<double>> embed(const ScorerRequest& req);
  std::vector<double> score(const ScorerRequest& req);

 private:
  std::string post(const std::string& path, const std::string& body);

  ScorerConfig config_;
  Url url_;
  std::counting_semaphore<1024> slots_;
};

}  // namespace regstyle::providers
