#pragma once

// In-process HTTP stand-ins for the chat endpoint and the scoring sidecar.
// Both bind 127.0.0.1 on an ephemeral port and serve from a background thread.

#include <atomic>
#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace regstyle::mock {

enum class ChatMode {
  Echo,      // reply with the last user message
  Scripted,  // reply with script entries in order, then echo
  Stylist,   // recognize each pipeline prompt and answer plausibly
  Empty,     // reply with an empty completion
};

struct ChatOptions {
  ChatMode mode = ChatMode::Echo;
  std::vector<std::string> script;
  int fail_first = 0;       // first N requests answered with fail_status
  int fail_status = 500;
  bool always_fail = false;
  std::chrono::milliseconds delay{0};
};

/// Deterministic answer to a pipeline prompt, independent of request order.
std::string stylist_reply(const std::string& prompt);

class MockChatServer {
 public:
  explicit MockChatServer(ChatOptions options = {});
  ~MockChatServer();
  MockChatServer(const MockChatServer&) = delete;
  MockChatServer& operator=(const MockChatServer&) = delete;

  int port() const { return port_; }
  std::string base_url() const;
  std::size_t requests() const { return requests_.load(); }
  /// Last user message of every request received, in arrival order.
  std::vector<std::string> prompts() const;
  /// Raw request bodies, in arrival order.
  std::vector<std::string> bodies() const;
  void set_options(ChatOptions options);
  void stop();

 private:
  std::string respond(const std::string& body, int& status);

  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mu_;
  ChatOptions options_;
  std::size_t script_pos_ = 0;
  std::vector<std::string> prompts_;
  std::vector<std::string> bodies_;
  std::atomic<std::size_t> requests_{0};
};

struct SidecarOptions {
  std::vector<std::string> kinds = {"embed_sbert", "embed_luar",  "embed_stylecav",
                                    "score_mis",   "score_cola", "classify_formality"};
  std::size_t max_batch = 256;
};

/// Embedding dimension the mock serves for a kind.
std::size_t mock_embedding_dim(const std::string& kind);

/// Sidecar stand-in: hashed bag-of-words embeddings (unit norm), Jaccard
/// overlap for MIS, and surface heuristics for COLA and formality.
class MockSidecar {
 public:
  explicit MockSidecar(SidecarOptions options = {});
  ~MockSidecar();
  MockSidecar(const MockSidecar&) = delete;
  MockSidecar& operator=(const MockSidecar&) = delete;

  int port() const { return port_; }
  std::string base_url() const;
  std::size_t requests() const { return requests_.load(); }
  void stop();

 private:
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  SidecarOptions options_;
  std::atomic<std::size_t> requests_{0};
};

// Exposed for tests of the mock itself.
std::vector<double> mock_embed(const std::string& text, std::size_t dim);
double mock_mis(const std::string& a, const std::string& b);
double mock_formality(const std::string& text);
double mock_cola(const std::string& text);

}  // namespace regstyle::mock
