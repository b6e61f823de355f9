#include "mock_servers.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <json.hpp>
#include <set>
#include <sstream>

namespace regstyle::mock {

using nlohmann::json;

namespace {

bool starts_with(const std::string& s, std::string_view p) { return s.rfind(p, 0) == 0; }

// Text between a leading prefix and the last occurrence of marker.
std::string between(const std::string& s, std::string_view prefix, std::string_view marker) {
  const auto end = s.rfind(marker);
  if (end == std::string::npos || end < prefix.size()) return s.substr(std::min(prefix.size(), s.size()));
  return s.substr(prefix.size(), end - prefix.size());
}

std::vector<std::string> words(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '\'') {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void start(httplib::Server& server, std::thread& thread, int& port) {
  port = server.bind_to_any_port("127.0.0.1");
  if (port <= 0) throw std::runtime_error("mock server could not bind a port");
  thread = std::thread([&server] { server.listen_after_bind(); });
  server.wait_until_ready();
}

}  // namespace

std::string stylist_reply(const std::string& prompt) {
  if (starts_with(prompt, "Source text: Passage: ")) {
    return "In plain words: " + between(prompt, "Source text: Passage: ", " Paraphrase the passage");
  }
  if (starts_with(prompt, "Passage: ") && prompt.find("List some adjectives") != std::string::npos) {
    return "sarcastic, informal, humorous";
  }
  if (starts_with(prompt, "Passage: ")) {
    return "The passage is highly involved: first and second person pronouns, contractions and hedges "
           "dominate, with few nominalizations.";
  }
  if (starts_with(prompt, "Style analysis: ")) return "Informal, conversational , COLLOQUIAL";
  if (starts_with(prompt, "Style comparisons: ")) return "1. Informal\n2. Casual\n3. Direct";
  if (starts_with(prompt, "Source text: ")) {
    return "Compared with the source, the target text uses more contractions and personal pronouns.";
  }
  if (starts_with(prompt, "Here is a text: ")) {
    constexpr std::string_view styll = " Here is a rewrite of the text that is more ";
    if (prompt.find(styll) != std::string::npos) {
      return "\"Honestly, " + between(prompt, "Here is a text: ", styll) + "\"";
    }
    return "Rewritten text: Honestly, " + between(prompt, "Here is a text: ", " Rewrite the text to be more ");
  }
  if (starts_with(prompt, "Here is the target text ")) {
    const auto end = prompt.rfind(" into the authorship style of the target text.");
    const auto start = prompt.rfind(" Rewrite ", end);
    if (end != std::string::npos && start != std::string::npos) return "So " + prompt.substr(start + 9, end - start - 9);
  }
  return prompt;
}

// ---------------------------------------------------------------------------
// Chat

MockChatServer::MockChatServer(ChatOptions options) : server_(std::make_unique<httplib::Server>()), options_(std::move(options)) {
  server_->Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
    int status = 200;
    const std::string body = respond(req.body, status);
    res.status = status;
    res.set_content(body, "application/json");
  });
  start(*server_, thread_, port_);
}

MockChatServer::~MockChatServer() { stop(); }

void MockChatServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string MockChatServer::base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

std::vector<std::string> MockChatServer::prompts() const {
  std::lock_guard lock(mu_);
  return prompts_;
}

std::vector<std::string> MockChatServer::bodies() const {
  std::lock_guard lock(mu_);
  return bodies_;
}

void MockChatServer::set_options(ChatOptions options) {
  std::lock_guard lock(mu_);
  options_ = std::move(options);
  script_pos_ = 0;
}

std::string MockChatServer::respond(const std::string& body, int& status) {
  const std::size_t n = ++requests_;
  ChatOptions opts;
  std::string prompt;
  try {
    const json doc = json::parse(body);
    for (const auto& m : doc.at("messages")) {
      if (m.at("role") == "user") prompt = m.at("content").get<std::string>();
    }
  } catch (const json::exception& e) {
    status = 400;
    return json{{"error", {{"message", std::string("bad request body: ") + e.what()}}}}.dump();
  }
  std::string scripted;
  bool use_script = false;
  {
    std::lock_guard lock(mu_);
    opts = options_;
    prompts_.push_back(prompt);
    bodies_.push_back(body);
    if (opts.mode == ChatMode::Scripted && script_pos_ < opts.script.size() && !opts.always_fail &&
        static_cast<int>(n) > opts.fail_first) {
      scripted = opts.script[script_pos_++];
      use_script = true;
    }
  }
  if (opts.delay.count() > 0) std::this_thread::sleep_for(opts.delay);
  if (opts.always_fail || static_cast<int>(n) <= opts.fail_first) {
    status = opts.fail_status;
    return json{{"error", {{"message", "injected failure"}}}}.dump();
  }

  std::string content;
  switch (opts.mode) {
    case ChatMode::Echo:
      content = prompt;
      break;
    case ChatMode::Scripted:
      content = use_script ? scripted : prompt;
      break;
    case ChatMode::Stylist:
      content = stylist_reply(prompt);
      break;
    case ChatMode::Empty:
      content = "";
      break;
  }
  return json{{"id", "mock-" + std::to_string(n)},
              {"object", "chat.completion"},
              {"choices", {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}},
                            {"finish_reason", "stop"}}}}}
      .dump();
}

// ---------------------------------------------------------------------------
// Sidecar

std::size_t mock_embedding_dim(const std::string& kind) {
  if (kind == "embed_sbert") return 64;
  if (kind == "embed_luar") return 32;
  return 16;
}

std::vector<double> mock_embed(const std::string& text, std::size_t dim) {
  std::vector<double> v(dim, 0.0);
  v[0] = 1e-3;  // keeps the empty text away from the zero vector
  for (const auto& w : words(text)) {
    const std::uint64_t h = fnv1a(w);
    v[h % dim] += (h >> 63) ? -1.0 : 1.0;
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    v[0] = 1.0;
    return v;
  }
  for (double& x : v) x /= norm;
  return v;
}

double mock_mis(const std::string& a, const std::string& b) {
  const auto wa = words(a), wb = words(b);
  const std::set<std::string> sa(wa.begin(), wa.end()), sb(wb.begin(), wb.end());
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& w : sa) inter += sb.count(w);
  return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

double mock_formality(const std::string& text) {
  double p = 0.5;
  const auto first = text.find_first_not_of(" \t\n");
  if (first != std::string::npos && std::isupper(static_cast<unsigned char>(text[first]))) p += 0.25;
  const auto last = text.find_last_not_of(" \t\n");
  if (last != std::string::npos && text[last] == '.') p += 0.2;
  static const std::set<std::string> slang = {"lol", "u", "gonna", "wanna", "ya", "omg", "yeah", "hey", "whats"};
  for (const auto& w : words(text)) {
    if (slang.count(w)) p -= 0.3;
    if (w.find('\'') != std::string::npos) p -= 0.1;
  }
  return std::clamp(p, 0.0, 1.0);
}

double mock_cola(const std::string& text) {
  const auto last = text.find_last_not_of(" \t\n");
  if (last == std::string::npos) return 0.0;
  return std::string(".!?").find(text[last]) != std::string::npos ? 0.9 : 0.6;
}

MockSidecar::MockSidecar(SidecarOptions options)
    : server_(std::make_unique<httplib::Server>()), options_(std::move(options)) {
  auto error = [](httplib::Response& res, int status, const std::string& msg) {
    res.status = status;
    res.set_content(json{{"error", msg}}.dump(), "application/json");
  };
  auto advertised = [this](const std::string& kind) {
    return std::find(options_.kinds.begin(), options_.kinds.end(), kind) != options_.kinds.end();
  };

  server_->Get("/health", [this](const httplib::Request&, httplib::Response& res) {
    ++requests_;
    json dims = json::object();
    for (const auto& k : options_.kinds) {
      if (starts_with(k, "embed_")) dims[k] = mock_embedding_dim(k);
    }
    res.set_content(json{{"status", "ok"}, {"kinds", options_.kinds}, {"dimensions", dims},
                         {"max_batch", options_.max_batch}}
                        .dump(),
                    "application/json");
  });

  server_->Post("/embed", [this, error, advertised](const httplib::Request& req, httplib::Response& res) {
    ++requests_;
    try {
      const json doc = json::parse(req.body);
      const auto kind = doc.at("kind").get<std::string>();
      if (!starts_with(kind, "embed_") || !advertised(kind)) return error(res, 400, "unknown kind " + kind);
      const auto texts = doc.at("texts").get<std::vector<std::string>>();
      if (texts.size() > options_.max_batch) return error(res, 413, "batch too large");
      json vectors = json::array();
      for (const auto& t : texts) vectors.push_back(mock_embed(t, mock_embedding_dim(kind)));
      res.set_content(json{{"vectors", vectors}}.dump(), "application/json");
    } catch (const json::exception& e) {
      error(res, 400, e.what());
    }
  });

  server_->Post("/score", [this, error, advertised](const httplib::Request& req, httplib::Response& res) {
    ++requests_;
    try {
      const json doc = json::parse(req.body);
      const auto kind = doc.at("kind").get<std::string>();
      if (starts_with(kind, "embed_") || !advertised(kind)) return error(res, 400, "unknown kind " + kind);
      std::vector<double> scores;
      if (kind == "score_mis") {
        const auto& pairs = doc.at("pairs");
        if (pairs.size() > options_.max_batch) return error(res, 413, "batch too large");
        for (const auto& p : pairs) scores.push_back(mock_mis(p.at(0).get<std::string>(), p.at(1).get<std::string>()));
      } else {
        const auto texts = doc.at("texts").get<std::vector<std::string>>();
        if (texts.size() > options_.max_batch) return error(res, 413, "batch too large");
        for (const auto& t : texts) {
          if (kind == "classify_formality") {
            if (t.find_first_not_of(" \t\n") == std::string::npos) return error(res, 400, "empty text");
            scores.push_back(mock_formality(t));
          } else {
            scores.push_back(mock_cola(t));
          }
        }
      }
      res.set_content(json{{"scores", scores}}.dump(), "application/json");
    } catch (const json::exception& e) {
      error(res, 400, e.what());
    }
  });
  start(*server_, thread_, port_);
}

MockSidecar::~MockSidecar() { stop(); }

void MockSidecar::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string MockSidecar::base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

}  // namespace regstyle::mock
