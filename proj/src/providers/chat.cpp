#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "http.hpp"
#include "regstyle/error.hpp"
#include "regstyle/providers.hpp"

namespace regstyle::providers {

using nlohmann::json;

namespace {

json messages_json(const std::vector<Message>& messages) {
  json arr = json::array();
  for (const auto& m : messages) arr.push_back({{"role", m.role}, {"content", m.content}});
  return arr;
}

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; }

// Releases a semaphore slot on scope exit.
class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<1024>& s) : s_(s) { s_.acquire(); }
  ~SlotGuard() { s_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<1024>& s_;
};

std::string server_message(const std::string& body) {
  try {
    const json doc = json::parse(body);
    if (doc.contains("error")) {
      const auto& e = doc["error"];
      if (e.is_string()) return e.get<std::string>();
      if (e.is_object() && e.contains("message")) return e["message"].get<std::string>();
    }
  } catch (const json::exception&) {
  }
  return body;
}

}  // namespace

std::string ChatRequest::body() const {
  json doc;
  doc["model"] = model;
  doc["messages"] = messages_json(messages);
  doc["max_tokens"] = max_new_tokens;
  if (temperature) doc["temperature"] = *temperature;
  if (top_p) doc["top_p"] = *top_p;
  return doc.dump();
}

std::string cache_key(std::string_view endpoint, const ChatRequest& req) {
  // nlohmann objects keep keys sorted, so the dump is canonical.
  json doc;
  doc["endpoint"] = endpoint;
  doc["model"] = req.model;
  doc["messages"] = messages_json(req.messages);
  doc["max_tokens"] = req.max_new_tokens;
  if (req.temperature) doc["temperature"] = *req.temperature;
  if (req.top_p) doc["top_p"] = *req.top_p;
  return sha256_hex(doc.dump());
}

ChatClient::ChatClient(ChatConfig config)
    : config_(std::move(config)),
      url_(Url::parse(config_.base_url)),
      slots_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(config_.concurrency, 1, 1024))) {
  if (config_.retry.attempts < 1) throw Error(ErrorCode::Usage, "retry attempts must be at least 1");
  if (!config_.cache_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(config_.cache_dir, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create cache directory " + config_.cache_dir.string());
  }
}

ChatClient::~ChatClient() = default;

ChatStats ChatClient::stats() const { return {network_requests_.load(), cache_hits_.load()}; }

std::optional<std::string> ChatClient::cache_lookup(const std::string& key) {
  if (config_.cache_dir.empty()) return std::nullopt;
  std::ifstream in(config_.cache_dir / (key + ".json"), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    const json doc = json::parse(buf.str());
    if (doc.at("key").get<std::string>() != key) return std::nullopt;
    return doc.at("content").get<std::string>();
  } catch (const json::exception&) {
    return std::nullopt;  // torn or foreign file: refetch
  }
}

void ChatClient::cache_store(const std::string& key, const std::string& content) {
  if (config_.cache_dir.empty()) return;
  const auto final_path = config_.cache_dir / (key + ".json");
  std::ostringstream tmp_name;
  tmp_name << key << ".tmp." << std::this_thread::get_id();
  const auto tmp_path = config_.cache_dir / tmp_name.str();
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write cache entry " + tmp_path.string());
    out << json{{"key", key}, {"content", content}}.dump();
    if (!out) throw Error(ErrorCode::IoFailure, "failed writing cache entry " + tmp_path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp_path, final_path, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot move cache entry into place: " + ec.message());
}

std::string ChatClient::chat(const ChatRequest& req) {
  if (std::none_of(req.messages.begin(), req.messages.end(), [](const Message& m) { return m.role == "user"; })) {
    throw Error(ErrorCode::InvalidRequest, "chat request needs at least one user message");
  }
  const std::string key = cache_key(config_.base_url, req);

  std::promise<std::string> promise;
  {
    std::unique_lock lock(mu_);
    if (auto it = memory_.find(key); it != memory_.end()) {
      ++cache_hits_;
      return it->second;
    }
    if (auto it = in_flight_.find(key); it != in_flight_.end()) {
      auto shared = it->second;
      lock.unlock();
      ++cache_hits_;
      return shared.get();
    }
    if (auto hit = cache_lookup(key)) {
      ++cache_hits_;
      memory_.emplace(key, *hit);
      return *hit;
    }
    in_flight_.emplace(key, promise.get_future().share());
  }

  try {
    std::string content = fetch(req);
    cache_store(key, content);
    {
      std::lock_guard lock(mu_);
      memory_.emplace(key, content);
      in_flight_.erase(key);
    }
    promise.set_value(content);
    return content;
  } catch (...) {
    {
      std::lock_guard lock(mu_);
      in_flight_.erase(key);
    }
    promise.set_exception(std::current_exception());
    throw;
  }
}

std::string ChatClient::fetch(const ChatRequest& req) {
  SlotGuard slot(slots_);
  const std::string body = req.body();
  http::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace_back(config_.api_key_header,
                         config_.api_key_header == "Authorization" ? "Bearer " + config_.api_key : config_.api_key);
  }

  std::string last_failure;
  auto delay = config_.retry.base_delay;
  for (int attempt = 1; attempt <= config_.retry.attempts; ++attempt) {
    ++network_requests_;
    const auto res = http::post_json(url_, "/v1/chat/completions", body, headers, config_.timeout);
    if (!res.transport_ok) {
      last_failure = "transport error: " + res.error;
    } else if (res.status >= 200 && res.status < 300) {
      std::optional<std::string> content;
      try {
        const json doc = json::parse(res.body);
        const auto& c = doc.at("choices").at(0).at("message").at("content");
        content = c.is_null() ? std::string() : c.get<std::string>();
      } catch (const json::exception& e) {
        last_failure = std::string("malformed completion: ") + e.what();
      }
      if (content) {
        if (blank(*content)) throw Error(ErrorCode::EmptyCompletion, "endpoint returned an empty completion");
        return *content;
      }
    } else if (res.status == 429 || res.status >= 500) {
      last_failure = "HTTP " + std::to_string(res.status) + ": " + server_message(res.body);
    } else {
      throw Error(ErrorCode::BadRequest, "HTTP " + std::to_string(res.status) + ": " + server_message(res.body));
    }
    if (attempt < config_.retry.attempts) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
  }
  throw Error(ErrorCode::EndpointUnavailable, "chat endpoint " + config_.base_url + " failed after " +
                                                  std::to_string(config_.retry.attempts) +
                                                  " attempts; last: " + last_failure);
}

}  // namespace regstyle::providers
