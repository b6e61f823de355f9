#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "http.hpp"
#include "regstyle/error.hpp"
#include "regstyle/providers.hpp"

namespace regstyle::providers {

using nlohmann::json;

namespace {

constexpr std::pair<ScorerKind, std::string_view> kKinds[] = {
    {ScorerKind::EmbedSbert, "embed_sbert"},     {ScorerKind::EmbedLuar, "embed_luar"},
    {ScorerKind::EmbedStylecav, "embed_stylecav"}, {ScorerKind::ScoreMis, "score_mis"},
    {ScorerKind::ScoreCola, "score_cola"},       {ScorerKind::ClassifyFormality, "classify_formality"},
};

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::ScorerUnavailable, "malformed sidecar response: " + what);
}

}  // namespace

std::string_view to_string(ScorerKind kind) {
  for (const auto& [k, name] : kKinds) {
    if (k == kind) return name;
  }
  return "unknown";
}

ScorerKind scorer_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKinds) {
    if (n == name) return k;
  }
  throw Error(ErrorCode::InvalidRequest, "unknown scorer kind '" + std::string(name) + "'");
}

bool is_embed(ScorerKind kind) {
  return kind == ScorerKind::EmbedSbert || kind == ScorerKind::EmbedLuar || kind == ScorerKind::EmbedStylecav;
}

void ScorerRequest::validate() const {
  if (kind == ScorerKind::ScoreMis) {
    if (!texts.empty()) throw Error(ErrorCode::InvalidRequest, "score_mis takes pairs, not texts");
  } else if (!pairs.empty()) {
    throw Error(ErrorCode::InvalidRequest, std::string(to_string(kind)) + " takes texts, not pairs");
  }
}

bool SidecarHealth::advertises(ScorerKind kind) const {
  return std::find(kinds.begin(), kinds.end(), to_string(kind)) != kinds.end();
}

ScorerClient::ScorerClient(ScorerConfig config)
    : config_(std::move(config)),
      url_(Url::parse(config_.base_url)),
      slots_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(config_.concurrency, 1, 1024))) {}

SidecarHealth ScorerClient::health() {
  http::Headers headers;
  if (!config_.secret_header.empty()) headers.emplace_back(config_.secret_header, config_.secret);
  const auto res = http::get(url_, "/health", headers, config_.timeout);
  if (!res.transport_ok) throw Error(ErrorCode::ScorerUnavailable, "sidecar unreachable: " + res.error);
  if (res.status != 200) throw Error(ErrorCode::ScorerUnavailable, "sidecar health HTTP " + std::to_string(res.status));
  SidecarHealth h;
  try {
    const json doc = json::parse(res.body);
    h.status = doc.at("status").get<std::string>();
    h.kinds = doc.value("kinds", std::vector<std::string>{});
  } catch (const json::exception& e) {
    malformed(e.what());
  }
  return h;
}

std::string ScorerClient::post(const std::string& path, const std::string& body) {
  slots_.acquire();
  http::Headers headers;
  if (!config_.secret_header.empty()) headers.emplace_back(config_.secret_header, config_.secret);
  const auto res = http::post_json(url_, path, body, headers, config_.timeout);
  slots_.release();
  if (!res.transport_ok) throw Error(ErrorCode::ScorerUnavailable, "sidecar unreachable: " + res.error);
  if (res.status >= 400 && res.status < 500) {
    throw Error(ErrorCode::BadRequest, "sidecar HTTP " + std::to_string(res.status) + ": " + res.body);
  }
  if (res.status != 200) {
    throw Error(ErrorCode::ScorerUnavailable, "sidecar HTTP " + std::to_string(res.status) + ": " + res.body);
  }
  return res.body;
}

std::vector<std::vector<double>> ScorerClient::embed(const ScorerRequest& req) {
  req.validate();
  if (!is_embed(req.kind)) throw Error(ErrorCode::InvalidRequest, "embed needs an embed_* kind");
  if (req.texts.empty()) return {};
  const json body = {{"kind", to_string(req.kind)}, {"texts", req.texts}};
  std::vector<std::vector<double>> vectors;
  try {
    vectors = json::parse(post("/embed", body.dump())).at("vectors").get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    malformed(e.what());
  }
  if (vectors.size() != req.texts.size()) malformed("vector count does not match text count");
  for (const auto& v : vectors) {
    if (v.empty() || v.size() != vectors.front().size()) malformed("ragged or empty vectors");
  }
  return vectors;
}

std::vector<double> ScorerClient::score(const ScorerRequest& req) {
  req.validate();
  if (is_embed(req.kind)) throw Error(ErrorCode::InvalidRequest, "score needs a score or classify kind");
  json body = {{"kind", to_string(req.kind)}};
  std::size_t expected = 0;
  if (req.kind == ScorerKind::ScoreMis) {
    if (req.pairs.empty()) return {};
    json pairs = json::array();
    for (const auto& [a, b] : req.pairs) pairs.push_back({a, b});
    body["pairs"] = std::move(pairs);
    expected = req.pairs.size();
  } else {
    if (req.texts.empty()) return {};
    body["texts"] = req.texts;
    expected = req.texts.size();
  }
  std::vector<double> scores;
  try {
    scores = json::parse(post("/score", body.dump())).at("scores").get<std::vector<double>>();
  } catch (const json::exception& e) {
    malformed(e.what());
  }
  if (scores.size() != expected) malformed("score count does not match request");
  for (double s : scores) {
    if (!(s >= 0.0 && s <= 1.0)) malformed("score outside [0, 1]");
  }
  return scores;
}

}  // namespace regstyle::providers
