#include "http.hpp"

#include <httplib.h>

#include <charconv>

#include "regstyle/error.hpp"

namespace regstyle::providers {

Url Url::parse(std::string_view url) {
  Url u;
  const auto sep = url.find("://");
  if (sep == std::string_view::npos) throw Error(ErrorCode::Usage, "URL without scheme: " + std::string(url));
  u.scheme = std::string(url.substr(0, sep));
  if (u.scheme != "http" && u.scheme != "https") {
    throw Error(ErrorCode::Usage, "unsupported URL scheme: " + u.scheme);
  }
  const std::string rest_storage(url.substr(sep + 3));
  std::string_view rest = rest_storage;
  const auto slash = rest.find('/');
  std::string_view authority = rest.substr(0, slash);
  if (slash != std::string_view::npos) {
    std::string_view path = rest.substr(slash);
    while (!path.empty() && path.back() == '/') path.remove_suffix(1);
    u.prefix = std::string(path);
  }
  u.port = u.scheme == "https" ? 443 : 80;
  if (const auto colon = authority.rfind(':'); colon != std::string_view::npos) {
    const auto digits = authority.substr(colon + 1);
    int port = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
    if (ec != std::errc() || p != digits.data() + digits.size() || port <= 0 || port > 65535) {
      throw Error(ErrorCode::Usage, "bad port in URL: " + std::string(url));
    }
    u.port = port;
    authority = authority.substr(0, colon);
  }
  if (authority.empty()) throw Error(ErrorCode::Usage, "URL without host: " + std::string(url));
  u.host = std::string(authority);
  return u;
}

std::string Url::origin() const { return scheme + "://" + host + ":" + std::to_string(port); }

namespace http {

namespace {

httplib::Client make_client(const Url& url, std::chrono::seconds timeout) {
  httplib::Client cli(url.origin());
  cli.set_connection_timeout(std::chrono::seconds(10));
  cli.set_read_timeout(timeout);
  cli.set_write_timeout(timeout);
  return cli;
}

httplib::Headers to_headers(const Headers& h) {
  httplib::Headers out;
  for (const auto& [k, v] : h) out.emplace(k, v);
  return out;
}

Response convert(const httplib::Result& res) {
  Response r;
  if (!res) {
    r.error = httplib::to_string(res.error());
    return r;
  }
  r.transport_ok = true;
  r.status = res->status;
  r.body = res->body;
  return r;
}

}  // namespace

Response get(const Url& url, const std::string& path, const Headers& headers, std::chrono::seconds timeout) {
  auto cli = make_client(url, timeout);
  return convert(cli.Get(url.prefix + path, to_headers(headers)));
}

Response post_json(const Url& url, const std::string& path, const std::string& body, const Headers& headers,
                   std::chrono::seconds timeout) {
  auto cli = make_client(url, timeout);
  return convert(cli.Post(url.prefix + path, to_headers(headers), body, "application/json"));
}

}  // namespace http

}  // namespace regstyle::providers
