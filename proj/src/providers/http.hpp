#pragma once

// Thin synchronous HTTP helpers over cpp-httplib, kept in one translation
// unit so the header is compiled once.

#include <chrono>
#include <string>
#include <utility>
#include <vector>

#include "regstyle/providers.hpp"

namespace regstyle::providers::http {

using Headers = std::vector<std::pair<std::string, std::string>>;

struct Response {
  bool transport_ok = false;
  int status = 0;
  std::string body;
  std::string error;  // transport error description
};

Response get(const Url& url, const std::string& path, const Headers& headers, std::chrono::seconds timeout);
Response post_json(const Url& url, const std::string& path, const std::string& body, const Headers& headers,
                   std::chrono::seconds timeout);

}  // namespace regstyle::providers::http
