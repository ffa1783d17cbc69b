#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hopqa::http {

// "https://host:port/prefix" split into the origin and the path prefix.
struct BaseUrl {
  std::string origin;
  std::string prefix;
};

BaseUrl split_base_url(std::string_view base_url);

struct Response {
  int status = 0;             // 0 when the transport failed
  std::string body;
  std::string transport_error;
};

using Headers = std::vector<std::pair<std::string, std::string>>;

Response post_json(std::string_view base_url, std::string_view path, const std::string& body,
                   const Headers& headers, std::chrono::milliseconds timeout);

}  // namespace hopqa::http
