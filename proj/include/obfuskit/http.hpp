#pragma once

#include <string>
#include <utility>
#include <vector>

namespace obfuskit::http {

struct Url {
  std::string scheme;  // "http" or "https"
  std::string host;
  int port = 80;
  std::string path = "/";
};

// Throws InvalidConfig on anything other than http(s)://host[:port][/path].
Url parse_url(const std::string& url);

struct Response {
  // 0 when the request never produced an HTTP status (connect error, timeout).
  int status = 0;
  std::string body;
  std::string transport_error;
};

using Headers = std::vector<std::pair<std::string, std::string>>;

Response post_json(const Url& url, const std::string& body, const Headers& headers, int timeout_seconds);

}  // namespace obfuskit::http
