#include "obfuskit/http.hpp"

#include <regex>

#include "httplib.h"
#include "obfuskit/error.hpp"

namespace obfuskit::http {

Url parse_url(const std::string& url) {
  static const std::regex re(R"(^(https?)://([^/:]+)(?::(\d+))?(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw Error(ErrorCode::InvalidConfig, "unsupported URL: " + url);
  Url out;
  out.scheme = m[1];
  out.host = m[2];
  out.port = m[3].matched ? std::stoi(m[3]) : (out.scheme == "https" ? 443 : 80);
  out.path = m[4].matched ? std::string(m[4]) : "/";
  return out;
}

namespace {

template <class Client>
Response send(Client& cli, const Url& url, const std::string& body, const Headers& headers, int timeout_seconds) {
  cli.set_connection_timeout(timeout_seconds, 0);
  cli.set_read_timeout(timeout_seconds, 0);
  cli.set_write_timeout(timeout_seconds, 0);
  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);
  Response out;
  auto res = cli.Post(url.path, h, body, "application/json");
  if (!res) {
    out.transport_error = httplib::to_string(res.error());
    return out;
  }
  out.status = res->status;
  out.body = res->body;
  return out;
}

}  // namespace

Response post_json(const Url& url, const std::string& body, const Headers& headers, int timeout_seconds) {
  if (url.scheme == "https") {
#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
    httplib::SSLClient cli(url.host, url.port);
    return send(cli, url, body, headers, timeout_seconds);
#else
    Response out;
    out.transport_error = "https not available in this build";
    return out;
#endif
  }
  httplib::Client cli(url.host, url.port);
  return send(cli, url, body, headers, timeout_seconds);
}

}  // namespace obfuskit::http
