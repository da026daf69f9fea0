#include "fluxmem/http.hpp"

#include "fluxmem/error.hpp"

#include <memory>

#include <httplib.h>

namespace fluxmem::http {
namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ProviderError("provider URL lacks a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    return {url, "/"};
  }
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

nlohmann::json post_json(const std::string& url, const std::string& bearer_token,
                         const nlohmann::json& body, std::chrono::seconds timeout) {
  const auto [origin, path] = split_url(url);
  std::unique_ptr<httplib::Client> owned;
  try {
    owned = std::make_unique<httplib::Client>(origin);
  } catch (const std::exception& e) {
    throw ProviderError("unusable provider URL " + url + ": " + e.what());
  }
  auto& client = *owned;
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers headers;
  if (!bearer_token.empty()) {
    headers.emplace("Authorization", "Bearer " + bearer_token);
  }
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) {
    throw ProviderError("provider unreachable at " + url + ": " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw ProviderError("provider at " + url + " returned HTTP " + std::to_string(res->status),
                        res->body);
  }
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error&) {
    throw MalformedResponse("provider at " + url + " returned non-JSON body", res->body);
  }
}

}  // namespace fluxmem::http
