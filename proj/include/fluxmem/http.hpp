#pragma once

#include <chrono>
#include <string>

#include <json.hpp>

namespace fluxmem::http {

/// POST a JSON body to an absolute URL (http or https) with an optional bearer token.
/// Connection failures and non-2xx statuses raise ProviderError; a non-JSON body raises
/// MalformedResponse carrying the raw payload.
nlohmann::json post_json(const std::string& url, const std::string& bearer_token,
                         const nlohmann::json& body,
                         std::chrono::seconds timeout = std::chrono::seconds(30));

}  // namespace fluxmem::http
