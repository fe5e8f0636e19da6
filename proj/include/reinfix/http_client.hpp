#pragma once

// JSON-over-HTTP calls to OpenAI-compatible endpoints, shared by the remote
// completion backend and the remote embedder.

#include <nlohmann/json.hpp>

#include <string>

namespace reinfix {

struct RemoteEndpoint {
    std::string base_url;  // e.g. https://api.example.com/v1
    std::string model;
    std::string key_env;   // name of the env var holding the bearer key; may be empty
    int timeout_s = 60;
    int retries = 3;
    int backoff_ms = 500;  // doubled after every failed try

    bool operator==(const RemoteEndpoint&) const = default;
};

/// POSTs `body` to base_url + `path`. Connection failures, 429 and 5xx are
/// retried; anything else non-2xx fails at once. Errors: BACKEND_UNAVAILABLE.
nlohmann::json post_json(const RemoteEndpoint& endpoint, const std::string& path, const nlohmann::json& body);

}  // namespace reinfix
