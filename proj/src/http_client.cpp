#include "reinfix/http_client.hpp"

#include "reinfix/error.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <thread>

namespace reinfix {

namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string prefix;  // path part without trailing '/'
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(ErrorCode::config_error, "base_url needs a scheme: " + url);
    }
    const auto path_begin = url.find('/', scheme_end + 3);
    SplitUrl out;
    out.origin = url.substr(0, path_begin);
    if (path_begin != std::string::npos) {
        out.prefix = url.substr(path_begin);
        while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
    }
    return out;
}

}  // namespace

nlohmann::json post_json(const RemoteEndpoint& endpoint, const std::string& path, const nlohmann::json& body) {
    const auto url = split_url(endpoint.base_url);
    httplib::Client client(url.origin);
    client.set_connection_timeout(endpoint.timeout_s, 0);
    client.set_read_timeout(endpoint.timeout_s, 0);
    client.set_write_timeout(endpoint.timeout_s, 0);

    httplib::Headers headers;
    if (!endpoint.key_env.empty()) {
        if (const char* key = std::getenv(endpoint.key_env.c_str()); key && *key) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }
    const std::string payload = body.dump();
    std::string last_error = "no attempt made";
    int delay = endpoint.backoff_ms;
    for (int attempt = 0; attempt <= endpoint.retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
            delay *= 2;
        }
        auto res = client.Post(url.prefix + path, headers, payload, "application/json");
        if (!res) {
            last_error = "connection failed: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 200 && res->status < 300) {
            try {
                return nlohmann::json::parse(res->body);
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorCode::backend_unavailable, std::string("unparseable response: ") + e.what());
            }
        }
        last_error = "HTTP " + std::to_string(res->status);
        if (res->status != 429 && res->status < 500) {
            break;
        }
    }
    throw Error(ErrorCode::backend_unavailable, endpoint.base_url + path + ": " + last_error);
}

}  // namespace reinfix
