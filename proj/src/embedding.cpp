#include "reinfix/embedding.hpp"

#include "reinfix/error.hpp"
#include "reinfix/hash.hpp"

#include <cctype>
#include <cmath>

namespace reinfix::retrieval {

namespace {

double l2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

EmbeddingVector::EmbeddingVector(std::vector<double> v) : values(std::move(v)), norm(l2(values)) {}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

FallbackEmbedder::FallbackEmbedder(std::size_t dimension) : dimension_(dimension) {
    if (dimension_ == 0) {
        throw Error(ErrorCode::config_error, "embedding dimension must be positive");
    }
}

EmbeddingVector FallbackEmbedder::embed(std::string_view text) const {
    const auto tokens = tokenize(text);
    if (tokens.empty()) {
        throw Error(ErrorCode::empty_text, "no tokens in text");
    }
    std::vector<double> v(dimension_, 0.0);
    for (std::size_t p = 0; p < tokens.size(); ++p) {
        const std::uint64_t h = fnv1a64(tokens[p]);
        const double w = 1.0 / static_cast<double>(1 + p % 7);
        v[h % dimension_] += (h >> 63) ? -w : w;
    }
    const double n = l2(v);
    if (n == 0.0) {
        throw Error(ErrorCode::zero_vector, "token weights cancel out");
    }
    for (double& x : v) x /= n;
    return EmbeddingVector(std::move(v));
}

RemoteEmbedder::RemoteEmbedder(RemoteEndpoint endpoint, std::size_t dimension)
    : endpoint_(std::move(endpoint)), dimension_(dimension) {}

EmbeddingVector RemoteEmbedder::embed(std::string_view text) const {
    if (tokenize(text).empty()) {
        throw Error(ErrorCode::empty_text, "no tokens in text");
    }
    const auto reply = post_json(endpoint_, "/embeddings", {{"model", endpoint_.model}, {"input", std::string(text)}});
    std::vector<double> v;
    try {
        v = reply.at("data").at(0).at("embedding").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::backend_unavailable, std::string("malformed embedding response: ") + e.what());
    }
    if (v.size() != dimension_) {
        throw Error(ErrorCode::dimension_mismatch,
                    "provider returned " + std::to_string(v.size()) + ", expected " + std::to_string(dimension_));
    }
    EmbeddingVector out(std::move(v));
    if (out.norm == 0.0) {
        throw Error(ErrorCode::zero_vector, "provider returned a zero vector");
    }
    return out;
}

}  // namespace reinfix::retrieval
