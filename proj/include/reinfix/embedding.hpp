#pragma once

#include "reinfix/http_client.hpp"

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace reinfix::retrieval {

struct EmbeddingVector {
    std::vector<double> values;
    double norm = 0.0;

    EmbeddingVector() = default;
    explicit EmbeddingVector(std::vector<double> v);

    std::size_t dimension() const noexcept { return values.size(); }
    bool operator==(const EmbeddingVector& o) const { return values == o.values; }
};

class Embedder {
  public:
    virtual ~Embedder() = default;
    /// Errors: EMPTY_TEXT, BACKEND_UNAVAILABLE.
    virtual EmbeddingVector embed(std::string_view text) const = 0;
    virtual std::size_t dimension() const = 0;
    /// Identifies the embedding space, e.g. "fallback-256".
    virtual std::string name() const = 0;
};

/// Hashed bag of tokens. Tokens are maximal ASCII-alphanumeric runs,
/// lowercased; the token at position p adds 1/(1 + p mod 7) to bucket
/// fnv1a64(token) mod D, negated when bit 63 of the hash is set. The result
/// is L2-normalized.
class FallbackEmbedder final : public Embedder {
  public:
    explicit FallbackEmbedder(std::size_t dimension = 256);
    EmbeddingVector embed(std::string_view text) const override;
    std::size_t dimension() const override { return dimension_; }
    std::string name() const override { return "fallback-" + std::to_string(dimension_); }

  private:
    std::size_t dimension_;
};

/// OpenAI-compatible `/embeddings` endpoint.
class RemoteEmbedder final : public Embedder {
  public:
    RemoteEmbedder(RemoteEndpoint endpoint, std::size_t dimension);
    EmbeddingVector embed(std::string_view text) const override;
    std::size_t dimension() const override { return dimension_; }
    std::string name() const override { return "remote-" + endpoint_.model; }

  private:
    RemoteEndpoint endpoint_;
    std::size_t dimension_;
};

std::vector<std::string> tokenize(std::string_view text);

}  // namespace reinfix::retrieval
