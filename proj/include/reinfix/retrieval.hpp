#pragma once

#include "reinfix/corpus.hpp"
#include "reinfix/embedding.hpp"

#include <string>
#include <vector>

namespace reinfix::retrieval {

inline constexpr std::string_view kDefaultSeparator = "\n=== ROOT CAUSE ===\n";

struct RetrievalConfig {
    int top_n = 3;
    double threshold = 0.5;
    std::string separator = std::string(kDefaultSeparator);
    bool threshold_after_top_n = false;  // default: filter by threshold, then truncate

    /// Errors: CONFIG_ERROR.
    void validate() const;
    bool operator==(const RetrievalConfig&) const = default;
};

struct RetrievalHit {
    corpus::BugFixTriad triad;
    double score = 0.0;
};

/// dot(a, b) / (|a| |b|), clamped to [-1, 1]. Errors: DIMENSION_MISMATCH, ZERO_VECTOR.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

/// embed(code + separator + cause). Errors: EMPTY_TEXT when either part is blank.
EmbeddingVector embed_triad(std::string_view buggy_code, std::string_view root_cause, const RetrievalConfig& cfg,
                            const Embedder& embedder);
EmbeddingVector embed_query(std::string_view query_code, std::string_view root_cause, const RetrievalConfig& cfg,
                            const Embedder& embedder);

/// Embeds every labeled triad lacking a vector (or all, when `refresh`).
/// Returns the number embedded; unlabeled triads are skipped.
std::size_t embed_store(corpus::TriadStore& store, const Embedder& embedder, const RetrievalConfig& cfg,
                        bool refresh = false);

/// True when the stored vector differs from a fresh embed_triad.
bool is_stale(const corpus::BugFixTriad& triad, const Embedder& embedder, const RetrievalConfig& cfg);

/// Up to top_n triads with score >= threshold, by descending score then
/// ascending id. Unembedded triads are skipped. Errors: EMPTY_STORE,
/// DIMENSION_MISMATCH, ZERO_VECTOR.
std::vector<RetrievalHit> retrieve(const EmbeddingVector& q, const corpus::TriadStore& store,
                                   const RetrievalConfig& cfg);

}  // namespace reinfix::retrieval
