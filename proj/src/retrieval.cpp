#include "reinfix/retrieval.hpp"

#include "reinfix/error.hpp"
#include "reinfix/text.hpp"

#include <algorithm>

namespace reinfix::retrieval {

void RetrievalConfig::validate() const {
    if (top_n < 1) {
        throw Error(ErrorCode::config_error, "top_n must be >= 1");
    }
    if (!(threshold >= -1.0 && threshold <= 1.0)) {
        throw Error(ErrorCode::config_error, "threshold must lie in [-1, 1]");
    }
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dimension() != b.dimension()) {
        throw Error(ErrorCode::dimension_mismatch,
                    std::to_string(a.dimension()) + " vs " + std::to_string(b.dimension()));
    }
    if (a.norm == 0.0 || b.norm == 0.0) {
        throw Error(ErrorCode::zero_vector, "cosine of a zero vector");
    }
    double dot = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
    }
    return std::clamp(dot / (a.norm * b.norm), -1.0, 1.0);
}

EmbeddingVector embed_triad(std::string_view buggy_code, std::string_view root_cause, const RetrievalConfig& cfg,
                            const Embedder& embedder) {
    if (trim(buggy_code).empty()) {
        throw Error(ErrorCode::empty_text, "empty code");
    }
    if (trim(root_cause).empty()) {
        throw Error(ErrorCode::empty_text, "empty root cause");
    }
    std::string text;
    text.reserve(buggy_code.size() + cfg.separator.size() + root_cause.size());
    text.append(buggy_code).append(cfg.separator).append(root_cause);
    return embedder.embed(text);
}

EmbeddingVector embed_query(std::string_view query_code, std::string_view root_cause, const RetrievalConfig& cfg,
                            const Embedder& embedder) {
    return embed_triad(query_code, root_cause, cfg, embedder);
}

std::size_t embed_store(corpus::TriadStore& store, const Embedder& embedder, const RetrievalConfig& cfg,
                        bool refresh) {
    std::size_t n = 0;
    for (auto& [id, t] : store) {
        if (t.root_cause.empty() || (t.embedding && !refresh)) {
            continue;
        }
        t.embedding = embed_triad(t.buggy_code, t.root_cause, cfg, embedder);
        ++n;
    }
    return n;
}

bool is_stale(const corpus::BugFixTriad& triad, const Embedder& embedder, const RetrievalConfig& cfg) {
    if (!triad.embedding) {
        return true;
    }
    return !(*triad.embedding == embed_triad(triad.buggy_code, triad.root_cause, cfg, embedder));
}

std::vector<RetrievalHit> retrieve(const EmbeddingVector& q, const corpus::TriadStore& store,
                                   const RetrievalConfig& cfg) {
    cfg.validate();
    if (store.empty()) {
        throw Error(ErrorCode::empty_store, "the triad store has no entries");
    }
    struct Scored {
        double score;
        const corpus::BugFixTriad* triad;
    };
    std::vector<Scored> scored;
    scored.reserve(store.size());
    for (const auto& [id, t] : store) {
        if (!t.embedding) {
            continue;
        }
        const double s = cosine_similarity(q, *t.embedding);
        if (!cfg.threshold_after_top_n && s < cfg.threshold) {
            continue;
        }
        scored.push_back({s, &t});
    }
    auto better = [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.triad->id < b.triad->id;
    };
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(cfg.top_n), scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(), better);
    std::vector<RetrievalHit> out;
    for (std::size_t i = 0; i < n; ++i) {
        if (cfg.threshold_after_top_n && scored[i].score < cfg.threshold) {
            continue;
        }
        out.push_back({*scored[i].triad, scored[i].score});
    }
    return out;
}

}  // namespace reinfix::retrieval
