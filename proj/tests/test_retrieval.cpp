#include <doctest.h>

#include "reinfix/error.hpp"
#include "reinfix/retrieval.hpp"
#include "retrieval_oracle.hpp"

#include <cmath>

using namespace reinfix;
using namespace reinfix::retrieval;

namespace {

ErrorCode error_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return ErrorCode::io_error;
}

EmbeddingVector vec(std::vector<double> v) { return EmbeddingVector(std::move(v)); }

std::vector<std::string> ids(const std::vector<RetrievalHit>& hits) {
    std::vector<std::string> out;
    for (const auto& h : hits) out.push_back(h.triad.id);
    return out;
}

}  // namespace

TEST_CASE("cosine numerics") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        const auto a = oracle::gaussian(rng, 1 + i % 40);
        CHECK(std::abs(cosine_similarity(vec(a), vec(a)) - 1.0) <= 1e-9);
        auto scaled = a;
        const double k = 0.001 + (i % 17) * 3.7;
        for (auto& x : scaled) x *= k;
        const auto b = oracle::gaussian(rng, a.size());
        CHECK(std::abs(cosine_similarity(vec(scaled), vec(b)) - cosine_similarity(vec(a), vec(b))) <= 1e-9);
        CHECK(std::abs(cosine_similarity(vec(a), vec(b)) - oracle::scalar_cosine(a, b)) <= 1e-12);
    }
    CHECK(std::abs(cosine_similarity(vec({1, 0, 0}), vec({0, 3, 0}))) <= 1e-12);
    CHECK(std::abs(cosine_similarity(vec({1, 1, 0, 0}), vec({0, 0, -2, 5}))) <= 1e-12);

    const double expected = oracle::scalar_cosine({1, 2, 3}, {4, 5, 6});
    CHECK(std::abs(expected - 0.974631846) <= 1e-6);
    CHECK(std::abs(cosine_similarity(vec({1, 2, 3}), vec({4, 5, 6})) - expected) <= 1e-12);
    CHECK(cosine_similarity(vec({1, 2}), vec({-1, -2})) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("cosine errors") {
    CHECK(error_of([] { cosine_similarity(vec({1, 2}), vec({1, 2, 3})); }) == ErrorCode::dimension_mismatch);
    CHECK(error_of([] { cosine_similarity(vec({0, 0}), vec({1, 2})); }) == ErrorCode::zero_vector);
}

TEST_CASE("fallback embedder") {
    const FallbackEmbedder e(64);
    const auto a = e.embed("return a < b ? a : b;");
    CHECK(a.dimension() == 64);
    CHECK(a.norm == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a == e.embed("return a < b ? a : b;"));
    CHECK(e.embed("Return A") == e.embed("return a"));
    CHECK(error_of([&] { e.embed("  ;; {} "); }) == ErrorCode::empty_text);
    CHECK(e.name() == "fallback-64");
}

TEST_CASE("concatenation order matters") {
    const FallbackEmbedder e;
    const RetrievalConfig cfg;
    const std::vector<std::pair<std::string, std::string>> cases = {
        {"int max(int a, int b) { return a < b ? a : b; }", "comparison operator inverted"},
        {"if (x < 0 && prev == '-')", "negative zero is printed without its sign"},
        {"for (Node n : finallyMap.get(parent))", "edge kind should be exceptional"},
    };
    for (const auto& [c, r] : cases) {
        CHECK_FALSE(embed_query(c, r, cfg, e) == embed_query(r, c, cfg, e));
        CHECK_FALSE(e.embed(c + r) == e.embed(r + c));
    }
    CHECK(error_of([&] { embed_query("  ", "cause", cfg, e); }) == ErrorCode::empty_text);
    CHECK(error_of([&] { embed_query("code", "", cfg, e); }) == ErrorCode::empty_text);
}

TEST_CASE("retrieve matches the brute-force oracle") {
    std::mt19937_64 rng(20240601);
    for (int round = 0; round < 25; ++round) {
        const std::size_t dim = std::vector<std::size_t>{4, 8, 16, 32}[round % 4];
        const auto store = oracle::random_store(rng, 1 + rng() % 1500, dim);
        for (int k = 0; k < 4; ++k) {
            RetrievalConfig cfg;
            cfg.top_n = 1 + static_cast<int>(rng() % 12);
            cfg.threshold = -0.5 + static_cast<double>(rng() % 1000) / 1000.0;
            cfg.threshold_after_top_n = k % 2 == 1;
            std::vector<double> q = oracle::gaussian(rng, dim);
            if (k == 3) q = std::next(store.begin(), static_cast<long>(rng() % store.size()))->second.embedding->values;
            const auto got = retrieve(vec(q), store, cfg);
            const auto want = oracle::brute_top_n(q, store, cfg);
            REQUIRE(got.size() == want.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                CHECK(got[i].triad.id == want[i].first);
                CHECK(std::abs(got[i].score - want[i].second) <= 1e-9);
            }
        }
    }
}

TEST_CASE("threshold and top-n monotonicity") {
    std::mt19937_64 rng(99);
    for (int draw = 0; draw < 100; ++draw) {
        const std::size_t dim = 2 + rng() % 12;
        const auto store = oracle::random_store(rng, 1 + rng() % 300, dim);
        const auto q = vec(oracle::gaussian(rng, dim));
        RetrievalConfig lo;
        lo.top_n = 1 + static_cast<int>(rng() % 10);
        lo.threshold = -1.0 + static_cast<double>(rng() % 2000) / 1000.0;
        auto hi = lo;
        hi.threshold = std::min(1.0, lo.threshold + static_cast<double>(rng() % 500) / 1000.0);
        const auto a = ids(retrieve(q, store, lo));
        const auto b = ids(retrieve(q, store, hi));
        // A stricter threshold keeps a prefix of the looser result.
        REQUIRE(b.size() <= a.size());
        CHECK(std::equal(b.begin(), b.end(), a.begin()));

        auto more = lo;
        more.top_n = lo.top_n + 1 + static_cast<int>(rng() % 5);
        const auto c = ids(retrieve(q, store, more));
        REQUIRE(a.size() <= c.size());
        CHECK(std::equal(a.begin(), a.end(), c.begin()));
    }
}

TEST_CASE("threshold 1.0 without a duplicate is empty") {
    std::mt19937_64 rng(5);
    const auto store = oracle::random_store(rng, 500, 16);
    RetrievalConfig cfg;
    cfg.threshold = 1.0;
    cfg.top_n = 10;
    CHECK(retrieve(vec(oracle::gaussian(rng, 16)), store, cfg).empty());

    const auto& dup = store.begin()->second;
    const auto hits = retrieve(*dup.embedding, store, RetrievalConfig{.top_n = 1, .threshold = 0.99});
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].score == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("retrieve edge cases") {
    corpus::TriadStore empty;
    CHECK(error_of([&] { retrieve(vec({1, 0}), empty, {}); }) == ErrorCode::empty_store);

    std::mt19937_64 rng(3);
    auto store = oracle::random_store(rng, 5, 3);
    CHECK(error_of([&] { retrieve(vec({1, 0}), store, {}); }) == ErrorCode::dimension_mismatch);
    CHECK(error_of([&] { retrieve(vec({0, 0, 0}), store, {}); }) == ErrorCode::zero_vector);
    CHECK(error_of([&] { retrieve(vec({1, 0, 0}), store, RetrievalConfig{.top_n = 0}); }) == ErrorCode::config_error);
    CHECK(error_of([&] { retrieve(vec({1, 0, 0}), store, RetrievalConfig{.threshold = 1.5}); }) ==
          ErrorCode::config_error);

    // Unembedded triads never surface.
    for (auto& [id, t] : store) t.embedding.reset();
    CHECK(retrieve(vec({1, 0, 0}), store, RetrievalConfig{.threshold = -1.0}).empty());
}

TEST_CASE("ties break by ascending id") {
    corpus::TriadStore store;
    for (int i = 0; i < 6; ++i) {
        corpus::BugFixTriad t;
        t.buggy_code = "a" + std::to_string(i);
        t.fix_code = "b";
        t.id = corpus::triad_id(t.buggy_code, t.fix_code);
        t.root_cause = "c";
        t.embedding = vec({1.0, i < 4 ? 1.0 : 0.0});
        store.add(t);
    }
    const auto hits = retrieve(vec({1, 1}), store, RetrievalConfig{.top_n = 4, .threshold = 0.0});
    REQUIRE(hits.size() == 4);
    for (std::size_t i = 1; i < hits.size(); ++i) {
        CHECK(hits[i - 1].score == hits[i].score);
        CHECK(hits[i - 1].triad.id < hits[i].triad.id);
    }
}

TEST_CASE("embed_store and staleness") {
    const FallbackEmbedder e(32);
    const RetrievalConfig cfg;
    corpus::TriadStore store;
    for (int i = 0; i < 4; ++i) {
        corpus::BugFixTriad t;
        t.buggy_code = "int f() { return " + std::to_string(i) + "; }";
        t.fix_code = "int f() { return 0; }";
        t.id = corpus::triad_id(t.buggy_code, t.fix_code);
        t.root_cause = i % 2 ? "wrong constant" : "";
        store.add(t);
    }
    CHECK(embed_store(store, e, cfg) == 2);
    CHECK(embed_store(store, e, cfg) == 0);
    CHECK(embed_store(store, e, cfg, true) == 2);
    for (const auto& [id, t] : store) {
        CHECK(t.embedding.has_value() == !t.root_cause.empty());
        if (t.embedding) {
            CHECK_FALSE(is_stale(t, e, cfg));
            CHECK(is_stale(t, FallbackEmbedder(16), cfg));
            auto edited = t;
            edited.root_cause = "something else";
            CHECK(is_stale(edited, e, cfg));
        }
    }
}
