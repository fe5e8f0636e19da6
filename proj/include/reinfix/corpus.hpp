#pragma once

// Historical bug-fix triads: ingest, root-cause labeling, benchmark-overlap
// filtering and JSONL persistence.

#include "reinfix/embedding.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace reinfix::llm {
class LlmBackend;
}
namespace reinfix::templates {
class TemplateSet;
}

namespace reinfix::corpus {

inline constexpr std::size_t kRootCauseLimit = 600;

struct BugFixTriad {
    std::string id;
    std::string buggy_code;
    std::string fix_code;
    std::string root_cause;  // empty until labeled
    std::optional<retrieval::EmbeddingVector> embedding;
    std::string source_tag;

    nlohmann::json to_json() const;
    /// Errors: MALFORMED_RECORD.
    static BugFixTriad from_json(const nlohmann::json& j);

    bool operator==(const BugFixTriad&) const = default;
};

/// sha256 of buggy_code, a NUL byte, and fix_code.
std::string triad_id(std::string_view buggy_code, std::string_view fix_code);

/// The exact-match normalization: trailing whitespace removed from each line.
std::string normalize_code(std::string_view code);

/// Triads keyed and iterated by ascending id.
class TriadStore {
  public:
    bool contains(const std::string& id) const { return triads_.count(id) != 0; }
    /// Inserts unless the id is already present.
    bool add(BugFixTriad triad);
    bool remove(const std::string& id) { return triads_.erase(id) != 0; }
    const BugFixTriad* find(const std::string& id) const;
    BugFixTriad* find(const std::string& id);

    std::size_t size() const noexcept { return triads_.size(); }
    bool empty() const noexcept { return triads_.empty(); }

    auto begin() const { return triads_.begin(); }
    auto end() const { return triads_.end(); }
    auto begin() { return triads_.begin(); }
    auto end() { return triads_.end(); }

    std::string to_jsonl() const;
    /// Errors: MALFORMED_RECORD (with line number), IO_ERROR.
    static TriadStore from_jsonl(std::string_view text);
    static TriadStore load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    bool operator==(const TriadStore&) const = default;

  private:
    std::map<std::string, BugFixTriad> triads_;
};

struct RawRecord {
    std::string buggy_code;
    std::string fix_code;
    std::string source_tag;
};

struct IngestReport {
    std::size_t input = 0;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t malformed = 0;   // part of rejected
    std::size_t duplicates = 0;  // part of rejected
    std::size_t identical = 0;   // part of rejected: buggy == fix
    std::vector<std::string> problems;
};

IngestReport ingest_pairs(const std::vector<RawRecord>& records, TriadStore& store);
/// One JSON object per line with `buggy_code`, `fix_code` and optional
/// `source_tag`. Blank lines are ignored; bad lines count as malformed.
IngestReport ingest_jsonl(std::istream& in, TriadStore& store);

/// Asks the backend for a one-paragraph cause of at most kRootCauseLimit
/// bytes. Errors: EMPTY_COMPLETION, BACKEND_UNAVAILABLE.
BugFixTriad label_root_cause(const BugFixTriad& triad, llm::LlmBackend& backend,
                             const templates::TemplateSet& templates, double temperature = 1.0);

struct LabelReport {
    std::size_t labeled = 0;
    std::size_t failed = 0;
    std::vector<std::string> problems;
};

/// Labels every unlabeled triad with up to `width` concurrent backend calls.
/// Failed triads stay unlabeled, so a rerun resumes where this one stopped.
LabelReport label_store(TriadStore& store, llm::LlmBackend& backend, const templates::TemplateSet& templates,
                        std::size_t width = 1, double temperature = 1.0);

/// Removes triads whose normalized buggy code equals a normalized benchmark
/// snippet. Returns the number removed.
std::size_t dedup_filter(TriadStore& store, const std::vector<std::string>& benchmark_snippets);

/// Snippet file: one JSON string or object with a `buggy_code` field per line.
std::vector<std::string> load_benchmark_snippets(const std::filesystem::path& path);

}  // namespace reinfix::corpus
