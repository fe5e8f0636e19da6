#include "reinfix/corpus.hpp"

#include "reinfix/error.hpp"
#include "reinfix/hash.hpp"
#include "reinfix/llm.hpp"
#include "reinfix/templates.hpp"
#include "reinfix/text.hpp"

#include <atomic>
#include <sstream>
#include <thread>
#include <unordered_set>

namespace reinfix::corpus {

std::string triad_id(std::string_view buggy_code, std::string_view fix_code) {
    std::string joined;
    joined.reserve(buggy_code.size() + fix_code.size() + 1);
    joined.append(buggy_code).push_back('\0');
    joined.append(fix_code);
    return sha256_hex(joined);
}

std::string normalize_code(std::string_view code) { return trim_trailing_whitespace(code); }

nlohmann::json BugFixTriad::to_json() const {
    nlohmann::json j = {{"id", id},
                        {"buggy_code", buggy_code},
                        {"fix_code", fix_code},
                        {"root_cause", root_cause},
                        {"embedding", nullptr},
                        {"source_tag", source_tag}};
    if (embedding) j["embedding"] = embedding->values;
    return j;
}

BugFixTriad BugFixTriad::from_json(const nlohmann::json& j) {
    auto text = [&](const char* key, bool required) -> std::string {
        if (!j.contains(key) || j[key].is_null()) {
            if (required) throw Error(ErrorCode::malformed_record, std::string("missing field ") + key);
            return {};
        }
        if (!j[key].is_string()) throw Error(ErrorCode::malformed_record, std::string("field ") + key + " is not text");
        return j[key].get<std::string>();
    };
    if (!j.is_object()) {
        throw Error(ErrorCode::malformed_record, "record is not an object");
    }
    BugFixTriad t;
    t.buggy_code = text("buggy_code", true);
    t.fix_code = text("fix_code", true);
    t.root_cause = text("root_cause", false);
    t.source_tag = text("source_tag", false);
    t.id = triad_id(t.buggy_code, t.fix_code);
    if (const std::string given = text("id", false); !given.empty() && given != t.id) {
        throw Error(ErrorCode::malformed_record, "id does not match content: " + given);
    }
    if (j.contains("embedding") && !j["embedding"].is_null()) {
        try {
            t.embedding = retrieval::EmbeddingVector(j["embedding"].get<std::vector<double>>());
        } catch (const nlohmann::json::exception&) {
            throw Error(ErrorCode::malformed_record, "embedding is not a number array");
        }
    }
    return t;
}

bool TriadStore::add(BugFixTriad triad) {
    const std::string id = triad.id;
    return triads_.emplace(id, std::move(triad)).second;
}

const BugFixTriad* TriadStore::find(const std::string& id) const {
    const auto it = triads_.find(id);
    return it == triads_.end() ? nullptr : &it->second;
}

BugFixTriad* TriadStore::find(const std::string& id) {
    const auto it = triads_.find(id);
    return it == triads_.end() ? nullptr : &it->second;
}

std::string TriadStore::to_jsonl() const {
    std::string out;
    for (const auto& [id, t] : triads_) {
        out += t.to_json().dump();
        out += '\n';
    }
    return out;
}

TriadStore TriadStore::from_jsonl(std::string_view text) {
    TriadStore store;
    int line_no = 0;
    for (const auto& line : split_lines(text)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            store.add(BugFixTriad::from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::malformed_record, "line " + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            throw Error(ErrorCode::malformed_record, "line " + std::to_string(line_no) + ": " + e.detail());
        }
    }
    return store;
}

TriadStore TriadStore::load(const std::filesystem::path& path) { return from_jsonl(read_file(path)); }

void TriadStore::save(const std::filesystem::path& path) const { write_file(path, to_jsonl()); }

namespace {

void ingest_one(std::optional<RawRecord> record, const std::string& problem, TriadStore& store, IngestReport& report,
                std::unordered_set<std::string>& seen) {
    ++report.input;
    if (!record || record->buggy_code.empty() || record->fix_code.empty()) {
        ++report.rejected;
        ++report.malformed;
        report.problems.push_back("record " + std::to_string(report.input) + ": MALFORMED_RECORD " +
                                  (problem.empty() ? "missing code field" : problem));
        return;
    }
    if (record->buggy_code == record->fix_code) {
        ++report.rejected;
        ++report.identical;
        return;
    }
    BugFixTriad t;
    t.id = triad_id(record->buggy_code, record->fix_code);
    if (!seen.insert(t.id).second || store.contains(t.id)) {
        ++report.rejected;
        ++report.duplicates;
        return;
    }
    t.buggy_code = std::move(record->buggy_code);
    t.fix_code = std::move(record->fix_code);
    t.source_tag = std::move(record->source_tag);
    store.add(std::move(t));
    ++report.accepted;
}

}  // namespace

IngestReport ingest_pairs(const std::vector<RawRecord>& records, TriadStore& store) {
    IngestReport report;
    std::unordered_set<std::string> seen;
    for (const auto& r : records) ingest_one(r, "", store, report, seen);
    return report;
}

IngestReport ingest_jsonl(std::istream& in, TriadStore& store) {
    IngestReport report;
    std::unordered_set<std::string> seen;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::optional<RawRecord> rec;
        std::string problem;
        try {
            const auto j = nlohmann::json::parse(line);
            if (!j.is_object()) {
                problem = "not an object";
            } else if (!j.contains("buggy_code") || !j["buggy_code"].is_string() || !j.contains("fix_code") ||
                       !j["fix_code"].is_string()) {
                problem = "missing buggy_code or fix_code";
            } else {
                rec = RawRecord{j["buggy_code"].get<std::string>(), j["fix_code"].get<std::string>(),
                                j.contains("source_tag") && j["source_tag"].is_string()
                                    ? j["source_tag"].get<std::string>()
                                    : std::string()};
            }
        } catch (const nlohmann::json::exception& e) {
            problem = std::string("unparseable: ") + e.what();
        }
        ingest_one(std::move(rec), problem, store, report, seen);
    }
    return report;
}

BugFixTriad label_root_cause(const BugFixTriad& triad, llm::LlmBackend& backend,
                             const templates::TemplateSet& templates, double temperature) {
    llm::ChatExchange ex;
    ex.temperature = temperature;
    ex.turns.push_back(
        {"user", templates.render("label_root_cause", {{"buggy_code", triad.buggy_code}, {"fix_code", triad.fix_code}})});
    const std::string reply = backend.complete(ex);

    // One paragraph: every whitespace run becomes a single space.
    std::string flat;
    for (char c : reply) {
        const bool space = c == ' ' || c == '\n' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
        if (space) {
            if (!flat.empty() && flat.back() != ' ') flat.push_back(' ');
        } else {
            flat.push_back(c);
        }
    }
    flat = trim(utf8_prefix(trim(flat), kRootCauseLimit));
    if (flat.empty()) {
        throw Error(ErrorCode::empty_completion, "backend returned no text for triad " + triad.id);
    }
    BugFixTriad out = triad;
    out.root_cause = std::move(flat);
    out.embedding.reset();
    return out;
}

LabelReport label_store(TriadStore& store, llm::LlmBackend& backend, const templates::TemplateSet& templates,
                        std::size_t width, double temperature) {
    std::vector<BugFixTriad*> todo;
    for (auto& [id, t] : store) {
        if (t.root_cause.empty()) todo.push_back(&t);
    }
    std::vector<std::optional<std::string>> causes(todo.size());
    std::vector<std::string> errors(todo.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < todo.size();) {
            try {
                causes[i] = label_root_cause(*todo[i], backend, templates, temperature).root_cause;
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    const std::size_t n = std::max<std::size_t>(1, std::min(width, todo.size()));
    std::vector<std::thread> pool;
    for (std::size_t k = 1; k < n; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    LabelReport report;
    for (std::size_t i = 0; i < todo.size(); ++i) {
        if (causes[i]) {
            todo[i]->root_cause = *causes[i];
            todo[i]->embedding.reset();
            ++report.labeled;
        } else {
            ++report.failed;
            report.problems.push_back(todo[i]->id + ": " + errors[i]);
        }
    }
    return report;
}

std::size_t dedup_filter(TriadStore& store, const std::vector<std::string>& benchmark_snippets) {
    std::unordered_set<std::string> bench;
    for (const auto& s : benchmark_snippets) bench.insert(normalize_code(s));
    std::vector<std::string> doomed;
    for (const auto& [id, t] : store) {
        if (bench.count(normalize_code(t.buggy_code))) doomed.push_back(id);
    }
    for (const auto& id : doomed) store.remove(id);
    return doomed.size();
}

std::vector<std::string> load_benchmark_snippets(const std::filesystem::path& path) {
    std::vector<std::string> out;
    int line_no = 0;
    for (const auto& line : split_lines(read_file(path))) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            if (j.is_string()) {
                out.push_back(j.get<std::string>());
            } else if (j.is_object() && j.contains("buggy_code") && j["buggy_code"].is_string()) {
                out.push_back(j["buggy_code"].get<std::string>());
            } else {
                throw Error(ErrorCode::malformed_record, "line " + std::to_string(line_no) + ": no buggy_code");
            }
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::malformed_record, "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace reinfix::corpus
