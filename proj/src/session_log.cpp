#include "reinfix/session_log.hpp"

#include "reinfix/error.hpp"
#include "reinfix/hash.hpp"
#include "reinfix/text.hpp"

namespace reinfix {

std::size_t SessionLog::append(nlohmann::json event) {
    std::lock_guard lock(*mu_);
    const std::size_t seq = events_.size();
    nlohmann::json e = {{"seq", seq}};
    e.update(event);
    events_.push_back(std::move(e));
    if (sink_) sink_(events_.back().dump());
    return seq;
}

std::vector<nlohmann::json> SessionLog::of_type(std::string_view type) const {
    std::lock_guard lock(*mu_);
    std::vector<nlohmann::json> out;
    for (const auto& e : events_) {
        if (e.value("type", "") == type) out.push_back(e);
    }
    return out;
}

std::size_t SessionLog::count(std::string_view type) const { return of_type(type).size(); }

std::string SessionLog::to_jsonl() const {
    std::lock_guard lock(*mu_);
    std::string out;
    for (const auto& e : events_) {
        out += e.dump();
        out += '\n';
    }
    return out;
}

std::string SessionLog::hash() const { return sha256_hex(to_jsonl()); }

void SessionLog::save(const std::filesystem::path& path) const { write_file(path, to_jsonl()); }

SessionLog SessionLog::parse(std::string_view text) {
    SessionLog log;
    int line_no = 0;
    for (const auto& line : split_lines(text)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            if (!j.is_object() || !j.contains("type")) {
                throw Error(ErrorCode::malformed_record, "line " + std::to_string(line_no) + ": event without type");
            }
            log.events_.push_back(std::move(j));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::malformed_record, "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return log;
}

SessionLog SessionLog::load(const std::filesystem::path& path) { return parse(read_file(path)); }

}  // namespace reinfix
