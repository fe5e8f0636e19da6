#pragma once

// Line-delimited JSON event stream of one repair session. Events carry a
// sequence number and no wall-clock data, so identical runs log identical bytes.

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace reinfix {

class SessionLog {
  public:
    /// Appends `event` (an object with at least a "type") and returns its seq.
    std::size_t append(nlohmann::json event);

    /// Called with each serialized line as it is appended.
    void set_sink(std::function<void(const std::string&)> sink) { sink_ = std::move(sink); }

    const std::vector<nlohmann::json>& events() const noexcept { return events_; }
    std::vector<nlohmann::json> of_type(std::string_view type) const;
    std::size_t count(std::string_view type) const;

    std::string to_jsonl() const;
    std::string hash() const;
    void save(const std::filesystem::path& path) const;
    /// Errors: MALFORMED_RECORD, IO_ERROR.
    static SessionLog load(const std::filesystem::path& path);
    static SessionLog parse(std::string_view text);

  private:
    std::vector<nlohmann::json> events_;
    std::function<void(const std::string&)> sink_;
    std::unique_ptr<std::mutex> mu_ = std::make_unique<std::mutex>();
};

}  // namespace reinfix
