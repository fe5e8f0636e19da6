#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace reinfix {

enum class ErrorCode {
    project_not_found,
    no_sources,
    project_closed,
    malformed_record,
    backend_unavailable,
    empty_completion,
    empty_text,
    dimension_mismatch,
    zero_vector,
    empty_store,
    script_exhausted,
    cause_not_found,
    location_drift,
    parse_fail,
    suite_launch_fail,
    config_error,
    io_error,
};

/// Upper-snake name of a code, e.g. "PROJECT_NOT_FOUND".
std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& detail);

    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

  private:
    ErrorCode code_;
    std::string detail_;
};

}  // namespace reinfix
