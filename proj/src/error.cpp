#include "reinfix/error.hpp"

namespace reinfix {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::project_not_found: return "PROJECT_NOT_FOUND";
        case ErrorCode::no_sources: return "NO_SOURCES";
        case ErrorCode::project_closed: return "PROJECT_CLOSED";
        case ErrorCode::malformed_record: return "MALFORMED_RECORD";
        case ErrorCode::backend_unavailable: return "BACKEND_UNAVAILABLE";
        case ErrorCode::empty_completion: return "EMPTY_COMPLETION";
        case ErrorCode::empty_text: return "EMPTY_TEXT";
        case ErrorCode::dimension_mismatch: return "DIMENSION_MISMATCH";
        case ErrorCode::zero_vector: return "ZERO_VECTOR";
        case ErrorCode::empty_store: return "EMPTY_STORE";
        case ErrorCode::script_exhausted: return "SCRIPT_EXHAUSTED";
        case ErrorCode::cause_not_found: return "CAUSE_NOT_FOUND";
        case ErrorCode::location_drift: return "LOCATION_DRIFT";
        case ErrorCode::parse_fail: return "PARSE_FAIL";
        case ErrorCode::suite_launch_fail: return "SUITE_LAUNCH_FAIL";
        case ErrorCode::config_error: return "CONFIG_ERROR";
        case ErrorCode::io_error: return "IO_ERROR";
    }
    return "UNKNOWN";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code), detail_(detail) {}

}  // namespace reinfix
