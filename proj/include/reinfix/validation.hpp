#pragma once

// Whole-function patch application in throwaway workspace copies, test
// execution under the `TEST <name> PASS|FAIL|ERROR` line protocol, and
// verdicts.

#include "reinfix/cpg.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace reinfix::validation {

struct TestSuite {
    std::string command;  // run by /bin/sh -c in the workspace root
    int timeout_s = 60;
    std::vector<std::string> expected_tests;  // optional; lets a timeout name the unfinished tests
};

struct BugReport {
    std::string id;
    std::string buggy_code;
    std::string failure_info;
    TestSuite suite;
    cpg::Location location;

    /// Fields: buggy_code, failure_info, test_cmd, path, start_line, end_line;
    /// optional id, tests, timeout_s. Errors: CONFIG_ERROR.
    static BugReport from_json(const nlohmann::json& j);
    static BugReport load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
};

struct CandidatePatch {
    std::string report_id;
    int attempt = 0;
    int suggestion_index = 0;
    int patch_index = 0;
    std::string new_body;

    nlohmann::json to_json() const;
    bool operator==(const CandidatePatch&) const = default;
};

enum class TestStatus { pass, fail, error, timeout };
enum class Verdict { plausible, rejected, broken };

std::string_view to_string(TestStatus s);
std::string_view to_string(Verdict v);

struct ValidationResult {
    CandidatePatch patch;
    std::map<std::string, TestStatus> per_test;
    Verdict verdict = Verdict::rejected;
    std::string detail;

    nlohmann::json to_json() const;
};

/// Replaces lines [start, end] of `content` with `new_body`, keeping every
/// other byte. One trailing newline of `new_body` is ignored; the replaced
/// range keeps its final line terminator. Errors: LOCATION_DRIFT.
std::string splice_lines(const std::string& content, const cpg::Location& location, std::string_view new_body);

/// Errors: PARSE_FAIL when `new_body` is not one well-formed method.
void check_body(std::string_view new_body);

/// Writes the patched file into an existing workspace copy.
/// Errors: LOCATION_DRIFT, PARSE_FAIL.
void apply_patch(const std::filesystem::path& workspace, const BugReport& report, std::string_view new_body);

/// Errors: SUITE_LAUNCH_FAIL when the command produced no protocol line.
std::map<std::string, TestStatus> run_tests(const std::filesystem::path& workspace, const TestSuite& suite);

/// PLAUSIBLE iff there is at least one test and every test passed.
Verdict classify(const std::map<std::string, TestStatus>& per_test);

/// A recursive copy of a project that is deleted on destruction.
class Workspace {
  public:
    Workspace(const std::filesystem::path& project_root, const std::filesystem::path& workdir);
    ~Workspace();
    Workspace(const Workspace&) = delete;
    Workspace& operator=(const Workspace&) = delete;
    const std::filesystem::path& path() const noexcept { return path_; }

  private:
    std::filesystem::path path_;
};

struct ValidationOptions {
    std::size_t width = 1;
    std::filesystem::path workdir;  // empty: system temp directory
};

/// Fresh workspace, apply, run, classify. Malformed bodies and suites that
/// fail to launch on the patched tree are BROKEN. Errors: LOCATION_DRIFT.
ValidationResult validate(const std::filesystem::path& project_root, const BugReport& report,
                          const CandidatePatch& patch, const ValidationOptions& options = {});

/// Validates up to `options.width` candidates at a time; results follow the
/// input order.
std::vector<ValidationResult> validate_all(const std::filesystem::path& project_root, const BugReport& report,
                                           const std::vector<CandidatePatch>& patches,
                                           const ValidationOptions& options = {});

}  // namespace reinfix::validation
