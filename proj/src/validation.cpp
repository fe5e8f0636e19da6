#include "reinfix/validation.hpp"

#include "reinfix/error.hpp"
#include "reinfix/hash.hpp"
#include "reinfix/java_syntax.hpp"
#include "reinfix/text.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <regex>
#include <thread>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace reinfix::validation {

namespace fs = std::filesystem;

std::string_view to_string(TestStatus s) {
    switch (s) {
        case TestStatus::pass: return "pass";
        case TestStatus::fail: return "fail";
        case TestStatus::error: return "error";
        case TestStatus::timeout: return "timeout";
    }
    return "error";
}

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::plausible: return "PLAUSIBLE";
        case Verdict::rejected: return "REJECTED";
        case Verdict::broken: return "BROKEN";
    }
    return "BROKEN";
}

BugReport BugReport::from_json(const nlohmann::json& j) {
    try {
        BugReport r;
        r.buggy_code = j.at("buggy_code").get<std::string>();
        r.failure_info = j.at("failure_info").get<std::string>();
        r.suite.command = j.at("test_cmd").get<std::string>();
        r.location.path = j.at("path").get<std::string>();
        r.location.start_line = j.at("start_line").get<int>();
        r.location.end_line = j.at("end_line").get<int>();
        r.suite.timeout_s = j.value("timeout_s", 60);
        if (j.contains("tests")) r.suite.expected_tests = j["tests"].get<std::vector<std::string>>();
        r.id = j.value("id", r.location.path + ":" + std::to_string(r.location.start_line));
        if (trim(r.failure_info).empty()) throw Error(ErrorCode::config_error, "failure_info is empty");
        if (r.suite.timeout_s <= 0) throw Error(ErrorCode::config_error, "timeout_s must be positive");
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::config_error, std::string("bad bug report: ") + e.what());
    }
}

BugReport BugReport::load(const fs::path& path) {
    try {
        return from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::config_error, path.string() + ": " + e.what());
    }
}

nlohmann::json BugReport::to_json() const {
    nlohmann::json j = {{"id", id},
                        {"buggy_code", buggy_code},
                        {"failure_info", failure_info},
                        {"test_cmd", suite.command},
                        {"timeout_s", suite.timeout_s},
                        {"path", location.path},
                        {"start_line", location.start_line},
                        {"end_line", location.end_line}};
    if (!suite.expected_tests.empty()) j["tests"] = suite.expected_tests;
    return j;
}

nlohmann::json CandidatePatch::to_json() const {
    return {{"report_id", report_id},
            {"attempt", attempt},
            {"suggestion_index", suggestion_index},
            {"patch_index", patch_index},
            {"new_body", new_body}};
}

nlohmann::json ValidationResult::to_json() const {
    nlohmann::json tests = nlohmann::json::object();
    for (const auto& [name, s] : per_test) tests[name] = to_string(s);
    return {{"attempt", patch.attempt},
            {"suggestion_index", patch.suggestion_index},
            {"patch_index", patch.patch_index},
            {"verdict", to_string(verdict)},
            {"per_test", tests},
            {"detail", detail}};
}

std::string splice_lines(const std::string& content, const cpg::Location& location, std::string_view new_body) {
    // Offsets of each line start, plus one past the end.
    std::vector<std::size_t> starts = {0};
    for (std::size_t i = 0; i < content.size(); ++i) {
        if (content[i] == '\n' && i + 1 < content.size()) starts.push_back(i + 1);
    }
    const int line_count = content.empty() ? 0 : static_cast<int>(starts.size());
    if (location.start_line < 1 || location.end_line < location.start_line || location.end_line > line_count) {
        throw Error(ErrorCode::location_drift, location.path + " has " + std::to_string(line_count) +
                                                   " lines, patch targets " + std::to_string(location.start_line) +
                                                   "-" + std::to_string(location.end_line));
    }
    const std::size_t begin = starts[static_cast<std::size_t>(location.start_line - 1)];
    std::size_t end = location.end_line < line_count ? starts[static_cast<std::size_t>(location.end_line)]
                                                     : content.size();
    // Keep the terminator of the last replaced line.
    std::string terminator;
    if (end > begin && content[end - 1] == '\n') {
        terminator = end - 1 > begin && content[end - 2] == '\r' ? "\r\n" : "\n";
        end -= terminator.size();
    }
    std::string body(new_body);
    if (body.ends_with("\r\n")) {
        body.resize(body.size() - 2);
    } else if (body.ends_with("\n")) {
        body.pop_back();
    }
    std::string out;
    out.reserve(content.size() + body.size());
    out.append(content, 0, begin);
    out += body;
    out += terminator;
    out.append(content, end + terminator.size(), std::string::npos);
    return out;
}

void check_body(std::string_view new_body) {
    if (trim(new_body).empty()) {
        throw Error(ErrorCode::parse_fail, "empty body");
    }
    try {
        java::check_member_syntax(new_body);
    } catch (const cpg::ParseError& e) {
        throw Error(ErrorCode::parse_fail, e.what());
    }
}

void apply_patch(const fs::path& workspace, const BugReport& report, std::string_view new_body) {
    const fs::path target = workspace / report.location.path;
    if (!fs::is_regular_file(target)) {
        throw Error(ErrorCode::location_drift, "no such file: " + report.location.path);
    }
    const std::string patched = splice_lines(read_file(target), report.location, new_body);
    check_body(new_body);
    write_file(target, patched);
}

namespace {

struct Child {
    std::string out;
    std::string err;
    int exit_code = -1;
    bool timed_out = false;
};

Child run_command(const fs::path& cwd, const std::string& command, int timeout_s) {
    int out_pipe[2], err_pipe[2];
    if (pipe2(out_pipe, O_CLOEXEC) != 0 || pipe2(err_pipe, O_CLOEXEC) != 0) {
        throw Error(ErrorCode::suite_launch_fail, "pipe failed");
    }
    const std::string dir = cwd.string();
    const pid_t pid = fork();
    if (pid < 0) {
        throw Error(ErrorCode::suite_launch_fail, "fork failed");
    }
    if (pid == 0) {
        setpgid(0, 0);
        if (chdir(dir.c_str()) != 0) _exit(126);
        dup2(out_pipe[1], STDOUT_FILENO);
        dup2(err_pipe[1], STDERR_FILENO);
        const int devnull = open("/dev/null", O_RDONLY);
        if (devnull >= 0) dup2(devnull, STDIN_FILENO);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    setpgid(pid, pid);
    close(out_pipe[1]);
    close(err_pipe[1]);

    Child child;
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(timeout_s);
    pollfd fds[2] = {{out_pipe[0], POLLIN, 0}, {err_pipe[0], POLLIN, 0}};
    int open_fds = 2;
    char buf[4096];
    while (open_fds > 0) {
        const auto left =
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now()).count();
        if (left <= 0) {
            child.timed_out = true;
            break;
        }
        const int ready = poll(fds, 2, static_cast<int>(std::min<long long>(left, 1000)));
        if (ready < 0 && errno != EINTR) break;
        for (int k = 0; k < 2; ++k) {
            if (fds[k].fd < 0 || !(fds[k].revents & (POLLIN | POLLHUP | POLLERR))) continue;
            const ssize_t n = read(fds[k].fd, buf, sizeof buf);
            if (n > 0) {
                (k == 0 ? child.out : child.err).append(buf, static_cast<std::size_t>(n));
            } else {
                close(fds[k].fd);
                fds[k].fd = -1;
                --open_fds;
            }
        }
    }
    if (child.timed_out) {
        kill(-pid, SIGKILL);
    }
    for (auto& f : fds) {
        if (f.fd >= 0) close(f.fd);
    }
    int status = 0;
    while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (!child.timed_out) {
        // Reap anything the suite left running in its group.
        kill(-pid, SIGKILL);
    }
    child.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    return child;
}

std::string tail(const std::string& s, std::size_t n) { return s.size() <= n ? s : s.substr(s.size() - n); }

}  // namespace

std::map<std::string, TestStatus> run_tests(const fs::path& workspace, const TestSuite& suite) {
    if (trim(suite.command).empty()) {
        throw Error(ErrorCode::suite_launch_fail, "no test command configured");
    }
    const Child child = run_command(workspace, suite.command, suite.timeout_s);
    static const std::regex line_re(R"(^TEST (\S+) (PASS|FAIL|ERROR)\s*$)");
    std::map<std::string, TestStatus> per_test;
    for (const auto& line : split_lines(child.out)) {
        std::smatch m;
        if (std::regex_match(line, m, line_re)) {
            const TestStatus s = m[2] == "PASS" ? TestStatus::pass : m[2] == "FAIL" ? TestStatus::fail : TestStatus::error;
            per_test.emplace(m[1], s);
        }
    }
    if (child.timed_out) {
        for (const auto& name : suite.expected_tests) per_test.emplace(name, TestStatus::timeout);
        if (per_test.empty()) per_test.emplace("(suite)", TestStatus::timeout);
        return per_test;
    }
    if (per_test.empty()) {
        throw Error(ErrorCode::suite_launch_fail, "exit " + std::to_string(child.exit_code) +
                                                      " without protocol output: " + trim(tail(child.err, 400)));
    }
    for (const auto& name : suite.expected_tests) per_test.emplace(name, TestStatus::error);
    return per_test;
}

Verdict classify(const std::map<std::string, TestStatus>& per_test) {
    if (per_test.empty()) return Verdict::rejected;
    for (const auto& [name, s] : per_test) {
        if (s != TestStatus::pass) return Verdict::rejected;
    }
    return Verdict::plausible;
}

Workspace::Workspace(const fs::path& project_root, const fs::path& workdir) {
    static std::atomic<unsigned> counter{0};
    const fs::path base = workdir.empty() ? fs::temp_directory_path() / "reinfix" : workdir;
    fs::create_directories(base);
    path_ = base / ("ws-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    std::error_code ec;
    fs::copy(project_root, path_, fs::copy_options::recursive | fs::copy_options::copy_symlinks, ec);
    if (ec) {
        throw Error(ErrorCode::io_error, "cannot copy " + project_root.string() + ": " + ec.message());
    }
}

Workspace::~Workspace() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

ValidationResult validate(const fs::path& project_root, const BugReport& report, const CandidatePatch& patch,
                          const ValidationOptions& options) {
    ValidationResult result;
    result.patch = patch;
    Workspace ws(project_root, options.workdir);
    try {
        apply_patch(ws.path(), report, patch.new_body);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::parse_fail) throw;
        result.verdict = Verdict::broken;
        result.detail = e.what();
        return result;
    }
    try {
        result.per_test = run_tests(ws.path(), report.suite);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::suite_launch_fail) throw;
        result.verdict = Verdict::broken;
        result.detail = e.what();
        return result;
    }
    result.verdict = classify(result.per_test);
    return result;
}

std::vector<ValidationResult> validate_all(const fs::path& project_root, const BugReport& report,
                                           const std::vector<CandidatePatch>& patches,
                                           const ValidationOptions& options) {
    std::vector<ValidationResult> results(patches.size());
    std::vector<std::exception_ptr> errors(patches.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < patches.size();) {
            try {
                results[i] = validate(project_root, report, patches[i], options);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t n = std::max<std::size_t>(1, std::min(options.width, patches.size()));
    std::vector<std::thread> pool;
    for (std::size_t k = 1; k < n; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return results;
}

}  // namespace reinfix::validation
