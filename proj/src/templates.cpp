#include "reinfix/templates.hpp"

#include "reinfix/error.hpp"
#include "reinfix/hash.hpp"
#include "reinfix/text.hpp"

namespace reinfix::templates {

namespace {

constexpr const char* kVersion = "reinfix-prompts/1";

const std::map<std::string, std::string>& builtin_texts() {
    static const std::map<std::string, std::string> texts = {
        {"system",
         R"(You are a program repair assistant working on a Java project.
Reply using these line prefixes only:
Thought: <reasoning>
Action: <tool name>
Action Input: <key=value, key=value>
Final Answer: <root cause paragraph>, optionally followed by numbered suggestions)"},

        {"label_root_cause",
         R"(TASK: label-root-cause
Below is a buggy function and its fixed version. State the root cause of the bug in one short paragraph. Do not restate the fix.

Buggy code:
{{buggy_code}}

Fixed code:
{{fix_code}})"},

        {"cause_analysis",
         R"(TASK: cause-analysis
File: {{path}} lines {{start_line}}-{{end_line}}

Buggy function:
{{buggy_code}}

Failing tests:
{{failure_info}}

If the cause is clear, reply "Final Answer: <root cause>". If more project context is needed, reply exactly "ROOT CAUSE: NONE".)"},

        {"gather",
         R"(TASK: gather
File: {{path}} lines {{start_line}}-{{end_line}}

Buggy function:
{{buggy_code}}

Failing tests:
{{failure_info}}

Tools:
{{tools}}

Collected context:
{{donor_code}}

Steps so far:
{{history}}
{{correction}}
Reply with one Action and its Action Input to query a tool, with "Final Answer: <root cause>" once the cause is clear, or with "ROOT CAUSE: NONE".)"},

        {"suggestions",
         R"(TASK: suggestions
Buggy function:
{{buggy_code}}

Failing tests:
{{failure_info}}

Root cause:
{{root_cause}}

Similar past fixes:
{{patterns}}
{{correction}}
Reply as "Final Answer: <root cause>" followed by up to {{count}} numbered repair suggestions.)"},

        {"patch",
         R"(TASK: patch
Buggy function:
{{buggy_code}}

Root cause:
{{root_cause}}

Suggestion {{suggestion_index}}: {{suggestion}}
Candidate {{patch_index}} of {{patch_count}}.
{{correction}}
Reply with the complete fixed function in one fenced code block.)"},

        {"correction", R"(
Your previous reply could not be used ({{reason}}). Follow the reply format exactly.
)"},
    };
    return texts;
}

}  // namespace

std::string substitute(const std::string& text, const std::map<std::string, std::string>& vars) {
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (true) {
        const auto open = text.find("{{", pos);
        if (open == std::string::npos) {
            out.append(text, pos, std::string::npos);
            return out;
        }
        const auto close = text.find("}}", open + 2);
        if (close == std::string::npos) {
            out.append(text, pos, std::string::npos);
            return out;
        }
        out.append(text, pos, open - pos);
        const std::string key = trim(text.substr(open + 2, close - open - 2));
        const auto it = vars.find(key);
        if (it == vars.end()) {
            throw Error(ErrorCode::config_error, "unbound template placeholder {{" + key + "}}");
        }
        out += it->second;
        pos = close + 2;
    }
}

const TemplateSet& TemplateSet::builtin() {
    static const TemplateSet set = [] {
        TemplateSet s;
        s.version_ = kVersion;
        s.texts_ = builtin_texts();
        return s;
    }();
    return set;
}

TemplateSet TemplateSet::load_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw Error(ErrorCode::config_error, "template directory not found: " + dir.string());
    }
    TemplateSet s = builtin();
    const auto version_file = dir / "VERSION";
    s.version_ = std::filesystem::exists(version_file) ? trim(read_file(version_file)) : dir.filename().string();
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".txt") {
            s.texts_[e.path().stem().string()] = read_file(e.path());
        }
    }
    return s;
}

const std::string& TemplateSet::text(const std::string& name) const {
    const auto it = texts_.find(name);
    if (it == texts_.end()) {
        throw Error(ErrorCode::config_error, "unknown template: " + name);
    }
    return it->second;
}

std::string TemplateSet::render(const std::string& name, const std::map<std::string, std::string>& vars) const {
    return substitute(text(name), vars);
}

}  // namespace reinfix::templates
