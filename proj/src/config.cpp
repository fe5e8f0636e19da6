#include "reinfix/config.hpp"

#include "reinfix/error.hpp"
#include "reinfix/text.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace reinfix::config {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::config_error, msg); }

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    return out + "\"";
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// A parsed right-hand side: either a string literal or a bare token.
struct Value {
    std::string text;
    bool quoted = false;
};

std::string as_string(const Value& v, const std::string& where) {
    if (!v.quoted) fail(where + ": expected a quoted string");
    return v.text;
}

double as_double(const Value& v, const std::string& where) {
    if (v.quoted || v.text.empty()) fail(where + ": expected a number");
    errno = 0;
    char* end = nullptr;
    const double d = std::strtod(v.text.c_str(), &end);
    if (*end != '\0' || errno == ERANGE) fail(where + ": expected a number, got " + v.text);
    return d;
}

int as_int(const Value& v, const std::string& where) {
    if (v.quoted || v.text.empty()) fail(where + ": expected an integer");
    errno = 0;
    char* end = nullptr;
    const long n = std::strtol(v.text.c_str(), &end, 10);
    if (*end != '\0' || errno == ERANGE || n < INT32_MIN || n > INT32_MAX) {
        fail(where + ": expected an integer, got " + v.text);
    }
    return static_cast<int>(n);
}

bool as_bool(const Value& v, const std::string& where) {
    if (!v.quoted && v.text == "true") return true;
    if (!v.quoted && v.text == "false") return false;
    fail(where + ": expected true or false");
}

struct Field {
    std::string section;
    std::string key;
    std::function<void(Config&, const Value&, const std::string&)> set;
    std::function<std::string(const Config&)> get;
};

template <class T>
using Access = T& (*)(Config&);

template <class T>
T& read(Access<T> a, const Config& c) {
    return a(const_cast<Config&>(c));
}

Field str_field(std::string s, std::string k, Access<std::string> a) {
    return {std::move(s), std::move(k), [a](Config& c, const Value& v, const std::string& w) { a(c) = as_string(v, w); },
            [a](const Config& c) { return quote(read(a, c)); }};
}

Field int_field(std::string s, std::string k, Access<int> a) {
    return {std::move(s), std::move(k), [a](Config& c, const Value& v, const std::string& w) { a(c) = as_int(v, w); },
            [a](const Config& c) { return std::to_string(read(a, c)); }};
}

Field dbl_field(std::string s, std::string k, Access<double> a) {
    return {std::move(s), std::move(k), [a](Config& c, const Value& v, const std::string& w) { a(c) = as_double(v, w); },
            [a](const Config& c) { return fmt_double(read(a, c)); }};
}

Field bool_field(std::string s, std::string k, Access<bool> a) {
    return {std::move(s), std::move(k), [a](Config& c, const Value& v, const std::string& w) { a(c) = as_bool(v, w); },
            [a](const Config& c) { return std::string(read(a, c) ? "true" : "false"); }};
}

const std::vector<Field>& fields() {
    static const std::vector<Field> all = {
        str_field("backend", "kind", [](Config& c) -> std::string& { return c.backend.kind; }),
        str_field("backend", "script", [](Config& c) -> std::string& { return c.backend.script; }),
        str_field("backend", "base_url", [](Config& c) -> std::string& { return c.backend.endpoint.base_url; }),
        str_field("backend", "model", [](Config& c) -> std::string& { return c.backend.endpoint.model; }),
        str_field("backend", "key_env", [](Config& c) -> std::string& { return c.backend.endpoint.key_env; }),
        int_field("backend", "timeout_s", [](Config& c) -> int& { return c.backend.endpoint.timeout_s; }),
        int_field("backend", "retries", [](Config& c) -> int& { return c.backend.endpoint.retries; }),
        int_field("backend", "backoff_ms", [](Config& c) -> int& { return c.backend.endpoint.backoff_ms; }),
        dbl_field("backend", "temperature", [](Config& c) -> double& { return c.backend.temperature; }),
        int_field("backend", "max_output", [](Config& c) -> int& { return c.backend.max_output; }),

        str_field("embedder", "kind", [](Config& c) -> std::string& { return c.embedder.kind; }),
        int_field("embedder", "dimension", [](Config& c) -> int& { return c.embedder.dimension; }),
        str_field("embedder", "base_url", [](Config& c) -> std::string& { return c.embedder.endpoint.base_url; }),
        str_field("embedder", "model", [](Config& c) -> std::string& { return c.embedder.endpoint.model; }),
        str_field("embedder", "key_env", [](Config& c) -> std::string& { return c.embedder.endpoint.key_env; }),
        int_field("embedder", "timeout_s", [](Config& c) -> int& { return c.embedder.endpoint.timeout_s; }),
        int_field("embedder", "retries", [](Config& c) -> int& { return c.embedder.endpoint.retries; }),
        int_field("embedder", "backoff_ms", [](Config& c) -> int& { return c.embedder.endpoint.backoff_ms; }),

        int_field("retrieval", "top_n", [](Config& c) -> int& { return c.retrieval.top_n; }),
        dbl_field("retrieval", "threshold", [](Config& c) -> double& { return c.retrieval.threshold; }),
        str_field("retrieval", "separator", [](Config& c) -> std::string& { return c.retrieval.separator; }),
        bool_field("retrieval", "threshold_after_top_n", [](Config& c) -> bool& { return c.retrieval.threshold_after_top_n; }),

        int_field("budget", "attempts", [](Config& c) -> int& { return c.budget.attempts; }),
        int_field("budget", "suggestions", [](Config& c) -> int& { return c.budget.suggestions_per_attempt; }),
        int_field("budget", "patches", [](Config& c) -> int& { return c.budget.patches_per_suggestion; }),

        int_field("limits", "max_gather_cycles", [](Config& c) -> int& { return c.limits.agent.max_gather_cycles; }),
        int_field("limits", "max_react_steps", [](Config& c) -> int& { return c.limits.agent.max_react_steps; }),
        int_field("limits", "max_malformed_streak", [](Config& c) -> int& { return c.limits.agent.max_malformed_streak; }),
        int_field("limits", "test_timeout_s", [](Config& c) -> int& { return c.limits.test_timeout_s; }),
        int_field("limits", "validation_width", [](Config& c) -> int& { return c.limits.validation_width; }),
        int_field("limits", "label_width", [](Config& c) -> int& { return c.limits.label_width; }),

        str_field("paths", "store", [](Config& c) -> std::string& { return c.paths.store; }),
        str_field("paths", "templates", [](Config& c) -> std::string& { return c.paths.templates; }),
        str_field("paths", "workdir", [](Config& c) -> std::string& { return c.paths.workdir; }),
    };
    return all;
}

// Parses the value part of a line; `rest` begins after the `=`.
Value parse_value(const std::string& rest, const std::string& where) {
    std::size_t i = 0;
    while (i < rest.size() && (rest[i] == ' ' || rest[i] == '\t')) ++i;
    Value v;
    std::size_t end;
    if (i < rest.size() && rest[i] == '"') {
        v.quoted = true;
        for (end = i + 1; end < rest.size() && rest[end] != '"'; ++end) {
            if (rest[end] != '\\') {
                v.text += rest[end];
                continue;
            }
            if (++end == rest.size()) fail(where + ": dangling escape");
            switch (rest[end]) {
                case 'n': v.text += '\n'; break;
                case 't': v.text += '\t'; break;
                case 'r': v.text += '\r'; break;
                case '"': v.text += '"'; break;
                case '\\': v.text += '\\'; break;
                default: fail(where + ": unknown escape \\" + std::string(1, rest[end]));
            }
        }
        if (end == rest.size()) fail(where + ": unterminated string");
        ++end;
    } else {
        end = rest.find('#', i);
        if (end == std::string::npos) end = rest.size();
        v.text = trim(rest.substr(i, end - i));
    }
    const auto tail = trim(rest.substr(std::min(end, rest.size())));
    if (!tail.empty() && tail[0] != '#') fail(where + ": unexpected text after value");
    return v;
}

void require(bool ok, const std::string& msg) {
    if (!ok) fail(msg);
}

}  // namespace

void Config::validate() const {
    require(backend.kind == "mock" || backend.kind == "remote", "backend.kind must be mock or remote");
    if (backend.kind == "mock") require(!backend.script.empty(), "backend.script is required for the mock backend");
    if (backend.kind == "remote") {
        require(!backend.endpoint.base_url.empty(), "backend.base_url is required for the remote backend");
        require(!backend.endpoint.model.empty(), "backend.model is required for the remote backend");
    }
    require(backend.endpoint.timeout_s > 0, "backend.timeout_s must be positive");
    require(backend.endpoint.retries >= 0, "backend.retries must not be negative");
    require(backend.endpoint.backoff_ms >= 0, "backend.backoff_ms must not be negative");
    require(backend.temperature >= 0.0 && backend.temperature <= 2.0, "backend.temperature must be in [0, 2]");
    require(backend.max_output > 0, "backend.max_output must be positive");

    require(embedder.kind == "fallback" || embedder.kind == "remote", "embedder.kind must be fallback or remote");
    require(embedder.dimension > 0, "embedder.dimension must be positive");
    if (embedder.kind == "remote") {
        require(!embedder.endpoint.base_url.empty(), "embedder.base_url is required for the remote embedder");
        require(!embedder.endpoint.model.empty(), "embedder.model is required for the remote embedder");
    }
    require(embedder.endpoint.timeout_s > 0, "embedder.timeout_s must be positive");

    retrieval.validate();
    budget.validate();
    limits.agent.validate();
    require(limits.test_timeout_s > 0, "limits.test_timeout_s must be positive");
    require(limits.validation_width > 0, "limits.validation_width must be positive");
    require(limits.label_width > 0, "limits.label_width must be positive");
}

std::string Config::render() const {
    std::string out;
    std::string section;
    for (const auto& f : fields()) {
        if (f.section != section) {
            if (!section.empty()) out += "\n";
            section = f.section;
            out += "[" + section + "]\n";
        }
        out += f.key + " = " + f.get(*this) + "\n";
    }
    return out;
}

Config parse(const std::string& text) {
    Config cfg;
    std::string section;
    int lineno = 0;
    for (const auto& raw : split_lines(text)) {
        ++lineno;
        const auto line = trim(raw);
        const auto where = "config line " + std::to_string(lineno);
        if (line.empty() || line[0] == '#') continue;
        if (line[0] == '[') {
            const auto close = line.find(']');
            if (close == std::string::npos) fail(where + ": unterminated section header");
            section = trim(line.substr(1, close - 1));
            bool known = false;
            for (const auto& f : fields()) known = known || f.section == section;
            if (!known) fail(where + ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(where + ": expected key = value");
        const auto key = trim(line.substr(0, eq));
        const Field* field = nullptr;
        for (const auto& f : fields()) {
            if (f.section == section && f.key == key) field = &f;
        }
        if (!field) fail(where + ": unknown key " + (section.empty() ? key : section + "." + key));
        field->set(cfg, parse_value(line.substr(eq + 1), where), where + " (" + section + "." + key + ")");
    }
    return cfg;
}

Config load(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) fail("cannot read config file " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    Config cfg = parse(ss.str());
    const auto base = std::filesystem::absolute(file).parent_path();
    for (std::string* p : {&cfg.backend.script, &cfg.paths.store, &cfg.paths.templates, &cfg.paths.workdir}) {
        if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
    }
    return cfg;
}

std::unique_ptr<llm::LlmBackend> make_backend(const Config& cfg) {
    if (cfg.backend.kind == "remote") return std::make_unique<llm::RemoteBackend>(cfg.backend.endpoint);
    if (cfg.backend.kind == "mock") {
        if (cfg.backend.script.empty()) fail("backend.script is required for the mock backend");
        return std::make_unique<llm::MockBackend>(llm::MockBackend::load_script(cfg.backend.script));
    }
    fail("backend.kind must be mock or remote");
}

std::unique_ptr<retrieval::Embedder> make_embedder(const Config& cfg) {
    const auto dim = static_cast<std::size_t>(cfg.embedder.dimension);
    if (cfg.embedder.kind == "remote") return std::make_unique<retrieval::RemoteEmbedder>(cfg.embedder.endpoint, dim);
    return std::make_unique<retrieval::FallbackEmbedder>(dim);
}

templates::TemplateSet make_templates(const Config& cfg) {
    if (cfg.paths.templates.empty()) return templates::TemplateSet::builtin();
    return templates::TemplateSet::load_dir(cfg.paths.templates);
}

agent::RepairConfig repair_config(const Config& cfg) {
    agent::RepairConfig rc;
    rc.retrieval = cfg.retrieval;
    rc.budget = cfg.budget;
    rc.limits = cfg.limits.agent;
    rc.validation.width = static_cast<std::size_t>(cfg.limits.validation_width);
    rc.validation.workdir = cfg.paths.workdir;
    rc.temperature = cfg.backend.temperature;
    rc.max_output = cfg.backend.max_output;
    return rc;
}

}  // namespace reinfix::config
