#include "reinfix/llm.hpp"

#include "reinfix/error.hpp"
#include "reinfix/hash.hpp"
#include "reinfix/text.hpp"

#include <cctype>

namespace reinfix::llm {

void ChatExchange::validate() const {
    for (std::size_t i = 0; i < turns.size(); ++i) {
        const char* want = i % 2 == 0 ? "user" : "assistant";
        if (turns[i].role != want) {
            throw Error(ErrorCode::config_error, "turn " + std::to_string(i) + " should be " + want);
        }
    }
    if (temperature < 0.0) {
        throw Error(ErrorCode::config_error, "temperature must be >= 0");
    }
}

const std::string& ChatExchange::last_user_text() const {
    static const std::string empty;
    for (auto it = turns.rbegin(); it != turns.rend(); ++it) {
        if (it->role == "user") return it->text;
    }
    return empty;
}

nlohmann::json ChatExchange::to_json() const {
    nlohmann::json ts = nlohmann::json::array();
    for (const auto& t : turns) ts.push_back({{"role", t.role}, {"text", t.text}});
    return {{"system", system_text}, {"turns", ts}, {"temperature", temperature}, {"max_output", max_output}};
}

// ---- mock ----

MockBackend::MockBackend(std::vector<ScriptEntry> script) : script_(std::move(script)), consumed_(script_.size()) {
    for (const auto& e : script_) {
        if (e.match) {
            try {
                patterns_.emplace_back(std::regex(*e.match));
            } catch (const std::regex_error& err) {
                throw Error(ErrorCode::config_error, "bad script pattern '" + *e.match + "': " + err.what());
            }
        } else {
            patterns_.emplace_back(std::nullopt);
        }
    }
}

std::vector<ScriptEntry> MockBackend::parse_script(std::string_view text) {
    auto entry = [](const nlohmann::json& j) {
        ScriptEntry e;
        if (j.is_string()) {
            e.response = j.get<std::string>();
            return e;
        }
        if (!j.is_object() || !j.contains("response") || !j["response"].is_string()) {
            throw Error(ErrorCode::config_error, "script entry needs a string 'response'");
        }
        e.response = j["response"].get<std::string>();
        if (j.contains("match") && !j["match"].is_null()) e.match = j["match"].get<std::string>();
        e.repeat = j.value("repeat", false);
        return e;
    };
    std::vector<ScriptEntry> out;
    const std::string body = trim(text);
    try {
        if (!body.empty() && body.front() == '[') {
            for (const auto& j : nlohmann::json::parse(body)) out.push_back(entry(j));
        } else {
            for (const auto& line : split_lines(body)) {
                if (!trim(line).empty()) out.push_back(entry(nlohmann::json::parse(line)));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::config_error, std::string("unreadable script: ") + e.what());
    }
    return out;
}

std::vector<ScriptEntry> MockBackend::load_script(const std::filesystem::path& path) {
    return parse_script(read_file(path));
}

std::string MockBackend::complete(const ChatExchange& exchange) {
    std::lock_guard lock(mu_);
    ++calls_;
    const std::string& last = exchange.last_user_text();
    for (std::size_t i = 0; i < script_.size(); ++i) {
        if (consumed_[i]) continue;
        if (patterns_[i] && !std::regex_search(last, *patterns_[i])) continue;
        if (!script_[i].repeat) consumed_[i] = true;
        return script_[i].response;
    }
    throw Error(ErrorCode::script_exhausted, "no script entry left for call " + std::to_string(calls_));
}

std::size_t MockBackend::calls() const {
    std::lock_guard lock(mu_);
    return calls_;
}

std::size_t MockBackend::remaining() const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (std::size_t i = 0; i < script_.size(); ++i) n += !consumed_[i];
    return n;
}

// ---- remote ----

std::string RemoteBackend::complete(const ChatExchange& exchange) {
    exchange.validate();
    nlohmann::json messages = nlohmann::json::array();
    if (!exchange.system_text.empty()) {
        messages.push_back({{"role", "system"}, {"content", exchange.system_text}});
    }
    for (const auto& t : exchange.turns) messages.push_back({{"role", t.role}, {"content", t.text}});
    const nlohmann::json body = {{"model", endpoint_.model},
                                 {"messages", messages},
                                 {"temperature", exchange.temperature},
                                 {"max_tokens", exchange.max_output}};
    const auto reply = post_json(endpoint_, "/chat/completions", body);
    try {
        const auto& content = reply.at("choices").at(0).at("message").at("content");
        return content.is_null() ? std::string() : content.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::backend_unavailable, std::string("malformed completion response: ") + e.what());
    }
}

// ---- grammar ----

namespace {

enum class Field { none, thought, action, input, final_answer };

bool starts_with_field(std::string_view line, std::string_view prefix, std::string& rest) {
    if (line.substr(0, prefix.size()) == prefix) {
        rest = std::string(line.substr(prefix.size()));
        return true;
    }
    return false;
}

bool is_identifier(std::string_view s) {
    if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) return false;
    for (char c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    }
    return true;
}

bool numbered(std::string_view line, std::string& rest) {
    std::size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t digits = i;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i == digits || i >= line.size() || (line[i] != '.' && line[i] != ')')) return false;
    ++i;
    if (i >= line.size() || (line[i] != ' ' && line[i] != '\t')) return false;
    rest = trim(line.substr(i));
    return true;
}

std::optional<Args> parse_args(std::string_view text, std::string& error) {
    Args out;
    std::vector<std::string> parts;
    std::string cur;
    bool quoted = false;
    for (char c : text) {
        if (c == '"') quoted = !quoted;
        if (c == ',' && !quoted) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    if (quoted) {
        error = "unterminated quote in Action Input";
        return std::nullopt;
    }
    for (const auto& raw : parts) {
        const std::string part = trim(raw);
        if (part.empty()) {
            if (parts.size() == 1) break;
            error = "empty argument in Action Input";
            return std::nullopt;
        }
        const auto eq = part.find('=');
        if (eq == std::string::npos) {
            error = "argument without '=': " + part;
            return std::nullopt;
        }
        std::string key = trim(part.substr(0, eq));
        std::string value = trim(part.substr(eq + 1));
        if (!is_identifier(key)) {
            error = "bad argument name: " + key;
            return std::nullopt;
        }
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        out.emplace_back(std::move(key), std::move(value));
    }
    return out;
}

std::string render_value(const std::string& v) {
    if (v.empty() || v.find(',') != std::string::npos || v != trim(v) || v.front() == '"') {
        return "\"" + v + "\"";
    }
    return v;
}

}  // namespace

AgentOutput parse_agent_output(std::string_view text) {
    std::optional<std::string> thought, action, input, final_answer;
    std::optional<std::string>* current = nullptr;
    for (const auto& raw : split_lines(text)) {
        std::string line = raw;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string stripped = [&] {
            std::size_t i = 0;
            while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
            return line.substr(i);
        }();
        std::string rest;
        std::optional<std::string>* target = nullptr;
        if (starts_with_field(stripped, "Thought:", rest)) {
            target = &thought;
        } else if (starts_with_field(stripped, "Action Input:", rest)) {
            target = &input;
        } else if (starts_with_field(stripped, "Action:", rest)) {
            target = &action;
        } else if (starts_with_field(stripped, "Final Answer:", rest)) {
            target = &final_answer;
        }
        if (target) {
            if (target->has_value()) {
                return Malformed{"repeated field: " + stripped.substr(0, stripped.find(':') + 1)};
            }
            *target = rest;
            current = target;
            continue;
        }
        if (!current) {
            if (!trim(line).empty()) {
                return Malformed{"text outside any field"};
            }
            continue;
        }
        **current += "\n" + line;
    }

    if (!thought && !action && !input && !final_answer) {
        return Malformed{"empty reply"};
    }
    const std::string thought_text = thought ? trim(*thought) : std::string();
    if (final_answer) {
        if (action || input) {
            return Malformed{"Final Answer together with Action"};
        }
        FinalAnswer fa;
        fa.thought = thought_text;
        std::vector<std::string> cause_lines;
        for (const auto& line : split_lines(*final_answer)) {
            std::string item;
            if (numbered(line, item)) {
                fa.suggestions.push_back(item);
            } else if (!fa.suggestions.empty()) {
                if (!trim(line).empty()) fa.suggestions.back() += "\n" + trim(line);
            } else {
                cause_lines.push_back(line);
            }
        }
        std::string cause;
        for (std::size_t i = 0; i < cause_lines.size(); ++i) cause += (i ? "\n" : "") + cause_lines[i];
        fa.root_cause = trim(cause);
        if (fa.root_cause.empty()) {
            return Malformed{"Final Answer without a cause"};
        }
        return fa;
    }
    if (input && !action) {
        return Malformed{"Action Input without Action"};
    }
    if (action) {
        ToolCallRequest req;
        req.thought = thought_text;
        req.tool = trim(*action);
        if (!is_identifier(req.tool)) {
            return Malformed{"bad tool name: " + req.tool};
        }
        if (input) {
            std::string error;
            auto args = parse_args(trim(*input), error);
            if (!args) return Malformed{error};
            req.args = std::move(*args);
        }
        return req;
    }
    if (thought_text.empty()) {
        return Malformed{"empty thought"};
    }
    return Thought{thought_text};
}

std::string render(const AgentOutput& output) {
    return std::visit(
        [](const auto& o) -> std::string {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, Thought>) {
                return "Thought: " + o.text;
            } else if constexpr (std::is_same_v<T, ToolCallRequest>) {
                std::string out = o.thought.empty() ? "" : "Thought: " + o.thought + "\n";
                out += "Action: " + o.tool + "\nAction Input: ";
                for (std::size_t i = 0; i < o.args.size(); ++i) {
                    out += (i ? ", " : "") + o.args[i].first + "=" + render_value(o.args[i].second);
                }
                return out;
            } else if constexpr (std::is_same_v<T, FinalAnswer>) {
                std::string out = o.thought.empty() ? "" : "Thought: " + o.thought + "\n";
                out += "Final Answer: " + o.root_cause;
                for (std::size_t i = 0; i < o.suggestions.size(); ++i) {
                    out += "\n" + std::to_string(i + 1) + ". " + o.suggestions[i];
                }
                return out;
            } else {
                return "Malformed: " + o.reason;
            }
        },
        output);
}

bool is_none_sentinel(std::string_view text) {
    for (const auto& line : split_lines(text)) {
        std::string t = trim(line);
        if (t.rfind("Final Answer:", 0) == 0) t = trim(t.substr(13));
        if (t == kNoneSentinel) return true;
    }
    return false;
}

std::optional<std::string> extract_code_block(std::string_view text) {
    const auto lines = split_lines(text);
    std::size_t i = 0;
    while (i < lines.size() && trim(lines[i]).rfind("```", 0) != 0) ++i;
    if (i == lines.size()) return std::nullopt;
    std::string body;
    bool first = true;
    for (++i; i < lines.size(); ++i) {
        std::string line = lines[i];
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).rfind("```", 0) == 0) return body;
        body += (first ? "" : "\n") + line;
        first = false;
    }
    return std::nullopt;
}

}  // namespace reinfix::llm
