#pragma once

// Completion backends and the line-oriented agent reply grammar.

#include "reinfix/http_client.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace reinfix::llm {

struct Turn {
    std::string role;  // "user" | "assistant"
    std::string text;

    bool operator==(const Turn&) const = default;
};

struct ChatExchange {
    std::string system_text;
    std::vector<Turn> turns;
    double temperature = 1.0;
    int max_output = 1024;

    /// Errors: CONFIG_ERROR when roles do not alternate starting with user.
    void validate() const;
    const std::string& last_user_text() const;
    nlohmann::json to_json() const;
};

class LlmBackend {
  public:
    virtual ~LlmBackend() = default;
    /// Errors: BACKEND_UNAVAILABLE, SCRIPT_EXHAUSTED.
    virtual std::string complete(const ChatExchange& exchange) = 0;
    virtual std::string describe() const = 0;
};

struct ScriptEntry {
    std::optional<std::string> match;  // ECMAScript regex searched in the last user turn
    std::string response;
    bool repeat = false;  // never consumed

    bool operator==(const ScriptEntry&) const = default;
};

/// Each call returns the first not-yet-consumed entry whose pattern matches
/// the last user turn (entries without a pattern always match).
class MockBackend final : public LlmBackend {
  public:
    explicit MockBackend(std::vector<ScriptEntry> script);

    /// JSON array of {match?, response, repeat?} objects, or one object per line.
    static std::vector<ScriptEntry> load_script(const std::filesystem::path& path);
    static std::vector<ScriptEntry> parse_script(std::string_view text);

    std::string complete(const ChatExchange& exchange) override;
    std::string describe() const override { return "mock"; }

    std::size_t calls() const;
    std::size_t remaining() const;

  private:
    std::vector<ScriptEntry> script_;
    std::vector<std::optional<std::regex>> patterns_;
    std::vector<bool> consumed_;
    std::size_t calls_ = 0;
    mutable std::mutex mu_;
};

/// OpenAI-compatible `/chat/completions`.
class RemoteBackend final : public LlmBackend {
  public:
    explicit RemoteBackend(RemoteEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
    std::string complete(const ChatExchange& exchange) override;
    std::string describe() const override { return "remote:" + endpoint_.model; }

  private:
    RemoteEndpoint endpoint_;
};

// ---- agent reply grammar ----

using Args = std::vector<std::pair<std::string, std::string>>;

struct Thought {
    std::string text;
    bool operator==(const Thought&) const = default;
};

struct ToolCallRequest {
    std::string tool;
    Args args;
    std::string thought;
    bool operator==(const ToolCallRequest&) const = default;
};

struct FinalAnswer {
    std::string root_cause;
    std::vector<std::string> suggestions;
    std::string thought;
    bool operator==(const FinalAnswer&) const = default;
};

struct Malformed {
    std::string reason;
    bool operator==(const Malformed&) const = default;
};

using AgentOutput = std::variant<Thought, ToolCallRequest, FinalAnswer, Malformed>;

/// Recognizes `Thought:`, `Action:`, `Action Input:` and `Final Answer:`
/// lines; other lines continue the preceding field. Action Input is a
/// comma-separated list of key=value pairs. A Final Answer is a cause
/// paragraph followed by suggestions numbered `1.` or `1)`.
AgentOutput parse_agent_output(std::string_view text);
std::string render(const AgentOutput& output);

/// The sentinel line meaning "no root cause yet".
inline constexpr std::string_view kNoneSentinel = "ROOT CAUSE: NONE";
bool is_none_sentinel(std::string_view text);

/// Body of the first fenced code block, or nullopt.
std::optional<std::string> extract_code_block(std::string_view text);

}  // namespace reinfix::llm
