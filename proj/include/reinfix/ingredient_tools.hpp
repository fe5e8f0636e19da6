#pragma once

// The nine internal-ingredient queries. All are pure functions over an
// immutable graph; absence is an empty result, never an error.

#include "reinfix/cpg.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace reinfix::tools {

inline constexpr std::size_t kRenderLimit = 4000;
inline constexpr std::string_view kTruncationMarker = "\n[... truncated ...]";

struct Hit {
    cpg::Location location;
    std::string snippet;  // verbatim slice of the file at `location`
    std::string note;
    cpg::NodeKind kind = cpg::NodeKind::variable;

    bool operator==(const Hit&) const = default;
};

struct IngredientResult {
    std::string tool;
    std::vector<std::pair<std::string, std::string>> query_args;
    std::vector<Hit> hits;
    std::optional<std::string> empty_reason;

    /// Plain-text block shown to the agent, at most `limit` characters.
    std::string render(std::size_t limit = kRenderLimit) const;
    nlohmann::json to_json() const;

    bool operator==(const IngredientResult&) const = default;
};

using Graph = cpg::CodePropertyGraph;

IngredientResult identify_variable(const std::string& var_name, const std::string& file_name, const Graph& g);
IngredientResult find_variable_assignments(const std::string& var_name, const std::string& file_name, const Graph& g);
IngredientResult track_variable_dataflow(const std::string& var_name, const std::string& file_name, const Graph& g);
IngredientResult trace_method_usage(const std::string& method_name, const Graph& g);
IngredientResult analyze_method_details(const std::string& method_name, const std::string& file_name, const Graph& g);
IngredientResult find_method_in_file(const std::string& method_name, const std::string& file_name, const Graph& g);
IngredientResult find_class_loc(const std::string& class_name, const Graph& g);
IngredientResult identify_class(const std::string& class_name, const Graph& g);
IngredientResult get_imports(const std::string& file_name, const Graph& g);

enum class Level { variable, method, class_level, file };

struct ToolSpec {
    std::string name;
    Level level;
    std::vector<std::string> params;  // e.g. {"varName", "fileName"}
    std::string description;
};

/// Table of the nine tools in a fixed order.
const std::vector<ToolSpec>& registry();
const ToolSpec* find_tool(std::string_view name);

/// Dispatches by tool name. Missing arguments are treated as empty strings,
/// unknown tools yield an empty result. Accepts `name` and `file` as aliases
/// for the tool's identifier and file parameters.
IngredientResult invoke(std::string_view tool, const std::map<std::string, std::string>& args, const Graph& g);

}  // namespace reinfix::tools
