#pragma once

// Code property graph over an analyzed source tree: files, classes, methods,
// variables, call sites, assignments, imports and control structures, linked by
// containment, definition/use, call, assignment, import and intraprocedural
// data-flow edges.

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace reinfix::cpg {

enum class NodeKind { file, class_decl, method, variable, call, assignment, import, control_struct };
enum class EdgeKind { contains, defines, uses, assigns, calls, imports, flows_to };

std::string_view to_string(NodeKind kind);
std::string_view to_string(EdgeKind kind);
std::optional<NodeKind> node_kind_from_string(std::string_view text);

using NodeId = std::uint32_t;

/// 1-indexed inclusive line range within one file.
struct Location {
    std::string path;
    int start_line = 0;
    int end_line = 0;

    auto operator<=>(const Location&) const = default;
};

struct SourceUnit {
    std::string path;  // relative, '/'-separated
    std::string content;
    std::string language_tag;
};

struct CpgNode {
    NodeId id = 0;
    NodeKind kind = NodeKind::file;
    std::string name;
    Location location;
    std::string snippet;
    int column = 0;  // column of the defining token, tie-break for canonical order

    std::string construct;  // CONTROL_STRUCT: if|while|for|switch|try
    std::string type_text;  // VARIABLE: declared type; METHOD: return type
    std::string role;       // VARIABLE: field|local|parameter|enum-constant|...; CLASS: class|interface|enum|record
    std::string detail;     // ASSIGNMENT: operator; FILE: parse error message; METHOD: parameter list
    std::string value;      // ASSIGNMENT: right-hand side text; IMPORT: "static" when a static import
    bool parse_error = false;
};

struct CpgEdge {
    NodeId src = 0;
    NodeId dst = 0;
    EdgeKind kind = EdgeKind::contains;
    int line = 0;         // USES: line of the use site
    std::string context;  // USES: return|condition|argument|assignment|update|expression
};

class CodePropertyGraph;

/// Accumulates nodes and edges while parsers run. Supports rollback so a file
/// that fails to parse contributes nothing but its FILE node.
class GraphBuilder {
  public:
    NodeId add_node(CpgNode node);
    void add_edge(NodeId src, NodeId dst, EdgeKind kind, int line = 0, std::string context = {});
    CpgNode& node(NodeId id) { return nodes_.at(id); }
    const CpgNode& node(NodeId id) const { return nodes_.at(id); }

    struct Checkpoint {
        std::size_t nodes;
        std::size_t edges;
    };
    Checkpoint checkpoint() const { return {nodes_.size(), edges_.size()}; }
    void rollback(Checkpoint cp);

    std::size_t node_count() const { return nodes_.size(); }

    CodePropertyGraph finish(std::map<std::string, SourceUnit> sources) &&;

  private:
    std::vector<CpgNode> nodes_;
    std::vector<CpgEdge> edges_;
};

class ParseError : public std::runtime_error {
  public:
    ParseError(int line, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
    int line() const noexcept { return line_; }

  private:
    int line_;
};

/// Grammar provider. Implementations add the inner nodes of one file below
/// `file_node`, throwing ParseError on malformed input.
class SourceParser {
  public:
    virtual ~SourceParser() = default;
    virtual std::string_view language_tag() const = 0;
    virtual bool accepts(const std::filesystem::path& file) const = 0;
    virtual void parse(const SourceUnit& unit, NodeId file_node, GraphBuilder& builder) const = 0;
};

std::shared_ptr<const SourceParser> default_parser();

class CodePropertyGraph {
  public:
    const std::vector<CpgNode>& nodes() const noexcept { return nodes_; }
    const std::vector<CpgEdge>& edges() const noexcept { return edges_; }
    const CpgNode& node(NodeId id) const { return nodes_.at(id); }

    std::vector<const CpgEdge*> out_edges(NodeId id, std::optional<EdgeKind> kind = std::nullopt) const;
    std::vector<const CpgEdge*> in_edges(NodeId id, std::optional<EdgeKind> kind = std::nullopt) const;

    std::span<const NodeId> find(NodeKind kind, const std::string& name) const;
    std::span<const NodeId> nodes_in_file(const std::string& path) const;

    /// All project paths whose relative path equals `file_name` or ends with
    /// "/" + `file_name`.
    std::vector<std::string> resolve_file(std::string_view file_name) const;

    std::vector<std::string> files() const;
    const SourceUnit* source(const std::string& path) const;

    /// Verbatim text of lines [start, end], joined by the file's own newlines,
    /// without the terminator of the last line.
    std::string line_slice(const std::string& path, int start_line, int end_line) const;

    /// Innermost node of `kind` that contains `id` through CONTAINS/DEFINES edges.
    std::optional<NodeId> enclosing(NodeId id, NodeKind kind) const;

    /// Canonical dump: nodes sorted by (path, start line, kind, name), edges by
    /// their endpoints' canonical positions. Ids are replaced by canonical ranks.
    nlohmann::json to_json() const;
    std::string content_hash() const;

  private:
    friend class GraphBuilder;

    std::vector<CpgNode> nodes_;
    std::vector<CpgEdge> edges_;
    std::vector<std::vector<std::size_t>> out_;
    std::vector<std::vector<std::size_t>> in_;
    std::map<std::pair<NodeKind, std::string>, std::vector<NodeId>> by_name_;
    std::map<std::string, std::vector<NodeId>> by_file_;
    std::map<std::string, SourceUnit> sources_;
};

struct BuildOptions {
    std::shared_ptr<const SourceParser> parser = default_parser();
};

/// Parses every accepted file under `project_root`. Errors: PROJECT_NOT_FOUND, NO_SOURCES.
CodePropertyGraph build_cpg(const std::filesystem::path& project_root, const BuildOptions& options = {});

/// A repair session's cached graph. Closing is idempotent; a closed handle
/// refuses queries with PROJECT_CLOSED.
class ProjectHandle {
  public:
    ProjectHandle() = default;

    const CodePropertyGraph& graph() const;
    const std::filesystem::path& root() const noexcept { return root_; }
    bool is_open() const noexcept { return graph_ != nullptr; }
    void close() noexcept { graph_.reset(); }

  private:
    friend ProjectHandle open_project(const std::filesystem::path&, const BuildOptions&);

    std::filesystem::path root_;
    std::shared_ptr<const CodePropertyGraph> graph_;
};

ProjectHandle open_project(const std::filesystem::path& project_root, const BuildOptions& options = {});
void close_project(ProjectHandle& handle) noexcept;

}  // namespace reinfix::cpg
