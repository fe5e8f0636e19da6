#include "reinfix/cpg.hpp"

#include "reinfix/error.hpp"
#include "reinfix/hash.hpp"
#include "reinfix/java_syntax.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <set>
#include <tuple>

namespace reinfix::cpg {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, 8> kNodeKindNames = {
    "FILE", "CLASS", "METHOD", "VARIABLE", "CALL", "ASSIGNMENT", "IMPORT", "CONTROL_STRUCT",
};
constexpr std::array<std::string_view, 7> kEdgeKindNames = {
    "CONTAINS", "DEFINES", "USES", "ASSIGNS", "CALLS", "IMPORTS", "FLOWS_TO",
};

int count_lines(const std::string& content) {
    if (content.empty()) {
        return 1;
    }
    int lines = static_cast<int>(std::count(content.begin(), content.end(), '\n'));
    if (content.back() != '\n') {
        ++lines;
    }
    return std::max(lines, 1);
}

std::string simple_name(const std::string& qualified) {
    const auto dot = qualified.rfind('.');
    return dot == std::string::npos ? qualified : qualified.substr(dot + 1);
}

}  // namespace

std::string_view to_string(NodeKind kind) { return kNodeKindNames[static_cast<std::size_t>(kind)]; }
std::string_view to_string(EdgeKind kind) { return kEdgeKindNames[static_cast<std::size_t>(kind)]; }

std::optional<NodeKind> node_kind_from_string(std::string_view text) {
    for (std::size_t i = 0; i < kNodeKindNames.size(); ++i) {
        if (kNodeKindNames[i] == text) {
            return static_cast<NodeKind>(i);
        }
    }
    return std::nullopt;
}

NodeId GraphBuilder::add_node(CpgNode node) {
    node.id = static_cast<NodeId>(nodes_.size());
    nodes_.push_back(std::move(node));
    return nodes_.back().id;
}

void GraphBuilder::add_edge(NodeId src, NodeId dst, EdgeKind kind, int line, std::string context) {
    edges_.push_back(CpgEdge{src, dst, kind, line, std::move(context)});
}

void GraphBuilder::rollback(Checkpoint cp) {
    nodes_.resize(cp.nodes);
    edges_.resize(cp.edges);
}

CodePropertyGraph GraphBuilder::finish(std::map<std::string, SourceUnit> sources) && {
    CodePropertyGraph g;
    g.sources_ = std::move(sources);
    g.nodes_ = std::move(nodes_);

    // Drop exact duplicate edges; keep first-seen order.
    std::set<std::tuple<NodeId, NodeId, EdgeKind, int, std::string>> seen;
    for (auto& e : edges_) {
        if (seen.insert({e.src, e.dst, e.kind, e.line, e.context}).second) {
            g.edges_.push_back(std::move(e));
        }
    }

    for (auto& n : g.nodes_) {
        if (n.kind == NodeKind::file) {
            const auto* unit = g.source(n.location.path);
            n.snippet = unit ? unit->content : std::string{};
        } else {
            n.snippet = g.line_slice(n.location.path, n.location.start_line, n.location.end_line);
        }
        g.by_name_[{n.kind, n.name}].push_back(n.id);
        g.by_file_[n.location.path].push_back(n.id);
    }
    g.out_.resize(g.nodes_.size());
    g.in_.resize(g.nodes_.size());
    for (std::size_t i = 0; i < g.edges_.size(); ++i) {
        g.out_[g.edges_[i].src].push_back(i);
        g.in_[g.edges_[i].dst].push_back(i);
    }
    return g;
}

std::shared_ptr<const SourceParser> default_parser() {
    static const auto parser = std::make_shared<const java::JavaSubsetParser>();
    return parser;
}

std::vector<const CpgEdge*> CodePropertyGraph::out_edges(NodeId id, std::optional<EdgeKind> kind) const {
    std::vector<const CpgEdge*> out;
    if (id >= out_.size()) {
        return out;
    }
    for (std::size_t i : out_[id]) {
        if (!kind || edges_[i].kind == *kind) {
            out.push_back(&edges_[i]);
        }
    }
    return out;
}

std::vector<const CpgEdge*> CodePropertyGraph::in_edges(NodeId id, std::optional<EdgeKind> kind) const {
    std::vector<const CpgEdge*> out;
    if (id >= in_.size()) {
        return out;
    }
    for (std::size_t i : in_[id]) {
        if (!kind || edges_[i].kind == *kind) {
            out.push_back(&edges_[i]);
        }
    }
    return out;
}

std::span<const NodeId> CodePropertyGraph::find(NodeKind kind, const std::string& name) const {
    auto it = by_name_.find({kind, name});
    if (it == by_name_.end()) {
        return {};
    }
    return it->second;
}

std::span<const NodeId> CodePropertyGraph::nodes_in_file(const std::string& path) const {
    auto it = by_file_.find(path);
    if (it == by_file_.end()) {
        return {};
    }
    return it->second;
}

std::vector<std::string> CodePropertyGraph::resolve_file(std::string_view file_name) const {
    std::vector<std::string> out;
    if (file_name.empty()) {
        return out;
    }
    const std::string suffix = "/" + std::string(file_name);
    for (const auto& [path, unit] : sources_) {
        if (path == file_name ||
            (path.size() > suffix.size() && path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0)) {
            out.push_back(path);
        }
    }
    return out;
}

std::vector<std::string> CodePropertyGraph::files() const {
    std::vector<std::string> out;
    out.reserve(sources_.size());
    for (const auto& [path, unit] : sources_) {
        out.push_back(path);
    }
    return out;
}

const SourceUnit* CodePropertyGraph::source(const std::string& path) const {
    auto it = sources_.find(path);
    return it == sources_.end() ? nullptr : &it->second;
}

std::string CodePropertyGraph::line_slice(const std::string& path, int start_line, int end_line) const {
    const SourceUnit* unit = source(path);
    if (!unit || start_line < 1 || end_line < start_line) {
        return {};
    }
    const std::string& text = unit->content;
    std::size_t begin = 0;
    for (int line = 1; line < start_line; ++line) {
        begin = text.find('\n', begin);
        if (begin == std::string::npos) {
            return {};
        }
        ++begin;
    }
    std::size_t end = begin;
    for (int line = start_line; line <= end_line; ++line) {
        end = text.find('\n', end);
        if (end == std::string::npos) {
            end = text.size();
            break;
        }
        if (line < end_line) {
            ++end;
        }
    }
    std::string out = text.substr(begin, end - begin);
    if (!out.empty() && out.back() == '\r') {
        out.pop_back();
    }
    return out;
}

std::optional<NodeId> CodePropertyGraph::enclosing(NodeId id, NodeKind kind) const {
    std::set<NodeId> visited;
    NodeId current = id;
    while (visited.insert(current).second) {
        std::optional<NodeId> parent;
        for (const CpgEdge* e : in_edges(current)) {
            if (e->kind == EdgeKind::contains || e->kind == EdgeKind::defines) {
                parent = e->src;
                break;
            }
        }
        if (!parent) {
            return std::nullopt;
        }
        if (nodes_[*parent].kind == kind) {
            return parent;
        }
        current = *parent;
    }
    return std::nullopt;
}

nlohmann::json CodePropertyGraph::to_json() const {
    std::vector<NodeId> order(nodes_.size());
    std::iota(order.begin(), order.end(), NodeId{0});
    auto key = [this](NodeId id) {
        const CpgNode& n = nodes_[id];
        return std::tie(n.location.path, n.location.start_line, n.kind, n.name, n.column, n.location.end_line);
    };
    std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return key(a) < key(b); });
    std::vector<std::size_t> rank(nodes_.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        rank[order[i]] = i;
    }

    nlohmann::json nodes = nlohmann::json::array();
    for (NodeId id : order) {
        const CpgNode& n = nodes_[id];
        nlohmann::json j = {
            {"id", rank[id]},
            {"kind", to_string(n.kind)},
            {"name", n.name},
            {"path", n.location.path},
            {"start_line", n.location.start_line},
            {"end_line", n.location.end_line},
        };
        if (!n.construct.empty()) j["construct"] = n.construct;
        if (!n.type_text.empty()) j["type"] = n.type_text;
        if (!n.role.empty()) j["role"] = n.role;
        if (!n.detail.empty()) j["detail"] = n.detail;
        if (!n.value.empty()) j["value"] = n.value;
        if (n.parse_error) j["parse_error"] = true;
        nodes.push_back(std::move(j));
    }

    std::vector<std::size_t> edge_order(edges_.size());
    std::iota(edge_order.begin(), edge_order.end(), std::size_t{0});
    auto edge_key = [&](std::size_t i) {
        const CpgEdge& e = edges_[i];
        return std::make_tuple(rank[e.src], rank[e.dst], e.kind, e.line, std::cref(e.context));
    };
    std::sort(edge_order.begin(), edge_order.end(),
              [&](std::size_t a, std::size_t b) { return edge_key(a) < edge_key(b); });
    nlohmann::json edges = nlohmann::json::array();
    for (std::size_t i : edge_order) {
        const CpgEdge& e = edges_[i];
        nlohmann::json j = {{"src", rank[e.src]}, {"dst", rank[e.dst]}, {"kind", to_string(e.kind)}};
        if (e.line != 0) j["line"] = e.line;
        if (!e.context.empty()) j["context"] = e.context;
        edges.push_back(std::move(j));
    }
    return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

std::string CodePropertyGraph::content_hash() const { return sha256_hex(to_json().dump()); }

CodePropertyGraph build_cpg(const fs::path& project_root, const BuildOptions& options) {
    std::error_code ec;
    if (!fs::is_directory(project_root, ec)) {
        throw Error(ErrorCode::project_not_found, project_root.string());
    }
    const SourceParser& parser = *options.parser;

    std::vector<std::string> paths;
    for (auto it = fs::recursive_directory_iterator(project_root, ec); it != fs::recursive_directory_iterator();
         it.increment(ec)) {
        if (ec) {
            break;
        }
        const auto& p = it->path();
        if (it->is_directory() && p.filename().string().starts_with(".")) {
            it.disable_recursion_pending();
            continue;
        }
        if (it->is_regular_file() && parser.accepts(p)) {
            paths.push_back(fs::relative(p, project_root).generic_string());
        }
    }
    if (paths.empty()) {
        throw Error(ErrorCode::no_sources, project_root.string());
    }
    std::sort(paths.begin(), paths.end());

    GraphBuilder builder;
    std::map<std::string, SourceUnit> sources;
    for (const auto& rel : paths) {
        SourceUnit unit{rel, read_file(project_root / rel), std::string(parser.language_tag())};
        CpgNode file;
        file.kind = NodeKind::file;
        file.name = fs::path(rel).filename().string();
        file.location = {rel, 1, count_lines(unit.content)};
        const NodeId file_id = builder.add_node(std::move(file));
        const auto cp = builder.checkpoint();
        try {
            parser.parse(unit, file_id, builder);
        } catch (const std::exception& e) {
            builder.rollback(cp);
            builder.node(file_id).parse_error = true;
            builder.node(file_id).detail = e.what();
        }
        sources.emplace(rel, std::move(unit));
    }

    // Cross-file links: call sites to same-named methods, imports to classes.
    std::map<std::string, std::vector<NodeId>> methods, classes;
    for (NodeId id = 0; id < builder.node_count(); ++id) {
        const CpgNode& n = builder.node(id);
        if (n.kind == NodeKind::method) {
            methods[n.name].push_back(id);
        } else if (n.kind == NodeKind::class_decl && !n.name.empty()) {
            classes[n.name].push_back(id);
        }
    }
    const auto count = static_cast<NodeId>(builder.node_count());
    for (NodeId id = 0; id < count; ++id) {
        const CpgNode& n = builder.node(id);
        if (n.kind == NodeKind::call) {
            if (auto it = methods.find(n.name); it != methods.end()) {
                for (NodeId m : it->second) {
                    builder.add_edge(id, m, EdgeKind::calls);
                }
            }
        } else if (n.kind == NodeKind::import && n.value != "static") {
            if (auto it = classes.find(simple_name(n.name)); it != classes.end()) {
                for (NodeId c : it->second) {
                    builder.add_edge(id, c, EdgeKind::imports);
                }
            }
        }
    }
    return std::move(builder).finish(std::move(sources));
}

const CodePropertyGraph& ProjectHandle::graph() const {
    if (!graph_) {
        throw Error(ErrorCode::project_closed, root_.string());
    }
    return *graph_;
}

ProjectHandle open_project(const fs::path& project_root, const BuildOptions& options) {
    ProjectHandle handle;
    handle.root_ = project_root;
    handle.graph_ = std::make_shared<const CodePropertyGraph>(build_cpg(project_root, options));
    return handle;
}

void close_project(ProjectHandle& handle) noexcept { handle.close(); }

}  // namespace reinfix::cpg
