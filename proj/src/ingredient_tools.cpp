#include "reinfix/ingredient_tools.hpp"

#include <algorithm>
#include <set>
#include <tuple>

namespace reinfix::tools {

using cpg::CpgNode;
using cpg::EdgeKind;
using cpg::NodeId;
using cpg::NodeKind;

namespace {

// Within one line: call sites, then assignments, then plain variable hits.
int kind_rank(NodeKind kind) {
    switch (kind) {
        case NodeKind::file: return 0;
        case NodeKind::import: return 1;
        case NodeKind::class_decl: return 2;
        case NodeKind::method: return 3;
        case NodeKind::control_struct: return 4;
        case NodeKind::call: return 5;
        case NodeKind::assignment: return 6;
        case NodeKind::variable: return 7;
    }
    return 8;
}

void sort_canonical(std::vector<Hit>& hits) {
    std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
        return std::forward_as_tuple(a.location.path, a.location.start_line, kind_rank(a.kind)) <
               std::forward_as_tuple(b.location.path, b.location.start_line, kind_rank(b.kind));
    });
}

IngredientResult start(std::string tool, std::vector<std::pair<std::string, std::string>> args) {
    IngredientResult r;
    r.tool = std::move(tool);
    r.query_args = std::move(args);
    return r;
}

IngredientResult finish(IngredientResult r, std::string_view reason_if_empty) {
    sort_canonical(r.hits);
    if (r.hits.empty() && !r.empty_reason) {
        r.empty_reason = std::string(reason_if_empty);
    }
    return r;
}

Hit node_hit(const CpgNode& n, std::string note) {
    return Hit{n.location, n.snippet, std::move(note), n.kind};
}

Hit line_hit(const Graph& g, const std::string& path, int line, NodeKind kind, std::string note) {
    return Hit{{path, line, line}, g.line_slice(path, line, line), std::move(note), kind};
}

std::vector<const CpgNode*> nodes_named(const Graph& g, const std::string& path, NodeKind kind,
                                        const std::string& name) {
    std::vector<const CpgNode*> out;
    for (NodeId id : g.nodes_in_file(path)) {
        const CpgNode& n = g.node(id);
        if (n.kind == kind && n.name == name) {
            out.push_back(&n);
        }
    }
    return out;
}

std::string join(const std::vector<std::string>& items, std::string_view sep = ", ") {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) {
            out += sep;
        }
        out += s;
    }
    return out;
}

std::string describe_target(const Graph& g, const CpgNode& consumer) {
    if (consumer.kind == NodeKind::call) {
        return consumer.name + "()";
    }
    if (consumer.kind == NodeKind::assignment) {
        return consumer.name.empty() ? std::string("assignment") : "assignment to " + consumer.name;
    }
    (void)g;
    return std::string(cpg::to_string(consumer.kind));
}

bool is_definition_line(const Graph& g, const std::string& path, int line, const std::string& name) {
    for (const CpgNode* v : nodes_named(g, path, NodeKind::variable, name)) {
        if (v->location.start_line == line) {
            return true;
        }
    }
    return false;
}

}  // namespace

IngredientResult identify_variable(const std::string& var_name, const std::string& file_name, const Graph& g) {
    auto r = start("identify_variable", {{"varName", var_name}, {"fileName", file_name}});
    const auto paths = g.resolve_file(file_name);
    if (paths.empty()) {
        r.empty_reason = "file not in project";
        return r;
    }
    for (const auto& path : paths) {
        std::map<int, std::set<std::string>> use_lines;
        for (const CpgNode* v : nodes_named(g, path, NodeKind::variable, var_name)) {
            std::string note = "definition (" + (v->role.empty() ? std::string("variable") : v->role) + ")";
            if (!v->type_text.empty()) {
                note += ": " + v->type_text + " " + v->name;
            }
            r.hits.push_back(node_hit(*v, note));
            for (const auto* e : g.in_edges(v->id, EdgeKind::uses)) {
                use_lines[e->line].insert(e->context);
            }
            for (const auto* e : g.in_edges(v->id, EdgeKind::assigns)) {
                const CpgNode& a = g.node(e->src);
                if (a.role != "initializer") {
                    use_lines[a.location.start_line].insert("write");
                }
            }
        }
        for (const auto& [line, contexts] : use_lines) {
            if (line <= 0 || is_definition_line(g, path, line, var_name)) {
                continue;
            }
            r.hits.push_back(line_hit(g, path, line, NodeKind::variable,
                                      "use (" + join({contexts.begin(), contexts.end()}) + ")"));
        }
    }
    return finish(std::move(r), "no variable of that name");
}

IngredientResult find_variable_assignments(const std::string& var_name, const std::string& file_name, const Graph& g) {
    auto r = start("find_variable_assignments", {{"varName", var_name}, {"fileName", file_name}});
    const auto paths = g.resolve_file(file_name);
    if (paths.empty()) {
        r.empty_reason = "file not in project";
        return r;
    }
    for (const auto& path : paths) {
        for (const CpgNode* v : nodes_named(g, path, NodeKind::variable, var_name)) {
            for (const auto* e : g.in_edges(v->id, EdgeKind::assigns)) {
                const CpgNode& a = g.node(e->src);
                std::string note = var_name + " " + a.detail;
                if (!a.value.empty()) {
                    note += " " + a.value;
                }
                if (a.role == "initializer") {
                    note += " (initializer)";
                }
                r.hits.push_back(node_hit(a, note));
            }
        }
    }
    return finish(std::move(r), "no assignments to that variable");
}

IngredientResult track_variable_dataflow(const std::string& var_name, const std::string& file_name, const Graph& g) {
    auto r = start("track_variable_dataflow", {{"varName", var_name}, {"fileName", file_name}});
    const auto paths = g.resolve_file(file_name);
    if (paths.empty()) {
        r.empty_reason = "file not in project";
        return r;
    }
    std::set<std::tuple<std::string, int, NodeKind, std::string>> seen;
    auto add = [&](Hit h) {
        if (seen.insert({h.location.path, h.location.start_line, h.kind, h.note}).second) {
            r.hits.push_back(std::move(h));
        }
    };
    for (const auto& path : paths) {
        for (const CpgNode* v : nodes_named(g, path, NodeKind::variable, var_name)) {
            std::string def_note = "definition: " + (v->type_text.empty() ? std::string() : v->type_text + " ") + v->name;
            std::vector<const CpgNode*> sources;
            for (const auto* e : g.in_edges(v->id, EdgeKind::assigns)) {
                const CpgNode& a = g.node(e->src);
                if (a.role == "initializer") {
                    def_note += " = " + a.value;
                } else {
                    add(node_hit(a, "source-of " + var_name + ": " + a.detail + (a.value.empty() ? "" : " " + a.value)));
                }
                sources.push_back(&a);
            }
            add(node_hit(*v, def_note));
            for (const CpgNode* a : sources) {
                for (const auto* f : g.in_edges(a->id, EdgeKind::flows_to)) {
                    const CpgNode& src = g.node(f->src);
                    if (src.kind == NodeKind::call) {
                        add(node_hit(src, "source-of " + var_name + ": result of " + src.name + "()"));
                    }
                }
            }
            for (const auto* u : g.in_edges(v->id, EdgeKind::uses)) {
                if (u->context == "update") {
                    continue;
                }
                const CpgNode& consumer = g.node(u->src);
                if (consumer.kind == NodeKind::call || consumer.kind == NodeKind::assignment) {
                    add(line_hit(g, path, u->line, consumer.kind, "flows-into " + describe_target(g, consumer)));
                } else {
                    add(line_hit(g, path, u->line, NodeKind::variable, "flows-into " + u->context));
                }
            }
        }
    }
    return finish(std::move(r), "no variable of that name");
}

IngredientResult trace_method_usage(const std::string& method_name, const Graph& g) {
    auto r = start("trace_method_usage", {{"methodName", method_name}});
    for (NodeId id : g.find(NodeKind::call, method_name)) {
        const CpgNode& call = g.node(id);
        std::string note = "call to " + method_name + "()";
        if (auto m = g.enclosing(id, NodeKind::method)) {
            note += " in " + g.node(*m).name;
        }
        note += " (" + call.location.path + ")";
        r.hits.push_back(node_hit(call, note));
    }
    return finish(std::move(r), "no call sites");
}

IngredientResult analyze_method_details(const std::string& method_name, const std::string& file_name, const Graph& g) {
    auto r = start("analyze_method_details", {{"methodName", method_name}, {"fileName", file_name}});
    const auto paths = g.resolve_file(file_name);
    if (paths.empty()) {
        r.empty_reason = "file not in project";
        return r;
    }
    for (const auto& path : paths) {
        for (const CpgNode* m : nodes_named(g, path, NodeKind::method, method_name)) {
            std::vector<std::string> params, locals, calls;
            for (const auto* e : g.out_edges(m->id, EdgeKind::defines)) {
                const CpgNode& v = g.node(e->dst);
                (v.role == "parameter" ? params : locals).push_back(v.name);
            }
            for (const auto* e : g.out_edges(m->id, EdgeKind::calls)) {
                const CpgNode& c = g.node(e->dst);
                if (c.kind == NodeKind::call && std::find(calls.begin(), calls.end(), c.name) == calls.end()) {
                    calls.push_back(c.name);
                }
            }
            std::string note = "params [" + join(params) + "]; locals [" + join(locals) + "]; calls [" + join(calls) + "]";
            if (!m->type_text.empty()) {
                note += "; returns " + m->type_text;
            }
            r.hits.push_back(node_hit(*m, note));
        }
    }
    return finish(std::move(r), "no method of that name in file");
}

IngredientResult find_method_in_file(const std::string& method_name, const std::string& file_name, const Graph& g) {
    auto r = start("find_method_in_file", {{"methodName", method_name}, {"fileName", file_name}});
    const auto paths = g.resolve_file(file_name);
    if (paths.empty()) {
        r.empty_reason = "file not in project";
        return r;
    }
    bool any_method = false;
    for (const auto& path : paths) {
        for (const CpgNode* m : nodes_named(g, path, NodeKind::method, method_name)) {
            any_method = true;
            std::vector<NodeId> stack{m->id};
            std::vector<const CpgNode*> found;
            while (!stack.empty()) {
                NodeId cur = stack.back();
                stack.pop_back();
                for (const auto* e : g.out_edges(cur, EdgeKind::contains)) {
                    const CpgNode& child = g.node(e->dst);
                    if (child.kind == NodeKind::control_struct) {
                        found.push_back(&child);
                        stack.push_back(child.id);
                    }
                }
            }
            std::sort(found.begin(), found.end(), [](const CpgNode* a, const CpgNode* b) {
                return std::tie(a->location.start_line, a->column) < std::tie(b->location.start_line, b->column);
            });
            for (const CpgNode* c : found) {
                r.hits.push_back(node_hit(*c, c->construct + " in " + method_name));
            }
        }
    }
    if (!any_method) {
        r.empty_reason = "no method of that name in file";
    }
    return finish(std::move(r), "no control structures");
}

IngredientResult find_class_loc(const std::string& class_name, const Graph& g) {
    auto r = start("find_class_loc", {{"className", class_name}});
    if (!class_name.empty()) {
        for (NodeId id : g.find(NodeKind::class_decl, class_name)) {
            const CpgNode& c = g.node(id);
            const int line = c.location.start_line;
            r.hits.push_back(line_hit(g, c.location.path, line, NodeKind::class_decl,
                                      c.role + " " + c.name + " defined in " + c.location.path + " lines " +
                                          std::to_string(line) + "-" + std::to_string(c.location.end_line)));
        }
    }
    return finish(std::move(r), "no class of that name");
}

IngredientResult identify_class(const std::string& class_name, const Graph& g) {
    auto r = start("identify_class", {{"className", class_name}});
    if (!class_name.empty()) {
        for (NodeId id : g.find(NodeKind::class_decl, class_name)) {
            const CpgNode& c = g.node(id);
            std::vector<std::string> fields, methods, types;
            for (const auto* e : g.out_edges(id, EdgeKind::defines)) {
                fields.push_back(g.node(e->dst).name);
            }
            for (const auto* e : g.out_edges(id, EdgeKind::contains)) {
                const CpgNode& m = g.node(e->dst);
                if (m.kind == NodeKind::method) {
                    methods.push_back(m.name);
                } else if (m.kind == NodeKind::class_decl && !m.name.empty()) {
                    types.push_back(m.name);
                }
            }
            std::string note = c.role + " " + c.name + "; fields [" + join(fields) + "]; methods [" + join(methods) + "]";
            if (!types.empty()) {
                note += "; nested [" + join(types) + "]";
            }
            r.hits.push_back(node_hit(c, note));
        }
    }
    return finish(std::move(r), "no class of that name");
}

IngredientResult get_imports(const std::string& file_name, const Graph& g) {
    auto r = start("get_imports", {{"fileName", file_name}});
    const auto paths = g.resolve_file(file_name);
    if (paths.empty()) {
        r.empty_reason = "file not in project";
        return r;
    }
    for (const auto& path : paths) {
        for (NodeId id : g.nodes_in_file(path)) {
            const CpgNode& n = g.node(id);
            if (n.kind == NodeKind::import) {
                r.hits.push_back(node_hit(n, n.value == "static" ? "static import " + n.name : "import " + n.name));
            }
        }
    }
    return finish(std::move(r), "no imports");
}

std::string IngredientResult::render(std::size_t limit) const {
    std::string out = "[" + tool + "]";
    for (std::size_t i = 0; i < query_args.size(); ++i) {
        out += (i == 0 ? " " : ", ") + query_args[i].first + "=" + query_args[i].second;
    }
    out += "\n";
    if (hits.empty()) {
        out += "(no results: " + empty_reason.value_or("empty") + ")\n";
    }
    for (const auto& h : hits) {
        out += "--- " + h.location.path + ":" + std::to_string(h.location.start_line);
        if (h.location.end_line != h.location.start_line) {
            out += "-" + std::to_string(h.location.end_line);
        }
        out += " " + std::string(cpg::to_string(h.kind)) + " | " + h.note + "\n";
        out += h.snippet + "\n";
    }
    if (out.size() <= limit) {
        return out;
    }
    std::size_t cut = limit > kTruncationMarker.size() ? limit - kTruncationMarker.size() : 0;
    while (cut > 0 && (static_cast<unsigned char>(out[cut]) & 0xC0) == 0x80) {
        --cut;  // keep UTF-8 sequences whole
    }
    out.resize(cut);
    out += kTruncationMarker;
    return out.substr(0, limit);
}

nlohmann::json IngredientResult::to_json() const {
    nlohmann::json args = nlohmann::json::array();
    for (const auto& [k, v] : query_args) {
        args.push_back({{"name", k}, {"value", v}});
    }
    nlohmann::json hs = nlohmann::json::array();
    for (const auto& h : hits) {
        hs.push_back({{"path", h.location.path},
                      {"start_line", h.location.start_line},
                      {"end_line", h.location.end_line},
                      {"kind", cpg::to_string(h.kind)},
                      {"note", h.note},
                      {"snippet", h.snippet}});
    }
    nlohmann::json j = {{"tool", tool}, {"query_args", args}, {"hits", hs}};
    j["empty_reason"] = empty_reason ? nlohmann::json(*empty_reason) : nlohmann::json(nullptr);
    return j;
}

const std::vector<ToolSpec>& registry() {
    static const std::vector<ToolSpec> specs = {
        {"identify_variable", Level::variable, {"varName", "fileName"}, "Variable definitions and usages in a file"},
        {"find_variable_assignments", Level::variable, {"varName", "fileName"}, "All assignments to a variable"},
        {"track_variable_dataflow", Level::variable, {"varName", "fileName"}, "Value sources and destinations of a variable"},
        {"trace_method_usage", Level::method, {"methodName"}, "Every call site of a method, across files"},
        {"analyze_method_details", Level::method, {"methodName", "fileName"}, "Method body, parameters, locals and calls"},
        {"find_method_in_file", Level::method, {"methodName", "fileName"}, "Control structures (if, while, for, switch, try) of a method"},
        {"find_class_loc", Level::class_level, {"className"}, "Where a class is defined"},
        {"identify_class", Level::class_level, {"className"}, "Full class definition including attributes and methods"},
        {"get_imports", Level::file, {"fileName"}, "Import statements of a file"},
    };
    return specs;
}

const ToolSpec* find_tool(std::string_view name) {
    for (const auto& spec : registry()) {
        if (spec.name == name) {
            return &spec;
        }
    }
    return nullptr;
}

IngredientResult invoke(std::string_view tool, const std::map<std::string, std::string>& args, const Graph& g) {
    const ToolSpec* spec = find_tool(tool);
    if (!spec) {
        IngredientResult r;
        r.tool = std::string(tool);
        for (const auto& kv : args) {
            r.query_args.push_back(kv);
        }
        r.empty_reason = "unknown tool";
        return r;
    }
    auto arg = [&](const std::string& param) {
        if (auto it = args.find(param); it != args.end()) {
            return it->second;
        }
        const std::string alias = param == "fileName" ? "file" : "name";
        if (auto it = args.find(alias); it != args.end()) {
            return it->second;
        }
        return std::string{};
    };
    const std::string& n = spec->name;
    if (n == "identify_variable") return identify_variable(arg("varName"), arg("fileName"), g);
    if (n == "find_variable_assignments") return find_variable_assignments(arg("varName"), arg("fileName"), g);
    if (n == "track_variable_dataflow") return track_variable_dataflow(arg("varName"), arg("fileName"), g);
    if (n == "trace_method_usage") return trace_method_usage(arg("methodName"), g);
    if (n == "analyze_method_details") return analyze_method_details(arg("methodName"), arg("fileName"), g);
    if (n == "find_method_in_file") return find_method_in_file(arg("methodName"), arg("fileName"), g);
    if (n == "find_class_loc") return find_class_loc(arg("className"), g);
    if (n == "identify_class") return identify_class(arg("className"), g);
    return get_imports(arg("fileName"), g);
}

}  // namespace reinfix::tools
