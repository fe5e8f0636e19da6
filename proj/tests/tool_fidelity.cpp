#include "tool_fidelity.hpp"

#include "reinfix/cpg.hpp"
#include "reinfix/ingredient_tools.hpp"
#include "scan_oracle.hpp"

#include <filesystem>
#include <set>
#include <sstream>

using namespace reinfix;

namespace {

oracle::Answer as_set(const tools::IngredientResult& r) {
    oracle::Answer a;
    for (const auto& h : r.hits) a.insert({h.location.path, h.location.start_line, std::string(cpg::to_string(h.kind))});
    return a;
}

std::string show(const oracle::Answer& a) {
    std::ostringstream out;
    out << "{";
    for (const auto& [p, l, k] : a) out << " " << p << ":" << l << ":" << k;
    out << " }";
    return out.str();
}

}  // namespace

FidelityReport check_tool_fidelity(const std::filesystem::path& root) {
    const auto g = cpg::build_cpg(root);
    const oracle::Project scan(root);
    FidelityReport report;

    auto compare = [&](const std::string& label, const tools::IngredientResult& got, const oracle::Answer& want) {
        ++report.queries;
        const auto have = as_set(got);
        if (have != want) report.mismatches.push_back(label + " got " + show(have) + " want " + show(want));
    };

    std::set<std::string> methods = scan.method_names();
    for (const auto& n : g.nodes()) {
        if (n.kind == cpg::NodeKind::call) methods.insert(n.name);
    }
    methods.insert("noSuchMethod");
    std::set<std::string> classes = scan.class_names();
    classes.insert("NoSuchClass");

    std::vector<std::string> files;
    for (const auto& f : scan.files()) files.push_back(std::filesystem::path(f.path).filename().string());
    files.push_back("Missing.java");

    for (const auto& file : files) {
        std::set<std::string> vars = scan.variable_names(file);
        vars.insert("nosuch");
        for (const auto& v : vars) {
            const std::string tag = "(" + v + ", " + file + ")";
            compare("identify_variable" + tag, tools::identify_variable(v, file, g), scan.identify_variable(v, file));
            compare("find_variable_assignments" + tag, tools::find_variable_assignments(v, file, g),
                    scan.find_variable_assignments(v, file));
            compare("track_variable_dataflow" + tag, tools::track_variable_dataflow(v, file, g),
                    scan.track_variable_dataflow(v, file));
        }
        for (const auto& m : methods) {
            const std::string tag = "(" + m + ", " + file + ")";
            compare("analyze_method_details" + tag, tools::analyze_method_details(m, file, g),
                    scan.analyze_method_details(m, file));
            compare("find_method_in_file" + tag, tools::find_method_in_file(m, file, g), scan.find_method_in_file(m, file));
        }
        compare("get_imports(" + file + ")", tools::get_imports(file, g), scan.get_imports(file));
    }
    for (const auto& m : methods) {
        compare("trace_method_usage(" + m + ")", tools::trace_method_usage(m, g), scan.trace_method_usage(m));
    }
    for (const auto& c : classes) {
        compare("find_class_loc(" + c + ")", tools::find_class_loc(c, g), scan.find_class_loc(c));
        compare("identify_class(" + c + ")", tools::identify_class(c, g), scan.identify_class(c));
    }
    return report;
}
