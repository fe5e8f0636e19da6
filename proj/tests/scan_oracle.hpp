#pragma once

// Line-scan ground truth for the ingredient tools on the shipped fixtures.
// It relies only on regular expressions and brace counting, and on the
// fixture conventions: one statement per line, lowercase variables,
// capitalized types, no shadowing.

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace oracle {

using Triple = std::tuple<std::string, int, std::string>;  // path, line, kind
using Answer = std::set<Triple>;

struct FileScan {
    std::string path;
    std::vector<std::string> lines;  // comments and literal contents blanked

    struct Decl {
        std::string name;
        int line;
        bool has_init;
    };
    std::vector<Decl> vars;

    struct Method {
        std::string name;
        int start;
        int end;
    };
    std::vector<Method> methods;
    std::vector<std::pair<std::string, int>> classes;
    std::vector<int> imports;
};

class Project {
  public:
    explicit Project(const std::filesystem::path& root);

    const std::vector<FileScan>& files() const { return files_; }
    std::set<std::string> variable_names(const std::string& path) const;
    std::set<std::string> method_names() const;
    std::set<std::string> class_names() const;

    Answer identify_variable(const std::string& var, const std::string& file) const;
    Answer find_variable_assignments(const std::string& var, const std::string& file) const;
    Answer track_variable_dataflow(const std::string& var, const std::string& file) const;
    Answer trace_method_usage(const std::string& method) const;
    Answer analyze_method_details(const std::string& method, const std::string& file) const;
    Answer find_method_in_file(const std::string& method, const std::string& file) const;
    Answer find_class_loc(const std::string& cls) const;
    Answer identify_class(const std::string& cls) const;
    Answer get_imports(const std::string& file) const;

  private:
    std::vector<const FileScan*> match(const std::string& file) const;

    std::vector<FileScan> files_;
};

}  // namespace oracle
