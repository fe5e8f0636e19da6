#pragma once

// Versioned prompt templates with {{name}} placeholders.

#include <filesystem>
#include <map>
#include <string>

namespace reinfix::templates {

class TemplateSet {
  public:
    /// The set compiled into the binary.
    static const TemplateSet& builtin();
    /// Reads every `<name>.txt` in `dir` plus a `VERSION` file; names missing
    /// from the directory fall back to the builtin text.
    static TemplateSet load_dir(const std::filesystem::path& dir);

    const std::string& version() const noexcept { return version_; }
    bool has(const std::string& name) const { return texts_.count(name) != 0; }
    const std::string& text(const std::string& name) const;

    /// Errors: CONFIG_ERROR for an unknown template or an unbound placeholder.
    std::string render(const std::string& name, const std::map<std::string, std::string>& vars) const;

  private:
    std::string version_;
    std::map<std::string, std::string> texts_;
};

/// Substitutes {{key}} occurrences. Errors: CONFIG_ERROR on unbound keys.
std::string substitute(const std::string& text, const std::map<std::string, std::string>& vars);

}  // namespace reinfix::templates
