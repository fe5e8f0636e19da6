#pragma once

// Run configuration: one TOML-style file of [sections] and `key = value`
// lines. Strings are double-quoted, numbers bare, booleans true/false.
// Secrets never live here; remote endpoints name the env var holding the key.

#include "reinfix/agent.hpp"
#include "reinfix/embedding.hpp"
#include "reinfix/http_client.hpp"
#include "reinfix/llm.hpp"
#include "reinfix/retrieval.hpp"
#include "reinfix/templates.hpp"

#include <filesystem>
#include <memory>
#include <string>

namespace reinfix::config {

struct BackendConfig {
    std::string kind = "mock";  // mock | remote
    std::string script;         // mock script file
    RemoteEndpoint endpoint;
    double temperature = 1.0;
    int max_output = 2048;

    bool operator==(const BackendConfig&) const = default;
};

struct EmbedderConfig {
    std::string kind = "fallback";  // fallback | remote
    int dimension = 256;
    RemoteEndpoint endpoint;

    bool operator==(const EmbedderConfig&) const = default;
};

struct LimitsConfig {
    agent::AgentLimits agent;
    int test_timeout_s = 60;
    int validation_width = 1;
    int label_width = 4;

    bool operator==(const LimitsConfig&) const = default;
};

struct PathsConfig {
    std::string store;
    std::string templates;  // empty: builtin templates
    std::string workdir;    // empty: system temp directory

    bool operator==(const PathsConfig&) const = default;
};

struct Config {
    BackendConfig backend;
    EmbedderConfig embedder;
    retrieval::RetrievalConfig retrieval;
    agent::RepairBudget budget;
    LimitsConfig limits;
    PathsConfig paths;

    /// Errors: CONFIG_ERROR naming the offending field.
    void validate() const;
    std::string render() const;
    bool operator==(const Config&) const = default;
};

/// Unknown sections or keys, bad values and missing `=` are CONFIG_ERROR
/// with the line number. Does not validate.
Config parse(const std::string& text);

/// Parses a file; relative paths inside it resolve against its directory.
Config load(const std::filesystem::path& file);

std::unique_ptr<llm::LlmBackend> make_backend(const Config& cfg);
std::unique_ptr<retrieval::Embedder> make_embedder(const Config& cfg);
templates::TemplateSet make_templates(const Config& cfg);
agent::RepairConfig repair_config(const Config& cfg);

}  // namespace reinfix::config
