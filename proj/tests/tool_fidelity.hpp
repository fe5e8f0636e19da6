#pragma once

// Runs every tool over every relevant name in a fixture and compares the
// (path, line, kind) hit sets with the line-scan oracle.

#include <filesystem>
#include <string>
#include <vector>

struct FidelityReport {
    std::size_t queries = 0;
    std::vector<std::string> mismatches;
};

FidelityReport check_tool_fidelity(const std::filesystem::path& root);
