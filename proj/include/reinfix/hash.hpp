#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace reinfix {

/// 64-bit FNV-1a. Pinned: the fallback embedder's bucket layout depends on it.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace reinfix
