#pragma once

#include <filesystem>
#include <string>

namespace resil {

// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_hex_file(const std::filesystem::path& path);

}  // namespace resil
