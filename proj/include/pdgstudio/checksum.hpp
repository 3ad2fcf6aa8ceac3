#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pdg {

/// Lower-case hex SHA-256.
std::string sha256_hex(const std::vector<std::uint8_t>& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Standard base64 with padding, no line breaks.
std::string base64_encode(const std::vector<std::uint8_t>& bytes);

}  // namespace pdg
