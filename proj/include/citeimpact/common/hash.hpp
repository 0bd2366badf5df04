#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace citeimpact {

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

/// Lower-case hex SHA-256 of a file's contents. Throws IoError if unreadable.
std::string sha256_file(const std::filesystem::path& path);

/// 64-bit FNV-1a, used as the integrity checksum of model containers.
std::uint64_t fnv1a64(std::span<const unsigned char> bytes);

}  // namespace citeimpact
