#pragma once

#include <filesystem>
#include <optional>
#include <string>

namespace citeimpact {

/// Downloads `url` (http, https or file) to `destination` and returns the
/// SHA-256 of the bytes written. When `expected_sha256` is given and differs,
/// the file is removed and IntegrityError is thrown.
std::string fetch_file(const std::string& url, const std::filesystem::path& destination,
                       const std::optional<std::string>& expected_sha256 = std::nullopt);

}  // namespace citeimpact
