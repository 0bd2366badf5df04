#pragma once

#include <cstdint>
#include <filesystem>

#include "citeimpact/models/classifier.hpp"

namespace citeimpact {

/// Model container layout: 8-byte magic "CITEMDL\0", u32 schema version,
/// u64 payload size, u64 FNV-1a checksum of the payload, payload. The payload
/// is a u32 length, a JSON header (label scheme, model description, weight
/// shapes) and the weights as little-endian doubles.
inline constexpr std::uint32_t kModelSchemaVersion = 1;

void save_model(const Classifier& classifier, const std::filesystem::path& path);

/// Throws IntegrityError for truncated or corrupted files and VersionError for
/// containers written under another schema version.
Classifier load_model(const std::filesystem::path& path);

}  // namespace citeimpact
