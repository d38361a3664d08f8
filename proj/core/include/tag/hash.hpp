#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace tag {

// FNV-1a. Stable across platforms; used for split assignment and seed
// derivation, not for content integrity.
std::uint64_t fnv1a64(std::string_view bytes);

// Hex-encoded SHA-256 of a byte string / of a file's contents. Content
// hashes recorded in run manifests.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file_hex(const std::string& path);

}  // namespace tag
