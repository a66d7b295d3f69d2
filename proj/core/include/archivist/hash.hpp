#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace archivist {

/// Lowercase hex SHA-256 digest of the given bytes (64 characters).
std::string sha256_hex(const void* data, std::size_t size);

inline std::string sha256_hex(std::string_view bytes) {
    return sha256_hex(bytes.data(), bytes.size());
}

} // namespace archivist
