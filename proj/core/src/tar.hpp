#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace archivist::detail {

struct TarEntry {
    std::string path;
    std::string bytes;
};

/// Decompress a gzip file fully into memory. Concatenated gzip members are
/// supported. Throws CollectionIoError on unreadable or corrupt input.
std::string gunzip_file(const std::string& path);

/// Parse an uncompressed POSIX tar stream and return its regular-file
/// entries in archive order. Understands ustar name prefixes, GNU long
/// names ('L') and pax extended headers ('x'/'g') for path and size
/// overrides. Non-file members (directories, links) are skipped.
/// Throws CollectionIoError on malformed headers; `source_name` is only
/// used in error messages.
std::vector<TarEntry> read_tar(std::string_view data, const std::string& source_name);

} // namespace archivist::detail
