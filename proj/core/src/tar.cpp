#include "tar.hpp"

#include "archivist/errors.hpp"

#include <zlib.h>

#include <array>
#include <cstdint>
#include <fstream>
#include <optional>

namespace archivist::detail {

namespace {

constexpr std::size_t kBlockSize = 512;

[[noreturn]] void corrupt(const std::string& source, const std::string& why) {
    throw CollectionIoError(why, source);
}

// Numeric tar header field: octal text, or GNU base-256 when the first
// byte has the high bit set.
std::uint64_t parse_numeric(const char* field, std::size_t len, const std::string& source) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(field);
    if (len > 0 && (bytes[0] & 0x80) != 0) {
        std::uint64_t value = bytes[0] & 0x7F;
        for (std::size_t i = 1; i < len; ++i) {
            value = (value << 8) | bytes[i];
        }
        return value;
    }
    std::uint64_t value = 0;
    std::size_t i = 0;
    while (i < len && (field[i] == ' ' || field[i] == '\0')) {
        ++i;
    }
    bool any = false;
    for (; i < len; ++i) {
        char c = field[i];
        if (c == ' ' || c == '\0') {
            break;
        }
        if (c < '0' || c > '7') {
            corrupt(source, "non-octal numeric field in tar header");
        }
        value = value * 8 + static_cast<std::uint64_t>(c - '0');
        any = true;
    }
    if (!any) {
        corrupt(source, "empty numeric field in tar header");
    }
    return value;
}

std::string field_string(const char* field, std::size_t len) {
    std::size_t n = 0;
    while (n < len && field[n] != '\0') {
        ++n;
    }
    return std::string(field, n);
}

bool is_zero_block(const char* block) {
    for (std::size_t i = 0; i < kBlockSize; ++i) {
        if (block[i] != '\0') {
            return false;
        }
    }
    return true;
}

void verify_checksum(const char* block, const std::string& source) {
    std::uint64_t stored = parse_numeric(block + 148, 8, source);
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < kBlockSize; ++i) {
        sum += (i >= 148 && i < 156) ? static_cast<unsigned char>(' ')
                                     : static_cast<unsigned char>(block[i]);
    }
    if (sum != stored) {
        corrupt(source, "tar header checksum mismatch");
    }
}

// "len key=value\n" records; len covers the whole record.
void apply_pax_records(std::string_view data, std::optional<std::string>& path_override,
                       std::optional<std::uint64_t>& size_override, const std::string& source) {
    std::size_t pos = 0;
    while (pos < data.size()) {
        std::size_t space = data.find(' ', pos);
        if (space == std::string_view::npos) {
            corrupt(source, "malformed pax record");
        }
        std::uint64_t record_len = 0;
        for (std::size_t i = pos; i < space; ++i) {
            char c = data[i];
            if (c < '0' || c > '9') {
                corrupt(source, "malformed pax record length");
            }
            record_len = record_len * 10 + static_cast<std::uint64_t>(c - '0');
        }
        if (record_len == 0 || pos + record_len > data.size() ||
            data[pos + record_len - 1] != '\n') {
            corrupt(source, "malformed pax record");
        }
        std::string_view body = data.substr(space + 1, pos + record_len - space - 2);
        std::size_t eq = body.find('=');
        if (eq != std::string_view::npos) {
            std::string_view key = body.substr(0, eq);
            std::string_view value = body.substr(eq + 1);
            if (key == "path") {
                path_override = std::string(value);
            } else if (key == "size") {
                std::uint64_t size = 0;
                for (char c : value) {
                    if (c < '0' || c > '9') {
                        corrupt(source, "malformed pax size record");
                    }
                    size = size * 10 + static_cast<std::uint64_t>(c - '0');
                }
                size_override = size;
            }
        }
        pos += record_len;
    }
}

} // namespace

std::string gunzip_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw CollectionIoError("cannot open archive", path);
    }
    std::string compressed((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw CollectionIoError("cannot read archive", path);
    }

    std::string out;
    z_stream strm{};
    // 15 + 32: zlib or gzip wrapper, auto-detected.
    if (inflateInit2(&strm, 15 + 32) != Z_OK) {
        throw CollectionIoError("zlib initialization failed", path);
    }
    strm.next_in = reinterpret_cast<Bytef*>(compressed.data());
    strm.avail_in = static_cast<uInt>(compressed.size());

    std::array<char, 1 << 16> buffer{};
    int rc = Z_OK;
    while (true) {
        strm.next_out = reinterpret_cast<Bytef*>(buffer.data());
        strm.avail_out = static_cast<uInt>(buffer.size());
        rc = inflate(&strm, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END && rc != Z_BUF_ERROR) {
            inflateEnd(&strm);
            throw CollectionIoError("corrupt gzip data", path);
        }
        out.append(buffer.data(), buffer.size() - strm.avail_out);
        if (rc == Z_STREAM_END) {
            if (strm.avail_in == 0) {
                break; // end of final member
            }
            if (inflateReset2(&strm, 15 + 32) != Z_OK) { // concatenated member follows
                inflateEnd(&strm);
                throw CollectionIoError("corrupt gzip data", path);
            }
            continue;
        }
        if (rc == Z_BUF_ERROR && strm.avail_in == 0) {
            inflateEnd(&strm);
            throw CollectionIoError("truncated gzip data", path);
        }
    }
    inflateEnd(&strm);
    return out;
}

std::vector<TarEntry> read_tar(std::string_view data, const std::string& source_name) {
    std::vector<TarEntry> entries;
    std::size_t pos = 0;
    std::optional<std::string> long_name;
    std::optional<std::string> pax_path;
    std::optional<std::uint64_t> pax_size;

    while (pos + kBlockSize <= data.size()) {
        const char* block = data.data() + pos;
        if (is_zero_block(block)) {
            break; // end-of-archive marker
        }
        verify_checksum(block, source_name);

        std::uint64_t size = parse_numeric(block + 124, 12, source_name);
        if (pax_size) {
            size = *pax_size;
        }
        char typeflag = block[156];

        std::string name = field_string(block, 100);
        std::string prefix = field_string(block + 345, 155);
        if (!prefix.empty()) {
            name = prefix + "/" + name;
        }
        if (long_name) {
            name = std::move(*long_name);
            long_name.reset();
        }
        if (pax_path) {
            name = std::move(*pax_path);
            pax_path.reset();
        }
        pax_size.reset();

        std::size_t data_start = pos + kBlockSize;
        std::size_t padded = (static_cast<std::size_t>(size) + kBlockSize - 1) / kBlockSize *
                             kBlockSize;
        if (data_start + size > data.size()) {
            corrupt(source_name, "truncated tar member \"" + name + "\"");
        }
        std::string_view body = data.substr(data_start, static_cast<std::size_t>(size));

        switch (typeflag) {
        case '0':
        case '\0':
            entries.push_back(TarEntry{std::move(name), std::string(body)});
            break;
        case 'L': { // GNU long name: body holds the next member's path
            std::string value(body);
            while (!value.empty() && value.back() == '\0') {
                value.pop_back();
            }
            long_name = std::move(value);
            break;
        }
        case 'x': // pax header for the next member
            apply_pax_records(body, pax_path, pax_size, source_name);
            break;
        case 'g': // pax global header: ignored
        case '5': // directory
        case '1': // hard link
        case '2': // symbolic link
        case 'K': // GNU long linkname
        default:
            break;
        }
        pos = data_start + padded;
    }
    return entries;
}

} // namespace archivist::detail
