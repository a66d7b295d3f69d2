#pragma once

#include <archivist/value.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>

namespace testutil {

inline std::string random_key(std::mt19937_64& rng) {
    static constexpr char alphabet[] = "abcdefghijklmnopqrstuvwxyz_ABCXYZ0123456789";
    std::uniform_int_distribution<std::size_t> len(1, 8);
    std::uniform_int_distribution<std::size_t> pick(0, sizeof(alphabet) - 2);
    std::string out;
    std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(alphabet[pick(rng)]);
    }
    return out;
}

inline std::string random_text(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> len(0, 12);
    std::uniform_int_distribution<int> pick(0, 5);
    std::string out;
    int n = len(rng);
    for (int i = 0; i < n; ++i) {
        switch (pick(rng)) {
        case 0:
            out.push_back(static_cast<char>(
                std::uniform_int_distribution<int>(0x20, 0x7E)(rng)));
            break;
        case 1:
            out.push_back('"');
            break;
        case 2:
            out.push_back('\\');
            break;
        case 3:
            out.push_back('\n');
            break;
        case 4:
            out += "\xC3\xA9"; // é
            break;
        default:
            out += "\xE2\x82\xAC"; // €
            break;
        }
    }
    return out;
}

/// A finite double spanning many magnitudes, including exact integers.
inline double random_finite_double(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> mode(0, 3);
    switch (mode(rng)) {
    case 0:
        return static_cast<double>(std::uniform_int_distribution<int>(-1000, 1000)(rng));
    case 1:
        return std::uniform_real_distribution<double>(-1e6, 1e6)(rng);
    case 2:
        return std::uniform_real_distribution<double>(-1.0, 1.0)(rng) * 1e-200;
    default: {
        // Random bit pattern: the hard cases for shortest round-trip output.
        for (;;) {
            double candidate = std::bit_cast<double>(rng());
            if (std::isfinite(candidate)) {
                return candidate;
            }
        }
    }
    }
}

inline archivist::Value random_scalar(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> kind(0, 4);
    switch (kind(rng)) {
    case 0:
        return nullptr;
    case 1:
        return rng() % 2 == 0;
    case 2:
        return static_cast<std::int64_t>(rng());
    case 3:
        return random_finite_double(rng);
    default:
        return random_text(rng);
    }
}

inline archivist::Value random_value(std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> kind(0, depth > 0 ? 6 : 4);
    switch (kind(rng)) {
    case 5: {
        archivist::Value list = archivist::Value::array();
        std::size_t n = rng() % 4;
        for (std::size_t i = 0; i < n; ++i) {
            list.push_back(random_value(rng, depth - 1));
        }
        return list;
    }
    case 6: {
        archivist::Value map = archivist::Value::object();
        std::size_t n = rng() % 4;
        for (std::size_t i = 0; i < n; ++i) {
            map[random_key(rng)] = random_value(rng, depth - 1);
        }
        return map;
    }
    default:
        return random_scalar(rng);
    }
}

/// An object-rooted body with only finite floats, as validation guarantees
/// for structured metadata.
inline archivist::Value random_metadata_body(std::mt19937_64& rng) {
    archivist::Value body = archivist::Value::object();
    std::size_t n = 1 + rng() % 4;
    for (std::size_t i = 0; i < n; ++i) {
        body[random_key(rng)] = random_value(rng, 3);
    }
    return body;
}

} // namespace testutil
