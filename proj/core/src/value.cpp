#include "archivist/value.hpp"

#include "archivist/errors.hpp"

#include <charconv>
#include <vector>

namespace archivist {

namespace {

// Splits on '/'; rejects empty segments. "" means root and yields no segments.
std::vector<std::string_view> split_pointer(std::string_view pointer) {
    std::vector<std::string_view> segments;
    if (pointer.empty()) {
        return segments;
    }
    std::size_t start = 0;
    while (true) {
        std::size_t slash = pointer.find('/', start);
        std::string_view segment = (slash == std::string_view::npos)
                                       ? pointer.substr(start)
                                       : pointer.substr(start, slash - start);
        if (segment.empty()) {
            throw PointerSyntaxError("empty segment in pointer \"" + std::string(pointer) + "\"");
        }
        segments.push_back(segment);
        if (slash == std::string_view::npos) {
            break;
        }
        start = slash + 1;
    }
    return segments;
}

// Decimal list index: one or more digits, no sign, no leading junk.
bool parse_index(std::string_view segment, std::size_t& out) {
    if (segment.empty() || segment.size() > 18) {
        return false;
    }
    for (char c : segment) {
        if (c < '0' || c > '9') {
            return false;
        }
    }
    auto [ptr, ec] = std::from_chars(segment.data(), segment.data() + segment.size(), out);
    return ec == std::errc() && ptr == segment.data() + segment.size();
}

} // namespace

const Value* value_get(const Value& root, std::string_view pointer) {
    const auto segments = split_pointer(pointer);
    const Value* node = &root;
    for (const auto segment : segments) {
        if (node->is_object()) {
            auto it = node->find(std::string(segment));
            if (it == node->end()) {
                return kMissing;
            }
            node = &*it;
        } else if (node->is_array()) {
            std::size_t idx = 0;
            if (!parse_index(segment, idx) || idx >= node->size()) {
                return kMissing;
            }
            node = &(*node)[idx];
        } else {
            return kMissing;
        }
    }
    return node;
}

bool strict_equal(const Value& a, const Value& b) {
    using vt = nlohmann::detail::value_t;
    vt ta = a.type();
    vt tb = b.type();
    // Unsigned is an encoding detail of the backing type, not a kind of its
    // own; fold it into Integer.
    if (ta == vt::number_unsigned) {
        ta = vt::number_integer;
    }
    if (tb == vt::number_unsigned) {
        tb = vt::number_integer;
    }
    if (ta != tb) {
        return false;
    }
    switch (ta) {
    case vt::object: {
        if (a.size() != b.size()) {
            return false;
        }
        for (auto it = a.begin(); it != a.end(); ++it) {
            auto other = b.find(it.key());
            if (other == b.end() || !strict_equal(it.value(), *other)) {
                return false;
            }
        }
        return true;
    }
    case vt::array: {
        if (a.size() != b.size()) {
            return false;
        }
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (!strict_equal(a[i], b[i])) {
                return false;
            }
        }
        return true;
    }
    default:
        return a == b;
    }
}

} // namespace archivist
