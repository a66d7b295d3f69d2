#include "archivist/exporter.hpp"

#include "archivist/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace archivist {

namespace {

void write_escaped(std::string& out, std::string_view text) {
    out.push_back('"');
    for (char c : text) {
        switch (c) {
        case '"':
            out += "\\\"";
            break;
        case '\\':
            out += "\\\\";
            break;
        case '\b':
            out += "\\b";
            break;
        case '\f':
            out += "\\f";
            break;
        case '\n':
            out += "\\n";
            break;
        case '\r':
            out += "\\r";
            break;
        case '\t':
            out += "\\t";
            break;
        default:
            if (static_cast<unsigned char>(c) < 0x20) {
                static constexpr char hex[] = "0123456789abcdef";
                out += "\\u00";
                out.push_back(hex[(static_cast<unsigned char>(c) >> 4) & 0x0F]);
                out.push_back(hex[static_cast<unsigned char>(c) & 0x0F]);
            } else {
                out.push_back(c);
            }
        }
    }
    out.push_back('"');
}

void write_float(std::string& out, double value) {
    if (!std::isfinite(value)) {
        throw std::logic_error("non-finite float reached the canonical serializer");
    }
    char buffer[32];
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (ec != std::errc()) {
        throw std::logic_error("float serialization failed");
    }
    std::string_view text(buffer, static_cast<std::size_t>(ptr - buffer));
    out += text;
    // Keep the Float kind visible: 16.0 must not print as 16.
    if (text.find('.') == std::string_view::npos && text.find('e') == std::string_view::npos &&
        text.find('E') == std::string_view::npos) {
        out += ".0";
    }
}

void write_value(std::string& out, const Value& value, bool pretty, int depth) {
    auto indent = [&](int n) {
        out.append(static_cast<std::size_t>(n) * 2, ' ');
    };
    switch (value.type()) {
    case nlohmann::detail::value_t::null:
        out += "null";
        break;
    case nlohmann::detail::value_t::boolean:
        out += value.get<bool>() ? "true" : "false";
        break;
    case nlohmann::detail::value_t::number_integer: {
        char buffer[24];
        auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer),
                                       value.get<std::int64_t>());
        out.append(buffer, ptr);
        break;
    }
    case nlohmann::detail::value_t::number_unsigned: {
        char buffer[24];
        auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer),
                                       value.get<std::uint64_t>());
        out.append(buffer, ptr);
        break;
    }
    case nlohmann::detail::value_t::number_float:
        write_float(out, value.get<double>());
        break;
    case nlohmann::detail::value_t::string:
        write_escaped(out, value.get_ref<const std::string&>());
        break;
    case nlohmann::detail::value_t::array: {
        if (value.empty()) {
            out += "[]";
            break;
        }
        out.push_back('[');
        bool first = true;
        for (const auto& element : value) {
            if (!first) {
                out.push_back(',');
            }
            first = false;
            if (pretty) {
                out.push_back('\n');
                indent(depth + 1);
            }
            write_value(out, element, pretty, depth + 1);
        }
        if (pretty) {
            out.push_back('\n');
            indent(depth);
        }
        out.push_back(']');
        break;
    }
    case nlohmann::detail::value_t::object: {
        if (value.empty()) {
            out += "{}";
            break;
        }
        std::vector<const std::string*> keys;
        keys.reserve(value.size());
        for (auto it = value.begin(); it != value.end(); ++it) {
            keys.push_back(&it.key());
        }
        // Byte-wise comparison of UTF-8 equals code-point order.
        std::sort(keys.begin(), keys.end(),
                  [](const std::string* a, const std::string* b) { return *a < *b; });
        out.push_back('{');
        bool first = true;
        for (const std::string* key : keys) {
            if (!first) {
                out.push_back(',');
            }
            first = false;
            if (pretty) {
                out.push_back('\n');
                indent(depth + 1);
            }
            write_escaped(out, *key);
            out.push_back(':');
            if (pretty) {
                out.push_back(' ');
            }
            write_value(out, value.at(*key), pretty, depth + 1);
        }
        if (pretty) {
            out.push_back('\n');
            indent(depth);
        }
        out.push_back('}');
        break;
    }
    default:
        throw std::logic_error("unsupported value kind in canonical serializer");
    }
}

} // namespace

std::string to_canonical_json(const Value& value) {
    std::string out;
    write_value(out, value, false, 0);
    return out;
}

std::string to_canonical_json_pretty(const Value& value) {
    std::string out;
    write_value(out, value, true, 0);
    return out;
}

std::string export_json(const StructuredMetadata& meta) {
    return to_canonical_json_pretty(meta.body) + "\n";
}

ExporterRegistry ExporterRegistry::with_builtins() {
    ExporterRegistry registry;
    registry.register_exporter("json", [](const StructuredMetadata& meta) {
        return export_json(meta);
    });
    return registry;
}

void ExporterRegistry::register_exporter(std::string id, ExportFn fn) {
    auto [it, inserted] = exporters_.emplace(std::move(id), std::move(fn));
    if (!inserted) {
        throw RegistryConflictError("exporter \"" + it->first + "\" is already registered");
    }
}

bool ExporterRegistry::contains(std::string_view id) const {
    return exporters_.find(id) != exporters_.end();
}

std::string ExporterRegistry::export_with(std::string_view id,
                                          const StructuredMetadata& meta) const {
    auto it = exporters_.find(id);
    if (it == exporters_.end()) {
        throw UnknownExporterError("no exporter registered under id \"" + std::string(id) + "\"");
    }
    return it->second(meta);
}

} // namespace archivist
