#pragma once

#include "archivist/model.hpp"
#include "archivist/value.hpp"

#include <functional>
#include <map>
#include <string>

namespace archivist {

/// Canonical compact JSON: single line, object keys sorted by code point,
/// integers without decimal point, floats as the shortest decimal string
/// that round-trips to the same 64-bit value (always carrying a '.' or
/// exponent so the Float kind survives a parse). UTF-8, no BOM.
std::string to_canonical_json(const Value& value);

/// Canonical pretty JSON: same rules with two-space indentation and LF
/// line endings. No trailing newline; export_json adds it.
std::string to_canonical_json_pretty(const Value& value);

/// Serialize validated metadata to the canonical on-disk form: pretty
/// canonical JSON plus a trailing newline.
std::string export_json(const StructuredMetadata& meta);

/// Serialization dispatch by format id; "json" is always present.
class ExporterRegistry {
public:
    using ExportFn = std::function<std::string(const StructuredMetadata&)>;

    static ExporterRegistry with_builtins();

    /// Throws RegistryConflictError when the id is already taken.
    void register_exporter(std::string id, ExportFn fn);

    bool contains(std::string_view id) const;

    /// Throws UnknownExporterError for unregistered ids.
    std::string export_with(std::string_view id, const StructuredMetadata& meta) const;

private:
    std::map<std::string, ExportFn, std::less<>> exporters_;
};

} // namespace archivist
