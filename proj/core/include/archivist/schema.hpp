#pragma once

#include "archivist/value.hpp"

#include <string>
#include <vector>

namespace archivist {

/// One schema violation, addressed by a JSON path into the schema document
/// (e.g. "/properties/run/properties/scale/x-archivist").
struct SchemaIssue {
    std::string path;
    std::string message;
};

/// Check a schema document against the structuring-schema rules without
/// throwing; returns every violation found. An empty result means the
/// document is a valid schema.
///
/// Supported JSON-Schema keywords: `type` (object, array, string, number,
/// integer, boolean), `properties`, `required`. Directives live under the
/// reserved key `x-archivist` on leaves: exactly one of `source` (fragment
/// path) or `compute` (arithmetic expression), plus optional `unit` (text)
/// and `optional` (boolean). Internal nodes carry `properties` and may not
/// carry directives. Unknown sibling keywords (title, description, ...)
/// are tolerated; unknown keys inside `x-archivist` are violations.
std::vector<SchemaIssue> check_schema(const Value& document);

/// A validated structuring schema plus its content identity.
class StructuringSchema {
public:
    /// Throws SchemaValidationError (first violation) when the document
    /// breaks the schema rules.
    static StructuringSchema parse(Value document);

    /// Reads and parses a schema file. Unreadable or syntactically
    /// malformed files raise ConfigError; rule violations raise
    /// SchemaValidationError.
    static StructuringSchema load_file(const std::string& path);

    const Value& root() const noexcept { return document_; }

    /// SHA-256 of the canonical compact rendering of the document, so the
    /// identity is independent of file formatting and key order.
    const std::string& id() const noexcept { return id_; }

private:
    StructuringSchema(Value document, std::string id)
        : document_(std::move(document)), id_(std::move(id)) {}

    Value document_;
    std::string id_;
};

} // namespace archivist
