#pragma once

#include "archivist/value.hpp"

#include <string>
#include <vector>

namespace archivist {

enum class RuleKind {
    ExactName,
    Regex,
};

/// Parser binding carried by a rule: registry id plus parser-specific
/// options (e.g. the key/value delimiter).
struct ParserSpec {
    std::string id;
    Value options = Value::object();
};

/// A named pattern identifying which raw files feed which parser.
/// ExactName rules match the base name verbatim; Regex rules are
/// anchored full-matches against the base name.
struct FileDescriptionRule {
    std::string name;
    std::string pattern;
    RuleKind kind = RuleKind::ExactName;
    ParserSpec parser;
    bool required = true;
};

/// Ordered list of rules; declaration order is match priority in
/// non-strict mode. Construction validates name uniqueness, the
/// identifier shape of names (they become reference prefixes in
/// expressions), and that regex patterns compile.
class RuleSet {
public:
    RuleSet() = default;
    explicit RuleSet(std::vector<FileDescriptionRule> rules);

    const std::vector<FileDescriptionRule>& rules() const noexcept { return rules_; }
    bool empty() const noexcept { return rules_.empty(); }
    std::size_t size() const noexcept { return rules_.size(); }

    const FileDescriptionRule* find(std::string_view name) const;

private:
    std::vector<FileDescriptionRule> rules_;
};

/// True when `name` is usable as a rule name / reference prefix:
/// [A-Za-z_][A-Za-z0-9_]*
bool is_valid_rule_name(std::string_view name);

/// The parse result of one file, namespaced under its rule.
struct Fragment {
    std::string rule;
    std::string path; // relative to the collection root
    Value body;
};

/// The validated output document produced by the formatter.
struct StructuredMetadata {
    Value body = Value::object();
    std::string schema_id; // content hash of the schema used; empty in passthrough mode
};

/// One entry of the annotated collection.
struct Record {
    std::string uid; // lowercase hex SHA-256 of the blob bytes
    StructuredMetadata metadata;
    std::string blob_path; // store-relative
    std::string created_at; // UTC, RFC 3339
};

} // namespace archivist
