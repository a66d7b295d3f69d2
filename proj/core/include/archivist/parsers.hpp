#pragma once

#include "archivist/model.hpp"
#include "archivist/value.hpp"

#include <functional>
#include <map>
#include <string>
#include <string_view>

namespace archivist {

/// One lexeme classifier shared by every built-in parser and the CLI
/// predicate reader, so "16" means the same Integer everywhere.
/// Trims ASCII whitespace; `true`/`false` become Boolean; lexemes matching
///   [+-]? ( digits [ '.' digits* ] | '.' digits ) [ (e|E) [+-]? digits ]
/// become Integer (no fraction/exponent, fits in 64 bits) or Float;
/// everything else stays Text.
Value classify_scalar(std::string_view lexeme);

/// True when bytes form well-formed UTF-8.
bool valid_utf8(std::string_view bytes);

/// Flat `key <delim> value` lines; blank lines and lines whose first
/// non-space character is '#' are skipped; later duplicate keys override
/// earlier ones. Keys and values are trimmed, values classified.
Value parse_keyvalue(std::string_view bytes, std::string_view delimiter = ":");

/// Output of the POSIX `time` command: lines `real <dur>`, `user <dur>`,
/// `sys <dur>`, where <dur> is `MmS.SSSs` or a plain decimal number of
/// seconds. All three labels must be present. Unrelated lines are ignored.
/// Returns {real, user, sys} in Float seconds.
Value parse_time(std::string_view bytes);

/// JSON document to Value. Numbers without fraction/exponent that fit in
/// 64-bit signed become Integer, all other numbers Float.
Value parse_json(std::string_view bytes);

/// `NAME=value` lines from an environment dump. Values stay Text (env
/// values are text by nature); lines without '=' are skipped.
Value parse_envdump(std::string_view bytes);

/// Apply a regular expression with named groups to the text; returns a Map
/// from group name to the captured lexeme (classified) for the first
/// match. No match raises ParseError.
Value parse_regex_capture(std::string_view bytes, std::string_view pattern);

/// A parser is any function (options, bytes) -> Value registered under an
/// id. The registry is frozen (by convention) before the pipeline starts;
/// parsing itself is pure and safe to run in parallel.
class ParserRegistry {
public:
    using ParseFn = std::function<Value(const Value& options, std::string_view bytes)>;

    /// Registry preloaded with the built-in set:
    /// keyvalue, time, json, envdump, regex_capture.
    static ParserRegistry with_builtins();

    /// Throws RegistryConflictError when the id is already taken.
    void register_parser(std::string id, ParseFn fn);

    bool contains(std::string_view id) const;

    /// Dispatch to the parser registered for spec.id.
    /// Throws UnknownParserError for unregistered ids.
    Value parse(const ParserSpec& spec, std::string_view bytes) const;

private:
    std::map<std::string, ParseFn, std::less<>> parsers_;
};

} // namespace archivist
