#pragma once

#include "archivist/value.hpp"

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace archivist {

/// True for a well-formed fragment path expression: a rule identifier,
/// optionally followed by a '/'-separated pointer with non-empty segments
/// ("config/procs", "time/real", "logs/0/wall", bare "config").
bool is_valid_path_expr(std::string_view text);

/// Maps a fragment path expression to the value it names, or nullptr when
/// the path is absent. Implementations may throw MissingSourceError for
/// structurally invalid references (e.g. a bare path into a multi-file
/// rule).
using PathResolver = std::function<const Value*(std::string_view path)>;

/// Arithmetic over fragment references:
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := number | '${' path '}' | '(' expr ')'
/// Left-associative, evaluated in 64-bit floats; Integer operands are
/// promoted. The result is always Float.
class ComputeExpr {
public:
    /// Throws ComputeError on a grammar violation or a malformed `${...}`
    /// reference.
    static ComputeExpr parse(std::string_view text);

    /// Throws MissingSourceError for unresolved references, ComputeError
    /// for non-numeric operands, division by zero, or a non-finite result.
    double evaluate(const PathResolver& resolve) const;

    /// Every `${...}` reference in the expression, in source order.
    const std::vector<std::string>& references() const noexcept { return references_; }

    const std::string& text() const noexcept { return text_; }

    struct Node; // implementation detail, defined in expr.cpp

private:
    ComputeExpr() = default;

    std::string text_;
    std::vector<std::string> references_;
    std::shared_ptr<const Node> root_; // immutable after parse; shared for cheap copies
};

} // namespace archivist
