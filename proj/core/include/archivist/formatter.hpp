#pragma once

#include "archivist/expr.hpp"
#include "archivist/model.hpp"
#include "archivist/schema.hpp"

#include <string>
#include <utility>
#include <vector>

namespace archivist {

/// All fragment bodies merged into one namespace keyed by rule name.
/// A rule that matched several files holds their bodies as a list in the
/// matched order; directive paths then address them as
/// `rule/<index>/<pointer>`, while a bare `rule/<pointer>` is reserved for
/// single-file rules.
class FragmentNamespace {
public:
    FragmentNamespace() = default;

    /// Group fragments by rule, preserving the given (matched) order.
    static FragmentNamespace from_fragments(const std::vector<Fragment>& fragments);

    /// Append one body under the rule.
    void add(std::string rule, Value body);

    bool contains(std::string_view rule) const;
    std::size_t file_count(std::string_view rule) const;

    /// Resolve a fragment path expression ("config/procs"). Returns
    /// nullptr when the path names nothing. Throws MissingSourceError when
    /// a multi-file rule is addressed without an index, and
    /// PointerSyntaxError for malformed pointers.
    const Value* resolve(std::string_view path_expr) const;

    PathResolver resolver() const {
        return [this](std::string_view path) { return resolve(path); };
    }

    /// The namespace as a document: rule name to body, multi-file rules as
    /// lists. This is the passthrough-mode output.
    Value to_value() const;

private:
    std::vector<std::pair<std::string, std::vector<Value>>> slots_;
};

/// Evaluate a compute directive over the namespace. Integer operands are
/// promoted; the result is always Float.
double eval_compute(const ComputeExpr& expr, const FragmentNamespace& ns);

/// Check a document body against the schema's output shape: required
/// fields present, declared types matched (unit-wrapped leaves are checked
/// against their payload), and no non-finite floats anywhere. Throws
/// SchemaValidationError carrying the first failing path in document
/// order.
void validate(const Value& body, const StructuringSchema& schema);

/// Reject NaN or infinite floats anywhere in the tree; used directly for
/// passthrough documents that have no schema to validate against.
void ensure_finite_floats(const Value& body);

/// Merge, select, compute, and validate: build the structured-metadata
/// document the schema describes from the fragment namespace.
///
/// Each leaf holds its `source` value or `compute` result; leaves with
/// `unit` become {"value": v, "unit": text}; optional leaves whose inputs
/// are missing are omitted. The result is validated before it is returned.
StructuredMetadata assemble(const FragmentNamespace& ns, const StructuringSchema& schema);

} // namespace archivist
