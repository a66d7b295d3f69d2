#pragma once

#include "archivist/model.hpp"
#include "archivist/value.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace archivist {

/// One comparison over a dot-separated path into the metadata body
/// ("run.virtual_processes"). Ordering operators require a numeric
/// operand. Unit-wrapped leaves ({value, unit}) are compared through
/// their "value" member.
struct Predicate {
    enum class Op { Eq, Ne, Lt, Le, Gt, Ge };

    std::string path;
    Op op = Op::Eq;
    Value operand;
};

/// Parse the CLI form "path OP value" with OP one of == != < <= > >=.
/// The value token goes through the same lexeme classifier as the parsers,
/// so `16` is numeric; double quotes force Text. Throws
/// PredicateSyntaxError on malformed input.
Predicate parse_predicate(std::string_view text);

/// Content-addressed local record store:
///
///   <root>/blobs/<uid>      raw blob bytes, uid = SHA-256(bytes)
///   <root>/records.jsonl    one canonical-JSON record per line, append-only
///   <root>/.lock            writer mutual exclusion (flock)
///
/// Every operation reads the current on-disk state, so independent handles
/// (including ones in other processes) stay coherent. Writers are
/// serialized by the lock file; readers never block. A truncated trailing
/// line (crash leftover) is tolerated on read and repaired by the next
/// writer.
class Store {
public:
    struct OpenReport {
        std::size_t records = 0;
        bool truncated_tail = false; // partial trailing line seen at open
    };

    /// Open a store rooted at `root`, creating the layout when `create`.
    /// Throws StoreIoError when the root is unusable and
    /// StoreCorruptionError when a complete index line does not parse.
    static Store open(const std::string& root, bool create = true);

    const std::string& root() const noexcept { return root_; }
    const OpenReport& open_report() const noexcept { return open_report_; }

    /// Bind a blob to its metadata under uid = SHA-256(blob). Repeating an
    /// identical (blob, metadata) pair is idempotent and returns the
    /// existing record; the same blob with different metadata raises
    /// StoreConflictError. With `wait` false the call fails fast with
    /// StoreIoError instead of blocking on a concurrent writer.
    Record annotate(std::string_view blob, const StructuredMetadata& meta, bool wait = true);

    /// Records satisfying the conjunction of all predicates, ordered by
    /// (created_at, uid). A missing path makes a predicate false; numeric
    /// comparisons unify Integer and Float.
    std::vector<Record> query(const std::vector<Predicate>& predicates) const;

    /// Filter, group by the value at `group_by`, and reduce the numeric
    /// values at `target` per group to {count, mean, std}; std is the
    /// sample standard deviation (n-1 divisor), 0.0 for singleton groups.
    /// Returns a Map keyed by the canonical rendering of the group value.
    /// A matched record whose target is missing or non-numeric raises
    /// AggregationTypeError naming the uid; records without the group_by
    /// path fall outside every group.
    Value aggregate(const std::vector<Predicate>& predicates, const std::string& group_by,
                    const std::string& target) const;

    /// Blob bytes for a stored uid, verified against the uid on the way
    /// out. Unknown uid raises NotFoundError; a tampered blob raises
    /// StoreCorruptionError.
    std::string fetch_blob(const std::string& uid) const;

    /// All records in file order.
    std::vector<Record> records() const;

private:
    explicit Store(std::string root) : root_(std::move(root)) {}

    std::string root_;
    OpenReport open_report_;
};

} // namespace archivist
