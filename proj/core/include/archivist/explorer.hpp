#pragma once

#include "archivist/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace archivist {

enum class CollectionKind {
    Directory,
    TarGzArchive,
};

/// A raw-metadata collection: a plain directory or a gzip-compressed
/// POSIX tar archive (`.tgz` / `.tar.gz`).
struct Collection {
    std::string source;
    CollectionKind kind = CollectionKind::Directory;

    static Collection directory(std::string path) {
        return {std::move(path), CollectionKind::Directory};
    }
    static Collection archive(std::string path) {
        return {std::move(path), CollectionKind::TarGzArchive};
    }

    /// Classify an existing path: directories as-is, files by their
    /// `.tgz` / `.tar.gz` extension. Throws CollectionIoError otherwise.
    static Collection detect(const std::string& path);
};

/// One file to parse, paired with the rule that claimed it.
struct WorkItem {
    std::string relative_path; // '/'-separated, no ".." segments
    std::string rule;
    std::uint64_t bytes_len = 0;
};

struct ExploreResult {
    std::vector<WorkItem> items;
    /// Regular files enumerated, matched or not. Entries under hidden
    /// directories are never enumerated.
    std::size_t files_seen = 0;
};

/// Enumerate the collection, match base names against the rules, and emit
/// the work list sorted by (relative_path, rule).
///
/// Matching targets the base name only; nested directories are traversed
/// recursively. ExactName rules compare verbatim, Regex rules are anchored
/// full-matches. Hidden entries (base name starting with '.') only match
/// ExactName rules that name them verbatim, and hidden directories are not
/// traversed. Symbolic links are not followed.
///
/// In non-strict mode the first matching rule in declaration order wins;
/// with `strict` a file matching two or more rules raises
/// AmbiguousMatchError. A required rule matching no file raises
/// RuleUnmatchedError.
ExploreResult explore_detailed(const Collection& collection, const RuleSet& rules, bool strict);

std::vector<WorkItem> explore(const Collection& collection, const RuleSet& rules, bool strict);

/// Full byte content of an entry previously produced by explore.
std::string read_item(const Collection& collection, const WorkItem& item);

} // namespace archivist
