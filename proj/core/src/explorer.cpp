#include "archivist/explorer.hpp"

#include "archivist/errors.hpp"
#include "tar.hpp"

#include <boost/regex.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>

namespace fs = std::filesystem;

namespace archivist {

namespace {

bool has_archive_extension(const std::string& path) {
    auto ends_with = [&](std::string_view suffix) {
        return path.size() >= suffix.size() &&
               path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    return ends_with(".tgz") || ends_with(".tar.gz");
}

std::string_view base_name(std::string_view relative_path) {
    std::size_t slash = relative_path.rfind('/');
    return slash == std::string_view::npos ? relative_path : relative_path.substr(slash + 1);
}

// Tar members come with assorted decorations; normalize to the clean
// '/'-separated relative form WorkItem requires. Returns nullopt for
// members that do not denote a file inside the collection root.
std::optional<std::string> normalize_member_path(std::string name, const std::string& source) {
    if (name.empty()) {
        return std::nullopt;
    }
    if (name.front() == '/') {
        throw CollectionIoError("archive member has an absolute path: \"" + name + "\"", source);
    }
    if (name.rfind("./", 0) == 0) {
        name.erase(0, 2);
    }
    if (name.empty() || name.back() == '/') {
        return std::nullopt; // directory entry
    }
    std::size_t start = 0;
    while (start <= name.size()) {
        std::size_t slash = name.find('/', start);
        std::string_view segment = (slash == std::string::npos)
                                       ? std::string_view(name).substr(start)
                                       : std::string_view(name).substr(start, slash - start);
        if (segment.empty() || segment == "." || segment == "..") {
            throw CollectionIoError(
                "archive member path escapes the collection root: \"" + name + "\"", source);
        }
        if (slash == std::string::npos) {
            break;
        }
        start = slash + 1;
    }
    return name;
}

struct CandidateFile {
    std::string relative_path;
    std::uint64_t bytes_len;
};

void walk_directory(const fs::path& root, const fs::path& dir, const std::string& prefix,
                    std::vector<CandidateFile>& out) {
    std::error_code ec;
    fs::directory_iterator it(dir, fs::directory_options::skip_permission_denied, ec);
    if (ec) {
        throw CollectionIoError("cannot enumerate directory: " + ec.message(),
                                dir.generic_string());
    }
    for (const auto& entry : it) {
        const std::string name = entry.path().filename().generic_string();
        std::error_code tec;
        if (entry.is_symlink(tec)) {
            continue; // never followed
        }
        if (entry.is_directory(tec)) {
            if (!name.empty() && name.front() == '.') {
                continue; // hidden directories are not traversed
            }
            walk_directory(root, entry.path(), prefix + name + "/", out);
        } else if (entry.is_regular_file(tec)) {
            std::error_code sec;
            auto size = entry.file_size(sec);
            if (sec) {
                throw CollectionIoError("cannot stat file: " + sec.message(),
                                        entry.path().generic_string());
            }
            out.push_back(CandidateFile{prefix + name, size});
        }
    }
}

std::vector<CandidateFile> enumerate(const Collection& collection) {
    std::vector<CandidateFile> files;
    if (collection.kind == CollectionKind::Directory) {
        fs::path root(collection.source);
        std::error_code ec;
        if (!fs::is_directory(root, ec)) {
            throw CollectionIoError("not a readable directory", collection.source);
        }
        walk_directory(root, root, "", files);
    } else {
        const std::string raw = detail::gunzip_file(collection.source);
        auto entries = detail::read_tar(raw, collection.source);
        // Later members shadow earlier ones, matching tar append semantics.
        std::vector<std::pair<std::string, std::uint64_t>> latest;
        for (auto& entry : entries) {
            auto normalized = normalize_member_path(std::move(entry.path), collection.source);
            if (!normalized) {
                continue;
            }
            auto found = std::find_if(latest.begin(), latest.end(),
                                      [&](const auto& p) { return p.first == *normalized; });
            if (found != latest.end()) {
                found->second = entry.bytes.size();
            } else {
                latest.emplace_back(std::move(*normalized), entry.bytes.size());
            }
        }
        for (auto& [path, size] : latest) {
            // A file beneath a hidden directory is invisible, like in the
            // directory backend where such directories are pruned.
            std::string_view rest = path;
            bool under_hidden = false;
            for (std::size_t slash = rest.find('/'); slash != std::string_view::npos;
                 slash = rest.find('/')) {
                if (!rest.empty() && rest.front() == '.') {
                    under_hidden = true;
                    break;
                }
                rest.remove_prefix(slash + 1);
            }
            if (under_hidden) {
                continue;
            }
            files.push_back(CandidateFile{std::move(path), size});
        }
    }
    std::sort(files.begin(), files.end(),
              [](const CandidateFile& a, const CandidateFile& b) {
                  return a.relative_path < b.relative_path;
              });
    return files;
}

} // namespace

Collection Collection::detect(const std::string& path) {
    std::error_code ec;
    if (fs::is_directory(path, ec)) {
        return directory(path);
    }
    if (fs::is_regular_file(path, ec)) {
        if (has_archive_extension(path)) {
            return archive(path);
        }
        throw CollectionIoError("not a directory or .tgz/.tar.gz archive", path);
    }
    throw CollectionIoError("collection does not exist", path);
}

ExploreResult explore_detailed(const Collection& collection, const RuleSet& rules, bool strict) {
    if (rules.empty()) {
        throw ConfigError("rule set is empty");
    }

    std::vector<boost::regex> compiled(rules.size());
    for (std::size_t i = 0; i < rules.size(); ++i) {
        if (rules.rules()[i].kind == RuleKind::Regex) {
            try {
                compiled[i] = boost::regex(rules.rules()[i].pattern);
            } catch (const boost::regex_error& e) {
                throw ConfigError("rule \"" + rules.rules()[i].name +
                                  "\": pattern does not compile: " + e.what());
            }
        }
    }

    const auto files = enumerate(collection);

    ExploreResult result;
    result.files_seen = files.size();
    std::vector<bool> rule_matched(rules.size(), false);

    for (const auto& file : files) {
        const std::string_view base = base_name(file.relative_path);
        const bool hidden = !base.empty() && base.front() == '.';

        std::vector<std::size_t> matches;
        for (std::size_t i = 0; i < rules.size(); ++i) {
            const auto& rule = rules.rules()[i];
            bool matched = false;
            if (rule.kind == RuleKind::ExactName) {
                matched = (base == rule.pattern);
            } else if (!hidden) {
                matched = boost::regex_match(base.begin(), base.end(), compiled[i]);
            }
            if (matched) {
                matches.push_back(i);
            }
        }
        if (matches.empty()) {
            continue;
        }
        if (strict && matches.size() > 1) {
            std::string names;
            for (std::size_t i : matches) {
                if (!names.empty()) {
                    names += ", ";
                }
                names += rules.rules()[i].name;
            }
            throw AmbiguousMatchError("file matches multiple rules: " + names,
                                      file.relative_path);
        }
        const std::size_t winner = matches.front(); // declaration order is priority order
        rule_matched[winner] = true;
        result.items.push_back(
            WorkItem{file.relative_path, rules.rules()[winner].name, file.bytes_len});
    }

    for (std::size_t i = 0; i < rules.size(); ++i) {
        if (rules.rules()[i].required && !rule_matched[i]) {
            throw RuleUnmatchedError("required rule \"" + rules.rules()[i].name +
                                     "\" matched no file");
        }
    }

    std::sort(result.items.begin(), result.items.end(),
              [](const WorkItem& a, const WorkItem& b) {
                  return std::tie(a.relative_path, a.rule) < std::tie(b.relative_path, b.rule);
              });
    return result;
}

std::vector<WorkItem> explore(const Collection& collection, const RuleSet& rules, bool strict) {
    return explore_detailed(collection, rules, strict).items;
}

std::string read_item(const Collection& collection, const WorkItem& item) {
    if (collection.kind == CollectionKind::Directory) {
        fs::path path = fs::path(collection.source) / fs::path(item.relative_path);
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw CollectionIoError("cannot open entry", item.relative_path);
        }
        std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
        if (in.bad()) {
            throw CollectionIoError("cannot read entry", item.relative_path);
        }
        return bytes;
    }

    const std::string raw = detail::gunzip_file(collection.source);
    auto entries = detail::read_tar(raw, collection.source);
    std::optional<std::string> found; // last occurrence wins
    for (auto& entry : entries) {
        auto normalized = normalize_member_path(std::move(entry.path), collection.source);
        if (normalized && *normalized == item.relative_path) {
            found = std::move(entry.bytes);
        }
    }
    if (!found) {
        throw CollectionIoError("entry vanished from archive", item.relative_path);
    }
    return *found;
}

} // namespace archivist
