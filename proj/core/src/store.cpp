#include "archivist/store.hpp"

#include "archivist/errors.hpp"
#include "archivist/exporter.hpp"
#include "archivist/hash.hpp"
#include "archivist/parsers.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>

namespace fs = std::filesystem;

namespace archivist {

namespace {

constexpr std::string_view kRecordsFile = "records.jsonl";
constexpr std::string_view kBlobsDir = "blobs";
constexpr std::string_view kLockFile = ".lock";

std::string records_path(const std::string& root) {
    return (fs::path(root) / kRecordsFile).string();
}

std::string blob_path_for(const std::string& uid) {
    return std::string(kBlobsDir) + "/" + uid;
}

std::string now_rfc3339_utc() {
    using namespace std::chrono;
    auto now = system_clock::now();
    auto secs = time_point_cast<seconds>(now);
    auto micros = duration_cast<microseconds>(now - secs).count();
    std::time_t t = system_clock::to_time_t(secs);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buffer[40];
    std::size_t n = std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%S", &tm);
    std::snprintf(buffer + n, sizeof(buffer) - n, ".%06ldZ", static_cast<long>(micros));
    return buffer;
}

Record record_from_line(const Value& line, std::size_t line_no, const std::string& path) {
    auto text_field = [&](const char* key) -> std::string {
        auto it = line.find(key);
        if (it == line.end() || !it->is_string()) {
            throw StoreCorruptionError("record line " + std::to_string(line_no) +
                                           " lacks text field \"" + key + "\"",
                                       path);
        }
        return it->get<std::string>();
    };
    Record record;
    record.uid = text_field("uid");
    record.blob_path = text_field("blob_path");
    record.created_at = text_field("created_at");
    auto meta = line.find("metadata");
    if (meta == line.end() || !meta->is_object() || !meta->contains("body") ||
        !meta->contains("schema_id") || !meta->at("schema_id").is_string()) {
        throw StoreCorruptionError("record line " + std::to_string(line_no) +
                                       " lacks a metadata object",
                                   path);
    }
    record.metadata.body = meta->at("body");
    record.metadata.schema_id = meta->at("schema_id").get<std::string>();
    return record;
}

struct LoadedIndex {
    std::vector<Record> records;
    bool truncated_tail = false;
    std::uintmax_t keep_bytes = 0; // file prefix ending at the last complete line
    bool tail_missing_newline = false; // kept tail record lost its newline
};

LoadedIndex load_index(const std::string& root) {
    LoadedIndex index;
    const std::string path = records_path(root);
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return index; // no records yet
    }
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw StoreIoError("cannot read records index", path);
    }

    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < content.size()) {
        ++line_no;
        std::size_t nl = content.find('\n', pos);
        const bool terminated = (nl != std::string::npos);
        std::string_view line = terminated ? std::string_view(content).substr(pos, nl - pos)
                                           : std::string_view(content).substr(pos);
        Value parsed;
        bool ok = true;
        try {
            parsed = parse_json(line);
        } catch (const ParseError&) {
            ok = false;
        }
        if (!terminated) {
            if (ok) {
                // Complete record that lost only its newline; keep it.
                index.records.push_back(record_from_line(parsed, line_no, path));
                index.keep_bytes = content.size();
                index.tail_missing_newline = true;
            } else {
                index.truncated_tail = true;
            }
            return index;
        }
        if (!ok) {
            throw StoreCorruptionError("record line " + std::to_string(line_no) +
                                           " is not valid JSON",
                                       path);
        }
        index.records.push_back(record_from_line(parsed, line_no, path));
        pos = nl + 1;
        index.keep_bytes = pos;
    }
    return index;
}

class WriterLock {
public:
    WriterLock(const std::string& root, bool wait) {
        const std::string path = (fs::path(root) / kLockFile).string();
        fd_ = ::open(path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
        if (fd_ < 0) {
            throw StoreIoError("cannot open lock file", path);
        }
        if (::flock(fd_, LOCK_EX | (wait ? 0 : LOCK_NB)) != 0) {
            ::close(fd_);
            fd_ = -1;
            throw StoreIoError(wait ? "cannot acquire store lock"
                                    : "store is locked by another writer",
                               path);
        }
    }

    WriterLock(const WriterLock&) = delete;
    WriterLock& operator=(const WriterLock&) = delete;

    ~WriterLock() {
        if (fd_ >= 0) {
            ::flock(fd_, LOCK_UN);
            ::close(fd_);
        }
    }

private:
    int fd_ = -1;
};

// Dot-separated path into a record body; empty path or empty segments are
// malformed. Returns nullptr for absent paths. Unit-wrapped results hop to
// their "value" member.
const Value* resolve_record_path(const Value& body, std::string_view dot_path) {
    if (dot_path.empty()) {
        throw PredicateSyntaxError("empty predicate path");
    }
    const Value* node = &body;
    std::size_t start = 0;
    std::string pointer;
    pointer.reserve(dot_path.size());
    for (std::size_t i = 0; i <= dot_path.size(); ++i) {
        if (i == dot_path.size() || dot_path[i] == '.') {
            if (pointer.empty() || pointer.back() == '/') {
                throw PredicateSyntaxError("empty segment in predicate path \"" +
                                           std::string(dot_path) + "\"");
            }
            if (i < dot_path.size()) {
                pointer.push_back('/');
            }
        } else {
            pointer.push_back(dot_path[i]);
        }
    }
    node = value_get(*node, pointer);
    if (node != nullptr && node->is_object() && node->size() == 2 && node->contains("value") &&
        node->contains("unit")) {
        node = &node->at("value");
    }
    return node;
}

bool numeric_equal(const Value& a, const Value& b) {
    if (a.is_number_integer() && b.is_number_integer()) {
        return a.get<std::int64_t>() == b.get<std::int64_t>();
    }
    return as_double(a) == as_double(b);
}

bool scalar_equal(const Value& field, const Value& operand) {
    if (is_numeric(field) && is_numeric(operand)) {
        return numeric_equal(field, operand);
    }
    if (field.type() != operand.type()) {
        return false;
    }
    return field == operand;
}

bool predicate_holds(const Value& body, const Predicate& predicate) {
    const Value* field = resolve_record_path(body, predicate.path);
    if (field == nullptr) {
        return false; // missing path: predicate is false, never an error
    }
    switch (predicate.op) {
    case Predicate::Op::Eq:
        return scalar_equal(*field, predicate.operand);
    case Predicate::Op::Ne:
        return !scalar_equal(*field, predicate.operand);
    default:
        break;
    }
    if (!is_numeric(*field) || !is_numeric(predicate.operand)) {
        return false; // ordering over non-numeric field: no match
    }
    double lhs = as_double(*field);
    double rhs = as_double(predicate.operand);
    switch (predicate.op) {
    case Predicate::Op::Lt:
        return lhs < rhs;
    case Predicate::Op::Le:
        return lhs <= rhs;
    case Predicate::Op::Gt:
        return lhs > rhs;
    case Predicate::Op::Ge:
        return lhs >= rhs;
    default:
        return false;
    }
}

void check_predicates(const std::vector<Predicate>& predicates) {
    for (const auto& predicate : predicates) {
        if (predicate.path.empty()) {
            throw PredicateSyntaxError("empty predicate path");
        }
        const bool ordering = predicate.op != Predicate::Op::Eq &&
                              predicate.op != Predicate::Op::Ne;
        if (ordering && !is_numeric(predicate.operand)) {
            throw PredicateSyntaxError("ordering comparison against non-numeric operand in \"" +
                                       predicate.path + "\"");
        }
        if (!predicate.operand.is_primitive()) {
            throw PredicateSyntaxError("predicate operand must be a scalar");
        }
    }
}

std::vector<Record> filter_records(std::vector<Record> all,
                                   const std::vector<Predicate>& predicates) {
    check_predicates(predicates);
    std::vector<Record> out;
    for (auto& record : all) {
        bool keep = true;
        for (const auto& predicate : predicates) {
            if (!predicate_holds(record.metadata.body, predicate)) {
                keep = false;
                break;
            }
        }
        if (keep) {
            out.push_back(std::move(record));
        }
    }
    std::sort(out.begin(), out.end(), [](const Record& a, const Record& b) {
        return std::tie(a.created_at, a.uid) < std::tie(b.created_at, b.uid);
    });
    return out;
}

std::string group_key_of(const Value& v) {
    return v.is_string() ? v.get<std::string>() : to_canonical_json(v);
}

} // namespace

Predicate parse_predicate(std::string_view text) {
    auto is_space = [](char c) { return c == ' ' || c == '\t'; };
    std::size_t i = 0;
    while (i < text.size() && is_space(text[i])) {
        ++i;
    }
    std::size_t path_start = i;
    while (i < text.size() && !is_space(text[i])) {
        ++i;
    }
    std::string_view path = text.substr(path_start, i - path_start);
    while (i < text.size() && is_space(text[i])) {
        ++i;
    }
    std::size_t op_start = i;
    while (i < text.size() && !is_space(text[i])) {
        ++i;
    }
    std::string_view op_token = text.substr(op_start, i - op_start);
    while (i < text.size() && is_space(text[i])) {
        ++i;
    }
    std::string_view value_token = text.substr(i);
    while (!value_token.empty() && is_space(value_token.back())) {
        value_token.remove_suffix(1);
    }

    if (path.empty() || op_token.empty() || value_token.empty()) {
        throw PredicateSyntaxError("expected \"path OP value\", got \"" + std::string(text) +
                                   "\"");
    }

    Predicate predicate;
    predicate.path = std::string(path);
    if (op_token == "==") {
        predicate.op = Predicate::Op::Eq;
    } else if (op_token == "!=") {
        predicate.op = Predicate::Op::Ne;
    } else if (op_token == "<") {
        predicate.op = Predicate::Op::Lt;
    } else if (op_token == "<=") {
        predicate.op = Predicate::Op::Le;
    } else if (op_token == ">") {
        predicate.op = Predicate::Op::Gt;
    } else if (op_token == ">=") {
        predicate.op = Predicate::Op::Ge;
    } else {
        throw PredicateSyntaxError("unknown operator \"" + std::string(op_token) + "\"");
    }

    if (value_token.size() >= 2 && value_token.front() == '"' && value_token.back() == '"') {
        predicate.operand = std::string(value_token.substr(1, value_token.size() - 2));
    } else if (value_token == "null") {
        predicate.operand = nullptr;
    } else {
        predicate.operand = classify_scalar(value_token);
    }
    check_predicates({predicate});
    return predicate;
}

Store Store::open(const std::string& root, bool create) {
    std::error_code ec;
    if (create) {
        fs::create_directories(fs::path(root) / kBlobsDir, ec);
        if (ec) {
            throw StoreIoError("cannot create store layout: " + ec.message(), root);
        }
    } else if (!fs::is_directory(root, ec)) {
        throw StoreIoError("store root does not exist", root);
    }
    Store store(root);
    auto index = load_index(root);
    store.open_report_.records = index.records.size();
    store.open_report_.truncated_tail = index.truncated_tail;
    return store;
}

std::vector<Record> Store::records() const {
    return load_index(root_).records;
}

Record Store::annotate(std::string_view blob, const StructuredMetadata& meta, bool wait) {
    const std::string uid = sha256_hex(blob);

    WriterLock lock(root_, wait);
    auto index = load_index(root_);

    for (const auto& existing : index.records) {
        if (existing.uid == uid) {
            if (strict_equal(existing.metadata.body, meta.body) &&
                existing.metadata.schema_id == meta.schema_id) {
                return existing; // idempotent re-annotation
            }
            throw StoreConflictError("uid " + uid +
                                     " is already annotated with different metadata");
        }
    }

    // Blob first, then the index line; a crash in between leaves an
    // unreferenced blob, never a dangling record.
    const fs::path blob_abs = fs::path(root_) / blob_path_for(uid);
    std::error_code ec;
    if (!fs::exists(blob_abs, ec)) {
        const fs::path tmp = fs::path(root_) / std::string(kBlobsDir) /
                             (".tmp-" + uid + "-" + std::to_string(::getpid()));
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out || !out.write(blob.data(), static_cast<std::streamsize>(blob.size()))) {
                throw StoreIoError("cannot write blob", tmp.string());
            }
        }
        fs::rename(tmp, blob_abs, ec);
        if (ec) {
            throw StoreIoError("cannot move blob into place: " + ec.message(),
                               blob_abs.string());
        }
    }

    Record record;
    record.uid = uid;
    record.metadata = meta;
    record.blob_path = blob_path_for(uid);
    record.created_at = now_rfc3339_utc();

    Value line = Value::object();
    line["uid"] = record.uid;
    line["blob_path"] = record.blob_path;
    line["created_at"] = record.created_at;
    line["metadata"] = Value::object();
    line["metadata"]["body"] = record.metadata.body;
    line["metadata"]["schema_id"] = record.metadata.schema_id;
    std::string serialized = to_canonical_json(line) + "\n";
    if (index.tail_missing_newline) {
        serialized.insert(serialized.begin(), '\n');
    }

    const std::string path = records_path(root_);
    int fd = ::open(path.c_str(), O_CREAT | O_WRONLY | O_CLOEXEC, 0644);
    if (fd < 0) {
        throw StoreIoError("cannot open records index for append", path);
    }
    // Drop a truncated tail left by a crashed writer before appending.
    if (::ftruncate(fd, static_cast<off_t>(index.keep_bytes)) != 0 ||
        ::lseek(fd, 0, SEEK_END) < 0) {
        ::close(fd);
        throw StoreIoError("cannot repair records index", path);
    }
    const char* data = serialized.data();
    std::size_t remaining = serialized.size();
    while (remaining > 0) {
        ssize_t written = ::write(fd, data, remaining);
        if (written < 0) {
            ::close(fd);
            throw StoreIoError("cannot append record", path);
        }
        data += written;
        remaining -= static_cast<std::size_t>(written);
    }
    if (::fsync(fd) != 0) {
        ::close(fd);
        throw StoreIoError("cannot flush records index", path);
    }
    ::close(fd);
    return record;
}

std::vector<Record> Store::query(const std::vector<Predicate>& predicates) const {
    return filter_records(load_index(root_).records, predicates);
}

Value Store::aggregate(const std::vector<Predicate>& predicates, const std::string& group_by,
                       const std::string& target) const {
    auto matched = filter_records(load_index(root_).records, predicates);

    std::map<std::string, std::vector<double>> groups; // sorted keys for stable output
    for (const auto& record : matched) {
        const Value* group = resolve_record_path(record.metadata.body, group_by);
        if (group == nullptr) {
            continue; // no group value: outside every group
        }
        const Value* value = resolve_record_path(record.metadata.body, target);
        if (value == nullptr || !is_numeric(*value)) {
            throw AggregationTypeError("target \"" + target +
                                       "\" is not numeric in record " + record.uid);
        }
        groups[group_key_of(*group)].push_back(as_double(*value));
    }

    Value out = Value::object();
    for (const auto& [key, values] : groups) {
        const double n = static_cast<double>(values.size());
        double sum = 0.0;
        for (double v : values) {
            sum += v;
        }
        const double mean = sum / n;
        double std_dev = 0.0;
        if (values.size() >= 2) {
            double accum = 0.0;
            for (double v : values) {
                accum += (v - mean) * (v - mean);
            }
            std_dev = std::sqrt(accum / (n - 1.0));
        }
        Value stats = Value::object();
        stats["count"] = static_cast<std::int64_t>(values.size());
        stats["mean"] = mean;
        stats["std"] = std_dev;
        out[key] = std::move(stats);
    }
    return out;
}

std::string Store::fetch_blob(const std::string& uid) const {
    auto index = load_index(root_);
    const Record* found = nullptr;
    for (const auto& record : index.records) {
        if (record.uid == uid) {
            found = &record;
            break;
        }
    }
    if (found == nullptr) {
        throw NotFoundError("no record under uid " + uid);
    }
    const fs::path path = fs::path(root_) / found->blob_path;
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw StoreCorruptionError("blob file missing for uid " + uid, path.string());
    }
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw StoreIoError("cannot read blob", path.string());
    }
    if (sha256_hex(bytes) != uid) {
        throw StoreCorruptionError("blob content does not hash to uid " + uid, path.string());
    }
    return bytes;
}

} // namespace archivist
