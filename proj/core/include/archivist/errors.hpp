#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace archivist {

/// Pipeline stage an error originated from. Drives the CLI exit code.
enum class Stage {
    Config,
    Explorer,
    Parser,
    Schema,
    Store,
};

/// Stable process exit code for a failure in the given stage.
constexpr int exit_code_for(Stage stage) {
    switch (stage) {
    case Stage::Config:
        return 2;
    case Stage::Explorer:
        return 3;
    case Stage::Parser:
        return 4;
    case Stage::Schema:
        return 5;
    case Stage::Store:
        return 6;
    }
    return 1;
}

constexpr std::string_view stage_name(Stage stage) {
    switch (stage) {
    case Stage::Config:
        return "config";
    case Stage::Explorer:
        return "explorer";
    case Stage::Parser:
        return "parser";
    case Stage::Schema:
        return "schema";
    case Stage::Store:
        return "store";
    }
    return "unknown";
}

/// Base of all domain errors. Carries the originating stage and, where
/// known, the file or document path the error refers to.
class ArchivistError : public std::runtime_error {
public:
    ArchivistError(Stage stage, std::string path, std::string message)
        : std::runtime_error(compose(stage, path, message)),
          stage_(stage),
          path_(std::move(path)),
          message_(std::move(message)) {}

    Stage stage() const noexcept { return stage_; }
    const std::string& path() const noexcept { return path_; }
    const std::string& message() const noexcept { return message_; }

    /// Attach file context after the fact; used by the pipeline when an
    /// error surfaces from a stage that does not know which file it was
    /// working on. No-op when a path is already set.
    void set_path_if_empty(std::string_view path) {
        if (path_.empty()) {
            path_ = path;
        }
    }

private:
    static std::string compose(Stage stage, const std::string& path, const std::string& message) {
        std::string out{stage_name(stage)};
        if (!path.empty()) {
            out += ": ";
            out += path;
        }
        out += ": ";
        out += message;
        return out;
    }

    Stage stage_;
    std::string path_;
    std::string message_;
};

#define ARCHIVIST_DEFINE_ERROR(Name, DefaultStage)                                                 \
    class Name : public ArchivistError {                                                           \
    public:                                                                                        \
        explicit Name(std::string message, std::string path = {})                                  \
            : ArchivistError(DefaultStage, std::move(path), std::move(message)) {}                 \
    }

// model
ARCHIVIST_DEFINE_ERROR(PointerSyntaxError, Stage::Schema);

// explorer
ARCHIVIST_DEFINE_ERROR(CollectionIoError, Stage::Explorer);
ARCHIVIST_DEFINE_ERROR(RuleUnmatchedError, Stage::Explorer);
ARCHIVIST_DEFINE_ERROR(AmbiguousMatchError, Stage::Explorer);

// parsers
ARCHIVIST_DEFINE_ERROR(EncodingError, Stage::Parser);
ARCHIVIST_DEFINE_ERROR(ParseError, Stage::Parser);
ARCHIVIST_DEFINE_ERROR(UnknownParserError, Stage::Parser);

// formatter / schema
ARCHIVIST_DEFINE_ERROR(MissingSourceError, Stage::Schema);
ARCHIVIST_DEFINE_ERROR(SchemaValidationError, Stage::Schema);
ARCHIVIST_DEFINE_ERROR(ComputeError, Stage::Schema);

// exporter
ARCHIVIST_DEFINE_ERROR(UnknownExporterError, Stage::Config);
ARCHIVIST_DEFINE_ERROR(RegistryConflictError, Stage::Config);

// store
ARCHIVIST_DEFINE_ERROR(StoreConflictError, Stage::Store);
ARCHIVIST_DEFINE_ERROR(StoreIoError, Stage::Store);
ARCHIVIST_DEFINE_ERROR(NotFoundError, Stage::Store);
ARCHIVIST_DEFINE_ERROR(StoreCorruptionError, Stage::Store);
ARCHIVIST_DEFINE_ERROR(PredicateSyntaxError, Stage::Config);
ARCHIVIST_DEFINE_ERROR(AggregationTypeError, Stage::Schema);

// pipeline / cli
ARCHIVIST_DEFINE_ERROR(ConfigError, Stage::Config);

#undef ARCHIVIST_DEFINE_ERROR

} // namespace archivist
