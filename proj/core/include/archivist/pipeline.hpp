#pragma once

#include "archivist/explorer.hpp"
#include "archivist/exporter.hpp"
#include "archivist/model.hpp"
#include "archivist/parsers.hpp"
#include "archivist/schema.hpp"

#include <optional>
#include <string>

namespace archivist {

/// One configuration document wiring the whole pipeline: the rules (with
/// embedded parser bindings), an optional structuring schema, the export
/// format, and an optional store destination.
struct PipelineConfig {
    RuleSet rules;
    std::optional<StructuringSchema> schema; // absent: passthrough mode
    std::string export_format = "json";
    bool strict = false;
    std::optional<std::string> store_path;
    std::optional<std::string> data_blob_path; // required when store_path is set
};

/// Build a config from its JSON document. Relative schema_path /
/// store_path / data_blob_path entries are resolved against `base_dir`.
/// Throws ConfigError on structural problems and propagates schema errors.
PipelineConfig parse_pipeline_config(const Value& document, const std::string& base_dir);

/// Read and parse a pipeline configuration file; paths inside resolve
/// relative to the file's directory.
PipelineConfig load_pipeline_config(const std::string& path);

struct RunReport {
    std::string metadata_bytes; // the exported document
    std::optional<std::string> record_uid; // set when annotation ran
    std::size_t fragments_parsed = 0;
    std::size_t files_skipped = 0;
};

/// Execute explore -> parse -> assemble -> export (-> annotate) over one
/// collection. Stage errors propagate with the offending file path
/// attached. Annotation is the final step, so any earlier failure leaves
/// the store untouched.
RunReport run(const PipelineConfig& config, const Collection& collection,
              const ParserRegistry& parsers, const ExporterRegistry& exporters);

/// Same, with the built-in parser and exporter registries.
RunReport run(const PipelineConfig& config, const Collection& collection);

} // namespace archivist
