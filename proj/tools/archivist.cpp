#include "archivist/errors.hpp"
#include "archivist/exporter.hpp"
#include "archivist/formatter.hpp"
#include "archivist/pipeline.hpp"
#include "archivist/schema.hpp"
#include "archivist/store.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace archivist;

void print_error_json(std::string_view stage, std::string_view path, std::string_view message) {
    Value diag = Value::object();
    diag["stage"] = std::string(stage);
    diag["path"] = std::string(path);
    diag["message"] = std::string(message);
    std::cerr << to_canonical_json(diag) << "\n";
}

std::vector<Predicate> predicates_from(const std::vector<std::string>& where) {
    std::vector<Predicate> predicates;
    predicates.reserve(where.size());
    for (const auto& clause : where) {
        predicates.push_back(parse_predicate(clause));
    }
    return predicates;
}

void write_file(const std::string& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
        throw ConfigError("cannot write output file", path);
    }
}

int cmd_run(const std::string& config_path, const std::string& input_path,
            const std::string& out_path, const std::optional<std::string>& store_path,
            const std::optional<std::string>& data_path, bool strict) {
    PipelineConfig config = load_pipeline_config(config_path);
    if (strict) {
        config.strict = true;
    }
    if (store_path) {
        config.store_path = *store_path;
        config.data_blob_path = data_path;
        if (!data_path) {
            throw ConfigError("--store requires --data");
        }
    } else if (data_path) {
        throw ConfigError("--data requires --store");
    }

    Collection collection = Collection::detect(input_path);
    RunReport report = run(config, collection);
    write_file(out_path, report.metadata_bytes);

    Value summary = Value::object();
    summary["out"] = out_path;
    summary["fragments_parsed"] = static_cast<std::int64_t>(report.fragments_parsed);
    summary["files_skipped"] = static_cast<std::int64_t>(report.files_skipped);
    if (report.record_uid) {
        summary["record_uid"] = *report.record_uid;
    }
    std::cout << to_canonical_json(summary) << "\n";
    return 0;
}

int cmd_query(const std::string& store_path, const std::vector<std::string>& where,
              const std::string& format) {
    auto predicates = predicates_from(where);
    Store store = Store::open(store_path, /*create=*/false);
    auto records = store.query(predicates);

    if (format == "table") {
        // Human-only output; scripts should use the JSON form.
        std::cout << "uid\tmetadata\n";
        for (const auto& record : records) {
            std::cout << record.uid << "\t" << to_canonical_json(record.metadata.body) << "\n";
        }
        return 0;
    }

    Value out = Value::array();
    for (const auto& record : records) {
        Value entry = Value::object();
        entry["uid"] = record.uid;
        entry["metadata"] = record.metadata.body;
        out.push_back(std::move(entry));
    }
    std::cout << to_canonical_json_pretty(out) << "\n";
    return 0;
}

int cmd_aggregate(const std::string& store_path, const std::vector<std::string>& where,
                  const std::string& group_by, const std::string& target) {
    auto predicates = predicates_from(where);
    Store store = Store::open(store_path, /*create=*/false);
    Value stats = store.aggregate(predicates, group_by, target);
    std::cout << to_canonical_json_pretty(stats) << "\n";
    return 0;
}

int cmd_validate_schema(const std::string& schema_path) {
    std::ifstream in(schema_path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open schema file", schema_path);
    }
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Value document;
    try {
        document = Value::parse(bytes);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("schema file is not valid JSON: ") + e.what(), schema_path);
    }

    auto issues = check_schema(document);
    if (issues.empty()) {
        return 0;
    }
    Value list = Value::array();
    for (const auto& issue : issues) {
        Value entry = Value::object();
        entry["path"] = issue.path.empty() ? "/" : issue.path;
        entry["message"] = issue.message;
        list.push_back(std::move(entry));
    }
    std::cout << to_canonical_json_pretty(list) << "\n";
    print_error_json("schema", schema_path,
                     std::to_string(issues.size()) + " schema violation(s)");
    return exit_code_for(Stage::Schema);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Turn raw simulation metadata into structured, queryable records"};
    app.require_subcommand(1);

    // run
    auto* run_cmd = app.add_subcommand("run", "Parse and structure one metadata collection");
    std::string run_config;
    std::string run_input;
    std::string run_out;
    std::optional<std::string> run_store;
    std::optional<std::string> run_data;
    bool run_strict = false;
    run_cmd->add_option("--config", run_config, "Pipeline configuration file")->required();
    run_cmd->add_option("--input", run_input, "Collection: directory or .tgz/.tar.gz archive")
        ->required();
    run_cmd->add_option("--out", run_out, "Output file for the exported metadata")->required();
    run_cmd->add_option("--store", run_store, "Record store root (enables annotation)")
        ->envname("ARCHIVIST_STORE");
    run_cmd->add_option("--data", run_data, "Data blob to annotate");
    run_cmd->add_flag("--strict", run_strict, "Fail when a file matches more than one rule");

    // query
    auto* query_cmd = app.add_subcommand("query", "Select records by predicate");
    std::string query_store;
    std::vector<std::string> query_where;
    std::string query_format = "json";
    query_cmd->add_option("--store", query_store, "Record store root")
        ->envname("ARCHIVIST_STORE")
        ->required();
    query_cmd->add_option("--where", query_where,
                          "Predicate \"path OP value\" (repeat to conjoin); OP: == != < <= > >=");
    query_cmd->add_option("--format", query_format, "Output format: json or table")
        ->check(CLI::IsMember({"json", "table"}));

    // aggregate
    auto* agg_cmd = app.add_subcommand("aggregate", "Group records and compute count/mean/std");
    std::string agg_store;
    std::vector<std::string> agg_where;
    std::string agg_group_by;
    std::string agg_target;
    agg_cmd->add_option("--store", agg_store, "Record store root")
        ->envname("ARCHIVIST_STORE")
        ->required();
    agg_cmd->add_option("--where", agg_where, "Predicate \"path OP value\" (repeat to conjoin)");
    agg_cmd->add_option("--group-by", agg_group_by, "Metadata path of the group value")
        ->required();
    agg_cmd->add_option("--target", agg_target, "Metadata path of the numeric target")
        ->required();

    // validate-schema
    auto* validate_cmd = app.add_subcommand("validate-schema", "Check a structuring schema");
    std::string validate_schema_path;
    validate_cmd->add_option("--schema", validate_schema_path, "Schema file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error_json("config", "", e.what());
        return exit_code_for(Stage::Config);
    }

    try {
        if (run_cmd->parsed()) {
            return cmd_run(run_config, run_input, run_out, run_store, run_data, run_strict);
        }
        if (query_cmd->parsed()) {
            return cmd_query(query_store, query_where, query_format);
        }
        if (agg_cmd->parsed()) {
            return cmd_aggregate(agg_store, agg_where, agg_group_by, agg_target);
        }
        if (validate_cmd->parsed()) {
            return cmd_validate_schema(validate_schema_path);
        }
    } catch (const ArchivistError& e) {
        print_error_json(stage_name(e.stage()), e.path(), e.message());
        return exit_code_for(e.stage());
    } catch (const std::exception& e) {
        print_error_json("internal", "", e.what());
        return 1;
    }
    return 0;
}
