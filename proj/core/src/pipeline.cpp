#include "archivist/pipeline.hpp"

#include "archivist/errors.hpp"
#include "archivist/formatter.hpp"
#include "archivist/store.hpp"

#include <filesystem>
#include <fstream>
#include <unordered_set>

namespace fs = std::filesystem;

namespace archivist {

namespace {

std::string resolve_against(const std::string& base_dir, const std::string& path) {
    fs::path p(path);
    if (p.is_absolute() || base_dir.empty()) {
        return path;
    }
    return (fs::path(base_dir) / p).string();
}

FileDescriptionRule parse_rule(const Value& node, std::size_t index) {
    if (!node.is_object()) {
        throw ConfigError("rules[" + std::to_string(index) + "] must be an object");
    }
    static const std::unordered_set<std::string> known = {
        "name", "pattern", "kind", "parser", "options", "required",
    };
    for (auto it = node.begin(); it != node.end(); ++it) {
        if (!known.contains(it.key())) {
            throw ConfigError("rules[" + std::to_string(index) + "] has unknown key \"" +
                              it.key() + "\"");
        }
    }
    auto text = [&](const char* key) -> std::string {
        auto it = node.find(key);
        if (it == node.end() || !it->is_string() || it->get_ref<const std::string&>().empty()) {
            throw ConfigError("rules[" + std::to_string(index) + "] needs non-empty text \"" +
                              key + "\"");
        }
        return it->get<std::string>();
    };

    FileDescriptionRule rule;
    rule.name = text("name");
    rule.pattern = text("pattern");
    rule.parser.id = text("parser");

    std::string kind = node.contains("kind") ? text("kind") : "exact";
    if (kind == "exact") {
        rule.kind = RuleKind::ExactName;
    } else if (kind == "regex") {
        rule.kind = RuleKind::Regex;
    } else {
        throw ConfigError("rules[" + std::to_string(index) +
                          "].kind must be \"exact\" or \"regex\"");
    }

    if (auto it = node.find("options"); it != node.end()) {
        if (!it->is_object()) {
            throw ConfigError("rules[" + std::to_string(index) + "].options must be an object");
        }
        rule.parser.options = *it;
    }
    if (auto it = node.find("required"); it != node.end()) {
        if (!it->is_boolean()) {
            throw ConfigError("rules[" + std::to_string(index) + "].required must be a boolean");
        }
        rule.required = it->get<bool>();
    }
    return rule;
}

} // namespace

PipelineConfig parse_pipeline_config(const Value& document, const std::string& base_dir) {
    if (!document.is_object()) {
        throw ConfigError("pipeline configuration must be a JSON object");
    }
    static const std::unordered_set<std::string> known = {
        "rules", "schema_path", "export_format", "strict", "store_path", "data_blob_path",
    };
    for (auto it = document.begin(); it != document.end(); ++it) {
        if (!known.contains(it.key())) {
            throw ConfigError("unknown configuration key \"" + it.key() + "\"");
        }
    }

    auto rules_it = document.find("rules");
    if (rules_it == document.end() || !rules_it->is_array() || rules_it->empty()) {
        throw ConfigError("configuration needs a non-empty \"rules\" array");
    }
    std::vector<FileDescriptionRule> rules;
    rules.reserve(rules_it->size());
    for (std::size_t i = 0; i < rules_it->size(); ++i) {
        rules.push_back(parse_rule((*rules_it)[i], i));
    }

    PipelineConfig config;
    config.rules = RuleSet(std::move(rules));

    if (auto it = document.find("schema_path"); it != document.end()) {
        if (!it->is_string()) {
            throw ConfigError("\"schema_path\" must be text");
        }
        config.schema = StructuringSchema::load_file(
            resolve_against(base_dir, it->get<std::string>()));
    }
    if (auto it = document.find("export_format"); it != document.end()) {
        if (!it->is_string() || it->get_ref<const std::string&>().empty()) {
            throw ConfigError("\"export_format\" must be non-empty text");
        }
        config.export_format = it->get<std::string>();
    }
    if (auto it = document.find("strict"); it != document.end()) {
        if (!it->is_boolean()) {
            throw ConfigError("\"strict\" must be a boolean");
        }
        config.strict = it->get<bool>();
    }
    if (auto it = document.find("store_path"); it != document.end()) {
        if (!it->is_string()) {
            throw ConfigError("\"store_path\" must be text");
        }
        config.store_path = resolve_against(base_dir, it->get<std::string>());
    }
    if (auto it = document.find("data_blob_path"); it != document.end()) {
        if (!it->is_string()) {
            throw ConfigError("\"data_blob_path\" must be text");
        }
        config.data_blob_path = resolve_against(base_dir, it->get<std::string>());
    }
    if (config.store_path && !config.data_blob_path) {
        throw ConfigError("\"store_path\" requires \"data_blob_path\"");
    }
    return config;
}

PipelineConfig load_pipeline_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open configuration file", path);
    }
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw ConfigError("cannot read configuration file", path);
    }
    Value document;
    try {
        document = Value::parse(bytes);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("configuration is not valid JSON: ") + e.what(), path);
    }
    return parse_pipeline_config(document, fs::path(path).parent_path().string());
}

RunReport run(const PipelineConfig& config, const Collection& collection,
              const ParserRegistry& parsers, const ExporterRegistry& exporters) {
    for (const auto& rule : config.rules.rules()) {
        if (!parsers.contains(rule.parser.id)) {
            throw ConfigError("rule \"" + rule.name + "\" names unregistered parser \"" +
                              rule.parser.id + "\"");
        }
    }
    if (!exporters.contains(config.export_format)) {
        throw ConfigError("export format \"" + config.export_format + "\" is not registered");
    }

    const auto explored = explore_detailed(collection, config.rules, config.strict);

    FragmentNamespace ns;
    for (const auto& item : explored.items) {
        const auto* rule = config.rules.find(item.rule);
        try {
            const std::string bytes = read_item(collection, item);
            ns.add(item.rule, parsers.parse(rule->parser, bytes));
        } catch (ArchivistError& e) {
            e.set_path_if_empty(item.relative_path);
            throw;
        }
    }

    StructuredMetadata meta;
    if (config.schema) {
        meta = assemble(ns, *config.schema);
    } else {
        meta.body = ns.to_value(); // passthrough: the merged namespace verbatim
        ensure_finite_floats(meta.body);
    }

    RunReport report;
    report.metadata_bytes = exporters.export_with(config.export_format, meta);
    report.fragments_parsed = explored.items.size();
    report.files_skipped = explored.files_seen - explored.items.size();

    // Annotation is last: any earlier failure leaves the store unchanged.
    if (config.store_path) {
        std::ifstream in(*config.data_blob_path, std::ios::binary);
        if (!in) {
            throw StoreIoError("cannot open data blob", *config.data_blob_path);
        }
        std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (in.bad()) {
            throw StoreIoError("cannot read data blob", *config.data_blob_path);
        }
        Store store = Store::open(*config.store_path);
        report.record_uid = store.annotate(blob, meta).uid;
    }
    return report;
}

RunReport run(const PipelineConfig& config, const Collection& collection) {
    return run(config, collection, ParserRegistry::with_builtins(),
               ExporterRegistry::with_builtins());
}

} // namespace archivist
