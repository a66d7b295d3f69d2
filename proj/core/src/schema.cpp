#include "archivist/schema.hpp"

#include "archivist/errors.hpp"
#include "archivist/expr.hpp"
#include "archivist/exporter.hpp"
#include "archivist/hash.hpp"

#include <array>
#include <fstream>

namespace archivist {

namespace {

constexpr std::array<std::string_view, 6> kTypes = {
    "object", "array", "string", "number", "integer", "boolean",
};

bool known_type(std::string_view t) {
    for (auto candidate : kTypes) {
        if (candidate == t) {
            return true;
        }
    }
    return false;
}

class SchemaChecker {
public:
    explicit SchemaChecker(std::vector<SchemaIssue>& issues) : issues_(issues) {}

    void check_node(const Value& node, const std::string& path, bool is_root) {
        if (!node.is_object()) {
            report(path, "schema node must be a JSON object");
            return;
        }
        auto type_it = node.find("type");
        if (type_it == node.end() || !type_it->is_string() ||
            !known_type(type_it->get_ref<const std::string&>())) {
            report(path + "/type",
                   "node needs a \"type\" of object, array, string, number, integer, or boolean");
            return;
        }
        const std::string& type = type_it->get_ref<const std::string&>();

        const bool has_properties = node.contains("properties");
        const bool has_directive = node.contains("x-archivist");

        if (is_root && (type != "object" || !has_properties)) {
            report(path, "root must be an object node with \"properties\"");
            return;
        }

        if (has_properties) {
            check_internal(node, type, path, has_directive);
        } else {
            check_leaf(node, type, path, has_directive);
        }
    }

private:
    void report(std::string path, std::string message) {
        issues_.push_back(SchemaIssue{std::move(path), std::move(message)});
    }

    void check_internal(const Value& node, const std::string& type, const std::string& path,
                        bool has_directive) {
        if (type != "object") {
            report(path + "/type", "nodes with \"properties\" must have type object");
        }
        if (has_directive) {
            report(path + "/x-archivist", "internal nodes cannot carry x-archivist directives");
        }
        const Value& properties = node.at("properties");
        if (!properties.is_object()) {
            report(path + "/properties", "\"properties\" must be an object");
            return;
        }
        if (auto it = node.find("required"); it != node.end()) {
            check_required(*it, properties, path);
        }
        for (auto child = properties.begin(); child != properties.end(); ++child) {
            check_node(child.value(), path + "/properties/" + child.key(), false);
        }
    }

    void check_required(const Value& required, const Value& properties, const std::string& path) {
        if (!required.is_array()) {
            report(path + "/required", "\"required\" must be an array of property names");
            return;
        }
        std::vector<std::string_view> seen;
        for (const auto& entry : required) {
            if (!entry.is_string()) {
                report(path + "/required", "\"required\" entries must be text");
                continue;
            }
            const std::string& name = entry.get_ref<const std::string&>();
            for (auto previous : seen) {
                if (previous == name) {
                    report(path + "/required", "duplicate required name \"" + name + "\"");
                }
            }
            seen.push_back(name);
            if (!properties.contains(name)) {
                report(path + "/required",
                       "required name \"" + name + "\" has no property definition");
            }
        }
    }

    void check_leaf(const Value& node, const std::string& type, const std::string& path,
                    bool has_directive) {
        if (type == "object") {
            // An object leaf (whole-subtree selection) is allowed, but only
            // with a directive; otherwise "properties" was forgotten.
            if (!has_directive) {
                report(path, "object node needs \"properties\" or an x-archivist directive");
                return;
            }
        }
        if (!has_directive) {
            report(path, "leaf node needs an x-archivist directive");
            return;
        }
        const Value& directive = node.at("x-archivist");
        if (!directive.is_object()) {
            report(path + "/x-archivist", "x-archivist must be an object");
            return;
        }
        for (auto it = directive.begin(); it != directive.end(); ++it) {
            const std::string& key = it.key();
            if (key != "source" && key != "compute" && key != "unit" && key != "optional") {
                report(path + "/x-archivist/" + key, "unknown directive key");
            }
        }
        const bool has_source = directive.contains("source");
        const bool has_compute = directive.contains("compute");
        if (has_source == has_compute) {
            report(path + "/x-archivist",
                   "leaf must carry exactly one of \"source\" or \"compute\"");
            return;
        }
        if (has_source) {
            const Value& source = directive.at("source");
            if (!source.is_string() || !is_valid_path_expr(source.get_ref<const std::string&>())) {
                report(path + "/x-archivist/source",
                       "\"source\" must be a fragment path expression");
            }
        } else {
            const Value& compute = directive.at("compute");
            if (!compute.is_string()) {
                report(path + "/x-archivist/compute", "\"compute\" must be expression text");
            } else {
                try {
                    ComputeExpr::parse(compute.get_ref<const std::string&>());
                } catch (const ComputeError& e) {
                    report(path + "/x-archivist/compute", e.message());
                }
                if (type != "number" && type != "integer") {
                    report(path + "/type",
                           "computed leaves yield Float and need type number or integer");
                }
            }
        }
        if (auto it = directive.find("unit"); it != directive.end() && !it->is_string()) {
            report(path + "/x-archivist/unit", "\"unit\" must be text");
        }
        if (auto it = directive.find("optional"); it != directive.end() && !it->is_boolean()) {
            report(path + "/x-archivist/optional", "\"optional\" must be a boolean");
        }
    }

    std::vector<SchemaIssue>& issues_;
};

} // namespace

std::vector<SchemaIssue> check_schema(const Value& document) {
    std::vector<SchemaIssue> issues;
    SchemaChecker checker(issues);
    checker.check_node(document, "", true);
    return issues;
}

StructuringSchema StructuringSchema::parse(Value document) {
    auto issues = check_schema(document);
    if (!issues.empty()) {
        throw SchemaValidationError(issues.front().message,
                                    issues.front().path.empty() ? "/" : issues.front().path);
    }
    std::string id = sha256_hex(to_canonical_json(document));
    return StructuringSchema(std::move(document), std::move(id));
}

StructuringSchema StructuringSchema::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open schema file", path);
    }
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw ConfigError("cannot read schema file", path);
    }
    Value document;
    try {
        document = Value::parse(bytes);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("schema file is not valid JSON: ") + e.what(), path);
    }
    return parse(std::move(document));
}

} // namespace archivist
