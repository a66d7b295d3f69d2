#include "archivist/formatter.hpp"

#include "archivist/errors.hpp"
#include "archivist/value.hpp"

#include <charconv>
#include <cmath>
#include <optional>

namespace archivist {

namespace {

bool parse_list_index(std::string_view segment, std::size_t& out) {
    if (segment.empty() || segment.size() > 18) {
        return false;
    }
    for (char c : segment) {
        if (c < '0' || c > '9') {
            return false;
        }
    }
    auto [ptr, ec] = std::from_chars(segment.data(), segment.data() + segment.size(), out);
    return ec == std::errc() && ptr == segment.data() + segment.size();
}

bool is_integral_float(const Value& v) {
    double d = v.get<double>();
    return std::isfinite(d) && std::nearbyint(d) == d;
}

bool matches_type(const Value& v, std::string_view type) {
    if (type == "object") {
        return v.is_object();
    }
    if (type == "array") {
        return v.is_array();
    }
    if (type == "string") {
        return v.is_string();
    }
    if (type == "boolean") {
        return v.is_boolean();
    }
    if (type == "number") {
        return is_numeric(v);
    }
    if (type == "integer") {
        // JSON Schema semantics: a Float with zero fractional part counts.
        return v.is_number_integer() || v.is_number_unsigned() ||
               (v.is_number_float() && is_integral_float(v));
    }
    return false;
}

void check_finite(const Value& v, const std::string& path) {
    if (v.is_number_float() && !std::isfinite(v.get<double>())) {
        throw SchemaValidationError("float value is not finite", path.empty() ? "/" : path);
    }
    if (v.is_object()) {
        for (auto it = v.begin(); it != v.end(); ++it) {
            check_finite(it.value(), path + "/" + it.key());
        }
    } else if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            check_finite(v[i], path + "/" + std::to_string(i));
        }
    }
}

const Value* directive_of(const Value& node) {
    auto it = node.find("x-archivist");
    return it == node.end() ? nullptr : &*it;
}

void validate_node(const Value& body, const Value& node, const std::string& path) {
    const std::string& type = node.at("type").get_ref<const std::string&>();
    auto properties = node.find("properties");

    if (properties != node.end()) {
        if (!body.is_object()) {
            throw SchemaValidationError("expected an object", path.empty() ? "/" : path);
        }
        if (auto required = node.find("required"); required != node.end()) {
            for (const auto& name : *required) {
                const std::string& key = name.get_ref<const std::string&>();
                if (!body.contains(key)) {
                    throw SchemaValidationError("missing required field", path + "/" + key);
                }
            }
        }
        for (auto child = properties->begin(); child != properties->end(); ++child) {
            auto present = body.find(child.key());
            if (present != body.end()) {
                validate_node(*present, child.value(), path + "/" + child.key());
            }
        }
        return;
    }

    // Leaf. Unit-wrapped leaves validate against the wrapped payload.
    const Value* payload = &body;
    const Value* directive = directive_of(node);
    if (directive != nullptr && directive->contains("unit")) {
        if (!body.is_object() || !body.contains("value") || !body.contains("unit") ||
            body.size() != 2 || !body.at("unit").is_string()) {
            throw SchemaValidationError("expected a {value, unit} wrapper",
                                        path.empty() ? "/" : path);
        }
        payload = &body.at("value");
    }
    if (!matches_type(*payload, type)) {
        throw SchemaValidationError("value does not match declared type \"" + type + "\"",
                                    path.empty() ? "/" : path);
    }
    check_finite(*payload, path);
}

class Assembler {
public:
    explicit Assembler(const FragmentNamespace& ns) : ns_(ns) {}

    std::optional<Value> build_node(const Value& node, const std::string& path) {
        if (node.contains("properties")) {
            Value out = Value::object();
            const Value& properties = node.at("properties");
            for (auto child = properties.begin(); child != properties.end(); ++child) {
                auto built = build_node(child.value(), path + "/" + child.key());
                if (built) {
                    out[child.key()] = std::move(*built);
                }
            }
            return out;
        }

        const Value& directive = node.at("x-archivist");
        const bool optional = directive.value("optional", false);
        std::optional<Value> produced;

        if (auto source = directive.find("source"); source != directive.end()) {
            const std::string& expr = source->get_ref<const std::string&>();
            const Value* found = ns_.resolve(expr);
            if (found == nullptr) {
                if (optional) {
                    return std::nullopt;
                }
                throw MissingSourceError("source \"" + expr + "\" resolves to nothing", path);
            }
            produced = *found;
        } else {
            const std::string& text = directive.at("compute").get_ref<const std::string&>();
            ComputeExpr expr = ComputeExpr::parse(text);
            // Track whether a failure came from absent data (softened by
            // `optional`) or from misuse like an unindexed multi-file
            // reference (never softened).
            bool soft_missing = false;
            auto resolver = [&](std::string_view ref) {
                const Value* v = ns_.resolve(ref);
                if (v == nullptr) {
                    soft_missing = true;
                }
                return v;
            };
            try {
                produced = Value(eval_compute_with(expr, resolver));
            } catch (const MissingSourceError&) {
                if (optional && soft_missing) {
                    return std::nullopt;
                }
                throw;
            }
        }

        if (auto unit = directive.find("unit"); unit != directive.end()) {
            Value wrapped = Value::object();
            wrapped["value"] = std::move(*produced);
            wrapped["unit"] = *unit;
            produced = std::move(wrapped);
        }
        return produced;
    }

private:
    static double eval_compute_with(const ComputeExpr& expr, const PathResolver& resolve) {
        return expr.evaluate(resolve);
    }

    const FragmentNamespace& ns_;
};

} // namespace

FragmentNamespace FragmentNamespace::from_fragments(const std::vector<Fragment>& fragments) {
    FragmentNamespace ns;
    for (const auto& fragment : fragments) {
        ns.add(fragment.rule, fragment.body);
    }
    return ns;
}

void FragmentNamespace::add(std::string rule, Value body) {
    for (auto& [name, bodies] : slots_) {
        if (name == rule) {
            bodies.push_back(std::move(body));
            return;
        }
    }
    slots_.emplace_back(std::move(rule), std::vector<Value>{std::move(body)});
}

bool FragmentNamespace::contains(std::string_view rule) const {
    for (const auto& [name, bodies] : slots_) {
        if (name == rule) {
            return true;
        }
    }
    return false;
}

std::size_t FragmentNamespace::file_count(std::string_view rule) const {
    for (const auto& [name, bodies] : slots_) {
        if (name == rule) {
            return bodies.size();
        }
    }
    return 0;
}

const Value* FragmentNamespace::resolve(std::string_view path_expr) const {
    std::size_t slash = path_expr.find('/');
    std::string_view rule = (slash == std::string_view::npos) ? path_expr
                                                              : path_expr.substr(0, slash);
    std::string_view pointer = (slash == std::string_view::npos) ? std::string_view{}
                                                                 : path_expr.substr(slash + 1);
    const std::vector<Value>* bodies = nullptr;
    for (const auto& [name, slot] : slots_) {
        if (name == rule) {
            bodies = &slot;
            break;
        }
    }
    if (bodies == nullptr) {
        return nullptr;
    }
    if (bodies->size() == 1) {
        return value_get(bodies->front(), pointer);
    }
    // Multi-file rule: the first pointer segment must pick the file.
    std::size_t next = pointer.find('/');
    std::string_view head = (next == std::string_view::npos) ? pointer : pointer.substr(0, next);
    std::size_t index = 0;
    if (!parse_list_index(head, index)) {
        throw MissingSourceError("rule \"" + std::string(rule) + "\" matched " +
                                 std::to_string(bodies->size()) +
                                 " files; address them as \"" + std::string(rule) +
                                 "/<index>/...\" (got \"" + std::string(path_expr) + "\")");
    }
    if (index >= bodies->size()) {
        return nullptr;
    }
    std::string_view rest = (next == std::string_view::npos) ? std::string_view{}
                                                             : pointer.substr(next + 1);
    return value_get((*bodies)[index], rest);
}

Value FragmentNamespace::to_value() const {
    Value out = Value::object();
    for (const auto& [name, bodies] : slots_) {
        if (bodies.size() == 1) {
            out[name] = bodies.front();
        } else {
            Value list = Value::array();
            for (const auto& body : bodies) {
                list.push_back(body);
            }
            out[name] = std::move(list);
        }
    }
    return out;
}

double eval_compute(const ComputeExpr& expr, const FragmentNamespace& ns) {
    return expr.evaluate(ns.resolver());
}

void validate(const Value& body, const StructuringSchema& schema) {
    validate_node(body, schema.root(), "");
}

void ensure_finite_floats(const Value& body) {
    check_finite(body, "");
}

StructuredMetadata assemble(const FragmentNamespace& ns, const StructuringSchema& schema) {
    Assembler assembler(ns);
    auto body = assembler.build_node(schema.root(), "");
    StructuredMetadata meta;
    meta.body = std::move(*body);
    meta.schema_id = schema.id();
    validate(meta.body, schema);
    return meta;
}

} // namespace archivist
