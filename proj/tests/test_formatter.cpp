#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <archivist/errors.hpp>
#include <archivist/exporter.hpp>
#include <archivist/expr.hpp>
#include <archivist/formatter.hpp>
#include <archivist/schema.hpp>

#include <charconv>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <vector>

using namespace archivist;

namespace {

FragmentNamespace reference_namespace() {
    FragmentNamespace ns;
    ns.add("config", Value::parse(R"({"procs":4,"threads":4,"sim_time":10.0,"scale":100})"));
    ns.add("time", Value::parse(R"({"real":120.0,"user":464.1,"sys":1.2})"));
    return ns;
}

StructuringSchema reference_schema() {
    return StructuringSchema::parse(Value::parse(R"({
      "type": "object",
      "properties": {
        "run": {
          "type": "object",
          "properties": {
            "scale": {"type": "integer", "x-archivist": {"source": "config/scale"}},
            "virtual_processes": {
              "type": "number",
              "x-archivist": {"compute": "${config/procs} * ${config/threads}"}
            },
            "real_time": {
              "type": "number",
              "x-archivist": {"source": "time/real", "unit": "s"}
            },
            "real_time_factor": {
              "type": "number",
              "x-archivist": {"compute": "${time/real} / ${config/sim_time}"}
            },
            "step_size": {
              "type": "number",
              "x-archivist": {"source": "config/step_size", "optional": true}
            }
          },
          "required": ["scale", "virtual_processes", "real_time", "real_time_factor"]
        }
      },
      "required": ["run"]
    })"));
}

// --- independent oracle: flatten to postfix, evaluate with a stack ------

struct GenNode {
    enum class Kind { Number, Ref, Binary } kind = Kind::Number;
    double number = 0.0;
    std::string ref;
    char op = '+';
    std::unique_ptr<GenNode> lhs;
    std::unique_ptr<GenNode> rhs;
};

std::unique_ptr<GenNode> gen_expr(std::mt19937_64& rng, int depth) {
    auto node = std::make_unique<GenNode>();
    const int choice = static_cast<int>(rng() % (depth > 0 ? 4 : 2));
    if (choice == 0) {
        node->kind = GenNode::Kind::Number;
        node->number = static_cast<double>(rng() % 20) + (rng() % 2 ? 0.5 : 0.0);
    } else if (choice == 1) {
        node->kind = GenNode::Kind::Ref;
        node->ref = (rng() % 2 == 0) ? "a/x" : "b/y";
    } else {
        node->kind = GenNode::Kind::Binary;
        node->op = "+-*/"[rng() % 4];
        node->lhs = gen_expr(rng, depth - 1);
        node->rhs = gen_expr(rng, depth - 1);
    }
    return node;
}

int precedence(char op) {
    return (op == '+' || op == '-') ? 1 : 2;
}

std::string render(const GenNode& node, std::mt19937_64& rng) {
    auto pad = [&]() { return rng() % 2 ? " " : ""; };
    switch (node.kind) {
    case GenNode::Kind::Number: {
        char buffer[32];
        auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), node.number);
        return std::string(buffer, ptr);
    }
    case GenNode::Kind::Ref:
        return "${" + node.ref + "}";
    case GenNode::Kind::Binary: {
        std::string lhs = render(*node.lhs, rng);
        std::string rhs = render(*node.rhs, rng);
        if (node.lhs->kind == GenNode::Kind::Binary &&
            precedence(node.lhs->op) < precedence(node.op)) {
            lhs = "(" + lhs + ")";
        }
        if (node.rhs->kind == GenNode::Kind::Binary &&
            precedence(node.rhs->op) <= precedence(node.op)) {
            rhs = "(" + rhs + ")";
        }
        return lhs + pad() + node.op + pad() + rhs;
    }
    }
    return {};
}

struct PostfixToken {
    enum class Kind { Number, Op } kind = Kind::Number;
    double number = 0.0;
    char op = '+';
};

void flatten(const GenNode& node, const Value& bindings, std::vector<PostfixToken>& out) {
    switch (node.kind) {
    case GenNode::Kind::Number:
        out.push_back({PostfixToken::Kind::Number, node.number, 0});
        break;
    case GenNode::Kind::Ref: {
        const Value* v = value_get(bindings, node.ref);
        out.push_back({PostfixToken::Kind::Number, v->get<double>(), 0});
        break;
    }
    case GenNode::Kind::Binary:
        flatten(*node.lhs, bindings, out);
        flatten(*node.rhs, bindings, out);
        out.push_back({PostfixToken::Kind::Op, 0.0, node.op});
        break;
    }
}

// Stack evaluation; div_by_zero reports unusable samples.
double eval_postfix(const std::vector<PostfixToken>& tokens, bool& div_by_zero) {
    std::vector<double> stack;
    for (const auto& token : tokens) {
        if (token.kind == PostfixToken::Kind::Number) {
            stack.push_back(token.number);
            continue;
        }
        double rhs = stack.back();
        stack.pop_back();
        double lhs = stack.back();
        stack.pop_back();
        switch (token.op) {
        case '+':
            stack.push_back(lhs + rhs);
            break;
        case '-':
            stack.push_back(lhs - rhs);
            break;
        case '*':
            stack.push_back(lhs * rhs);
            break;
        default:
            if (rhs == 0.0) {
                div_by_zero = true;
                stack.push_back(0.0);
            } else {
                stack.push_back(lhs / rhs);
            }
        }
    }
    return stack.back();
}

} // namespace

TEST_CASE("eval_compute precedence") {
    FragmentNamespace empty;
    CHECK(eval_compute(ComputeExpr::parse("2 + 3 * 4"), empty) == 14.0);
    CHECK(eval_compute(ComputeExpr::parse("(2 + 3) * 4"), empty) == 20.0);
    CHECK(eval_compute(ComputeExpr::parse("10 - 2 - 3"), empty) == 5.0);
    CHECK(eval_compute(ComputeExpr::parse("16 / 4 / 2"), empty) == 2.0);
    CHECK(eval_compute(ComputeExpr::parse("0.5 * 4"), empty) == 2.0);
}

TEST_CASE("eval_compute resolves references") {
    FragmentNamespace ns;
    ns.add("time", Value::parse(R"({"real":83.45})"));
    ns.add("config", Value::parse(R"({"sim_time":10.0})"));
    // Hand division oracle: 83.45 / 10.0.
    CHECK(eval_compute(ComputeExpr::parse("${time/real} / ${config/sim_time}"), ns) ==
          83.45 / 10.0);
}

TEST_CASE("integer operands are promoted to Float") {
    FragmentNamespace ns;
    ns.add("config", Value::parse(R"({"procs":4,"threads":4})"));
    double result = eval_compute(ComputeExpr::parse("${config/procs} * ${config/threads}"), ns);
    CHECK(result == 16.0);
}

TEST_CASE("division by zero is a compute error") {
    FragmentNamespace ns;
    ns.add("config", Value::parse(R"({"n":0})"));
    CHECK_THROWS_AS((void)eval_compute(ComputeExpr::parse("1 / ${config/n}"), ns), ComputeError);
}

TEST_CASE("non-finite results are compute errors") {
    FragmentNamespace ns;
    ns.add("c", Value::parse(R"({"big":1e308})"));
    CHECK_THROWS_AS((void)eval_compute(ComputeExpr::parse("${c/big} * ${c/big}"), ns),
                    ComputeError);
}

TEST_CASE("unresolved references are missing-source errors") {
    FragmentNamespace ns;
    ns.add("config", Value::parse(R"({"n":1})"));
    CHECK_THROWS_AS((void)eval_compute(ComputeExpr::parse("${config/absent} + 1"), ns),
                    MissingSourceError);
    CHECK_THROWS_AS((void)eval_compute(ComputeExpr::parse("${nosuch/x} + 1"), ns),
                    MissingSourceError);
}

TEST_CASE("non-numeric references are compute errors") {
    FragmentNamespace ns;
    ns.add("env", Value::parse(R"({"PATH":"/usr/bin","flag":true})"));
    CHECK_THROWS_AS((void)eval_compute(ComputeExpr::parse("${env/PATH} + 1"), ns), ComputeError);
    CHECK_THROWS_AS((void)eval_compute(ComputeExpr::parse("${env/flag} + 1"), ns), ComputeError);
}

TEST_CASE("expression syntax errors") {
    CHECK_THROWS_AS((void)ComputeExpr::parse(""), ComputeError);
    CHECK_THROWS_AS((void)ComputeExpr::parse("2 +"), ComputeError);
    CHECK_THROWS_AS((void)ComputeExpr::parse("(2"), ComputeError);
    CHECK_THROWS_AS((void)ComputeExpr::parse("2)"), ComputeError);
    CHECK_THROWS_AS((void)ComputeExpr::parse("-2"), ComputeError); // no unary minus
    CHECK_THROWS_AS((void)ComputeExpr::parse("a + 2"), ComputeError);
    CHECK_THROWS_AS((void)ComputeExpr::parse("${}"), ComputeError);
    CHECK_THROWS_AS((void)ComputeExpr::parse("${a//b}"), ComputeError);
    CHECK_THROWS_AS((void)ComputeExpr::parse("${a/b"), ComputeError);
    CHECK_THROWS_AS((void)ComputeExpr::parse("$a"), ComputeError);
    CHECK_THROWS_AS((void)ComputeExpr::parse("2 2"), ComputeError);
}

TEST_CASE("references are reported in source order") {
    auto expr = ComputeExpr::parse("${a/x} + ${b/y} * ${a/z}");
    CHECK(expr.references() == std::vector<std::string>{"a/x", "b/y", "a/z"});
}

TEST_CASE("path expression syntax") {
    CHECK(is_valid_path_expr("config"));
    CHECK(is_valid_path_expr("config/procs"));
    CHECK(is_valid_path_expr("logs/0/wall"));
    CHECK_FALSE(is_valid_path_expr(""));
    CHECK_FALSE(is_valid_path_expr("1config/x"));
    CHECK_FALSE(is_valid_path_expr("config/"));
    CHECK_FALSE(is_valid_path_expr("config//x"));
    CHECK_FALSE(is_valid_path_expr("/x"));
}

TEST_CASE("eval_compute agrees with a postfix oracle") {
    std::mt19937_64 rng(0x5eed07);
    Value bindings = Value::parse(R"({"a":{"x":2.5},"b":{"y":4}})");
    FragmentNamespace ns;
    ns.add("a", bindings.at("a"));
    ns.add("b", bindings.at("b"));

    int usable = 0;
    for (int round = 0; round < 2000; ++round) {
        auto tree = gen_expr(rng, 4);
        std::vector<PostfixToken> postfix;
        flatten(*tree, bindings, postfix);
        bool div_by_zero = false;
        double expected = eval_postfix(postfix, div_by_zero);
        if (div_by_zero || !std::isfinite(expected)) {
            continue; // the implementation rejects these by contract
        }
        ++usable;
        std::string text = render(*tree, rng);
        CAPTURE(text);
        double got = eval_compute(ComputeExpr::parse(text), ns);
        CHECK(got == expected); // exact: both sides share the operation order
    }
    CHECK(usable > 1000);
}

TEST_CASE("namespace resolution for single- and multi-file rules") {
    FragmentNamespace ns;
    ns.add("logs", Value::parse(R"({"wall":1.5})"));
    ns.add("logs", Value::parse(R"({"wall":2.5})"));
    ns.add("config", Value::parse(R"({"procs":4})"));

    CHECK(ns.file_count("logs") == 2);
    CHECK(*ns.resolve("logs/0/wall") == 1.5);
    CHECK(*ns.resolve("logs/1/wall") == 2.5);
    CHECK(ns.resolve("logs/2/wall") == nullptr); // index out of range
    CHECK(ns.resolve("logs/0/cpu") == nullptr);
    CHECK(ns.resolve("nosuch/x") == nullptr);
    CHECK(*ns.resolve("config/procs") == 4);
    CHECK(ns.resolve("config")->is_object()); // bare rule, single file

    CHECK_THROWS_AS((void)ns.resolve("logs/wall"), MissingSourceError); // bare multi-file
    CHECK_THROWS_AS((void)ns.resolve("logs"), MissingSourceError);
}

TEST_CASE("namespace passthrough document") {
    FragmentNamespace ns;
    ns.add("config", Value::parse(R"({"a":1})"));
    ns.add("logs", Value::parse(R"({"w":1})"));
    ns.add("logs", Value::parse(R"({"w":2})"));
    Value doc = ns.to_value();
    CHECK(doc.at("config").is_object());
    REQUIRE(doc.at("logs").is_array());
    CHECK(doc.at("logs").size() == 2);
    CHECK(doc.at("logs")[0].at("w") == 1);
}

TEST_CASE("assemble computes the reference fields") {
    StructuredMetadata meta = assemble(reference_namespace(), reference_schema());
    const Value& run = meta.body.at("run");

    // 4 * 4 and 120 / 10, Float by the compute contract.
    CHECK(run.at("virtual_processes").is_number_float());
    CHECK(run.at("virtual_processes").get<double>() == 16.0);
    CHECK(run.at("real_time_factor").is_number_float());
    CHECK(run.at("real_time_factor").get<double>() == 12.0);

    // Unit wrapping.
    CHECK(strict_equal(run.at("real_time"), Value::parse(R"({"value":120.0,"unit":"s"})")));

    // Selection keeps the Integer kind.
    CHECK(strict_equal(run.at("scale"), Value(100)));

    // Optional leaf with missing source is omitted; unreferenced namespace
    // entries are filtered out.
    CHECK_FALSE(run.contains("step_size"));
    CHECK(to_canonical_json(meta.body).find("user") == std::string::npos);
    CHECK(to_canonical_json(meta.body).find("sys") == std::string::npos);

    CHECK(meta.schema_id == reference_schema().id());
    CHECK(meta.schema_id.size() == 64);
}

TEST_CASE("assemble is deterministic and validates its own product") {
    StructuredMetadata a = assemble(reference_namespace(), reference_schema());
    StructuredMetadata b = assemble(reference_namespace(), reference_schema());
    CHECK(strict_equal(a.body, b.body));
    CHECK_NOTHROW(validate(a.body, reference_schema()));
}

TEST_CASE("missing non-optional source names the path expression") {
    FragmentNamespace ns;
    ns.add("config", Value::parse(R"({"procs":4})"));
    auto schema = StructuringSchema::parse(Value::parse(R"({
      "type":"object",
      "properties":{"x":{"type":"number","x-archivist":{"source":"config/absent"}}},
      "required":["x"]
    })"));
    try {
        (void)assemble(ns, schema);
        FAIL("expected MissingSourceError");
    } catch (const MissingSourceError& e) {
        CHECK(std::string(e.what()).find("config/absent") != std::string::npos);
    }
}

TEST_CASE("optional compute with missing input is omitted") {
    FragmentNamespace ns;
    ns.add("config", Value::parse(R"({"procs":4})"));
    auto schema = StructuringSchema::parse(Value::parse(R"({
      "type":"object",
      "properties":{
        "x":{"type":"number","x-archivist":{"compute":"${config/absent} * 2","optional":true}},
        "y":{"type":"number","x-archivist":{"source":"config/procs"}}
      },
      "required":["y"]
    })"));
    StructuredMetadata meta = assemble(ns, schema);
    CHECK_FALSE(meta.body.contains("x"));
    CHECK(meta.body.at("y") == 4);
}

TEST_CASE("optional never hides structural misuse of multi-file rules") {
    FragmentNamespace ns;
    ns.add("logs", Value::parse(R"({"w":1})"));
    ns.add("logs", Value::parse(R"({"w":2})"));
    auto schema = StructuringSchema::parse(Value::parse(R"({
      "type":"object",
      "properties":{
        "x":{"type":"number","x-archivist":{"compute":"${logs/w} * 2","optional":true}}
      }
    })"));
    CHECK_THROWS_AS((void)assemble(ns, schema), MissingSourceError);
}

TEST_CASE("units are allowed on computed leaves") {
    FragmentNamespace ns;
    ns.add("time", Value::parse(R"({"real":120.0})"));
    ns.add("config", Value::parse(R"({"sim_time":10.0})"));
    auto schema = StructuringSchema::parse(Value::parse(R"({
      "type":"object",
      "properties":{
        "rtf":{"type":"number",
               "x-archivist":{"compute":"${time/real} / ${config/sim_time}","unit":"1"}}
      },
      "required":["rtf"]
    })"));
    StructuredMetadata meta = assemble(ns, schema);
    CHECK(strict_equal(meta.body.at("rtf"), Value::parse(R"({"value":12.0,"unit":"1"})")));
    CHECK_NOTHROW(validate(meta.body, schema));
}

TEST_CASE("selected values must match the declared type") {
    FragmentNamespace ns;
    ns.add("config", Value::parse(R"({"name":"mysim"})"));
    auto schema = StructuringSchema::parse(Value::parse(R"({
      "type":"object",
      "properties":{"x":{"type":"number","x-archivist":{"source":"config/name"}}},
      "required":["x"]
    })"));
    CHECK_THROWS_AS((void)assemble(ns, schema), SchemaValidationError);
}

TEST_CASE("compute division by zero surfaces from assemble") {
    FragmentNamespace ns;
    ns.add("config", Value::parse(R"({"n":0})"));
    auto schema = StructuringSchema::parse(Value::parse(R"({
      "type":"object",
      "properties":{"x":{"type":"number","x-archivist":{"compute":"1 / ${config/n}"}}}
    })"));
    CHECK_THROWS_AS((void)assemble(ns, schema), ComputeError);
}

TEST_CASE("multi-file sources need an index") {
    FragmentNamespace ns;
    ns.add("logs", Value::parse(R"({"w":1.0})"));
    ns.add("logs", Value::parse(R"({"w":2.0})"));
    auto indexed = StructuringSchema::parse(Value::parse(R"({
      "type":"object",
      "properties":{"second":{"type":"number","x-archivist":{"source":"logs/1/w"}}}
    })"));
    CHECK(assemble(ns, indexed).body.at("second") == 2.0);

    auto bare = StructuringSchema::parse(Value::parse(R"({
      "type":"object",
      "properties":{"w":{"type":"number","x-archivist":{"source":"logs/w"}}}
    })"));
    CHECK_THROWS_AS((void)assemble(ns, bare), MissingSourceError);
}

TEST_CASE("validate accepts and rejects per the three reference cases") {
    auto schema = StructuringSchema::parse(Value::parse(R"({
      "type":"object",
      "properties":{"a":{"type":"integer","x-archivist":{"source":"c/a"}}},
      "required":["a"]
    })"));
    CHECK_NOTHROW(validate(Value::parse(R"({"a":1})"), schema));

    try {
        validate(Value::parse("{}"), schema);
        FAIL("expected SchemaValidationError");
    } catch (const SchemaValidationError& e) {
        CHECK(e.path() == "/a");
    }

    auto number_schema = StructuringSchema::parse(Value::parse(R"({
      "type":"object",
      "properties":{"a":{"type":"number","x-archivist":{"source":"c/a"}}}
    })"));
    try {
        validate(Value::parse(R"({"a":"x"})"), number_schema);
        FAIL("expected SchemaValidationError");
    } catch (const SchemaValidationError& e) {
        CHECK(e.path() == "/a");
    }
}

TEST_CASE("integer type follows JSON Schema semantics for integral floats") {
    auto schema = StructuringSchema::parse(Value::parse(R"({
      "type":"object",
      "properties":{"n":{"type":"integer","x-archivist":{"compute":"4 * 4"}}}
    })"));
    FragmentNamespace empty;
    StructuredMetadata meta = assemble(empty, schema);
    CHECK(meta.body.at("n").get<double>() == 16.0); // 16.0 counts as integer

    CHECK_THROWS_AS(validate(Value::parse(R"({"n":16.5})"), schema), SchemaValidationError);
}

TEST_CASE("validate rejects non-finite floats anywhere") {
    auto schema = StructuringSchema::parse(Value::parse(R"({
      "type":"object",
      "properties":{"x":{"type":"number","x-archivist":{"source":"c/x"}}}
    })"));
    Value body = Value::object();
    body["x"] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(validate(body, schema), SchemaValidationError);

    Value nested = Value::parse(R"({"x":{"value":1.0,"unit":"s"}})");
    CHECK_NOTHROW(ensure_finite_floats(nested));
    nested["x"]["value"] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(ensure_finite_floats(nested), SchemaValidationError);
}

TEST_CASE("schema checking finds every violation with its path") {
    Value bad = Value::parse(R"({
      "type":"object",
      "properties":{
        "both":{"type":"number","x-archivist":{"source":"a/b","compute":"1 + 1"}},
        "paren":{"type":"number","x-archivist":{"compute":"(1 + 2"}},
        "typo":{"type":"number","x-archivist":{"source":"a/b","unknown_key":1}},
        "bare":{"type":"string"},
        "badunit":{"type":"number","x-archivist":{"source":"a/b","unit":7}},
        "badopt":{"type":"number","x-archivist":{"source":"a/b","optional":"yes"}},
        "strcompute":{"type":"string","x-archivist":{"compute":"1 + 1"}}
      },
      "required":["both","ghost"]
    })");
    auto issues = check_schema(bad);
    auto has = [&](std::string_view path_part, std::string_view msg_part) {
        for (const auto& issue : issues) {
            if (issue.path.find(path_part) != std::string::npos &&
                issue.message.find(msg_part) != std::string::npos) {
                return true;
            }
        }
        return false;
    };
    CHECK(has("/properties/both/x-archivist", "exactly one"));
    CHECK(has("/properties/paren/x-archivist/compute", "expected ')'"));
    CHECK(has("/properties/typo/x-archivist/unknown_key", "unknown directive"));
    CHECK(has("/properties/bare", "needs an x-archivist directive"));
    CHECK(has("/properties/badunit/x-archivist/unit", "must be text"));
    CHECK(has("/properties/badopt/x-archivist/optional", "must be a boolean"));
    CHECK(has("/properties/strcompute/type", "number or integer"));
    CHECK(has("/required", "ghost"));
    CHECK(issues.size() >= 8);
}

TEST_CASE("schema structural rules") {
    CHECK(check_schema(reference_schema().root()).empty()); // the fixture schema is valid

    CHECK(!check_schema(Value::parse(R"([1,2])")).empty());
    CHECK(!check_schema(Value::parse(R"({"type":"number"})")).empty()); // root must be object
    CHECK(!check_schema(Value::parse(R"({"type":"object"})")).empty()); // root needs properties
    CHECK(!check_schema(Value::parse(
               R"({"type":"object","properties":{"a":{"type":"frobnicate"}}})"))
               .empty());
    CHECK(!check_schema(Value::parse(
               R"({"type":"object","properties":{},"x-archivist":{"source":"a"}})"))
               .empty());
    CHECK_THROWS_AS((void)StructuringSchema::parse(Value::parse(R"({"type":"number"})")),
                    SchemaValidationError);
}

TEST_CASE("schema identity is formatting-independent") {
    Value compact = Value::parse(
        R"({"type":"object","properties":{"a":{"type":"integer","x-archivist":{"source":"c/a"}}}})");
    Value spaced = Value::parse(R"({
        "properties": {
            "a": {"x-archivist": {"source": "c/a"}, "type": "integer"}
        },
        "type": "object"
    })");
    CHECK(StructuringSchema::parse(compact).id() == StructuringSchema::parse(spaced).id());
}

TEST_CASE("selection subset: output scalars exist in the namespace") {
    auto ns = reference_namespace();
    StructuredMetadata meta = assemble(ns, reference_schema());
    // scale was selected, not invented.
    CHECK(strict_equal(meta.body.at("run").at("scale"), *ns.resolve("config/scale")));
    CHECK(strict_equal(meta.body.at("run").at("real_time").at("value"),
                       *ns.resolve("time/real")));
}
