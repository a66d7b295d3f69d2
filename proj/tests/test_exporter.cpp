#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <archivist/errors.hpp>
#include <archivist/exporter.hpp>
#include <archivist/parsers.hpp>

#include "value_gen.hpp"

#include <random>

using namespace archivist;

namespace {

StructuredMetadata meta_of(Value body) {
    StructuredMetadata meta;
    meta.body = std::move(body);
    meta.schema_id = "test";
    return meta;
}

} // namespace

TEST_CASE("object keys are emitted sorted") {
    Value body = Value::object();
    body["b"] = 1;
    body["a"] = 2;
    std::string out = export_json(meta_of(body));
    CHECK(out == "{\n  \"a\": 2,\n  \"b\": 1\n}\n");
    CHECK(out.find("\"a\"") < out.find("\"b\""));
}

TEST_CASE("floats always carry a fraction marker") {
    Value body = Value::object();
    body["x"] = 16.0;
    std::string out = export_json(meta_of(body));
    CHECK(out.find("\"x\": 16.0") != std::string::npos);

    // Parse-back oracle: the rendering reproduces the exact Float.
    Value round = parse_json(out);
    CHECK(round.at("x").is_number_float());
    CHECK(round.at("x").get<double>() == 16.0);
}

TEST_CASE("integers print without decimal point") {
    Value body = Value::object();
    body["n"] = 16;
    body["min"] = std::numeric_limits<std::int64_t>::min();
    body["max"] = std::numeric_limits<std::int64_t>::max();
    std::string out = export_json(meta_of(body));
    CHECK(out.find("\"n\": 16\n") != std::string::npos);
    CHECK(out.find("-9223372036854775808") != std::string::npos);
    CHECK(out.find("9223372036854775807") != std::string::npos);
    CHECK(strict_equal(parse_json(out), body));
}

TEST_CASE("empty document") {
    CHECK(export_json(meta_of(Value::object())) == "{}\n");
}

TEST_CASE("string escaping") {
    Value body = Value::object();
    body["s"] = std::string("a\"b\\c\nd\te\x01") + "\xC3\xA9";
    std::string out = export_json(meta_of(body));
    CHECK(out.find("a\\\"b\\\\c\\nd\\te\\u0001\xC3\xA9") != std::string::npos);
    CHECK(strict_equal(parse_json(out), body));
}

TEST_CASE("pretty and compact forms agree on content") {
    Value v = Value::parse(R"({"z":[1,2.5,{"k":true}],"a":null})");
    std::string compact = to_canonical_json(v);
    CHECK(compact == R"({"a":null,"z":[1,2.5,{"k":true}]})");
    CHECK(compact.find('\n') == std::string::npos);
    CHECK(strict_equal(parse_json(compact), parse_json(to_canonical_json_pretty(v))));
}

TEST_CASE("interesting float renderings survive the parse-back oracle") {
    const double cases[] = {0.1,
                            1.0 / 3.0,
                            -0.0,
                            5e-324,  // smallest subnormal
                            1.7976931348623157e308,
                            12.0,
                            1e100};
    for (double d : cases) {
        Value v = d;
        std::string text = to_canonical_json(v);
        Value back = parse_json(text);
        REQUIRE(back.is_number_float());
        CHECK(back.get<double>() == d);
        // Float kind is visible in the text itself.
        CHECK((text.find('.') != std::string::npos || text.find('e') != std::string::npos));
    }
    CHECK(to_canonical_json(Value(0.1)) == "0.1");
    CHECK(to_canonical_json(Value(12.0)) == "12.0");
    CHECK(to_canonical_json(Value(-0.0)) == "-0.0");
}

TEST_CASE("round-trip: parse_json after export_json is the identity") {
    std::mt19937_64 rng(0x5eed04);
    for (int round = 0; round < 300; ++round) {
        StructuredMetadata meta = meta_of(testutil::random_metadata_body(rng));
        Value back = parse_json(export_json(meta));
        CHECK(strict_equal(back, meta.body));
    }
}

TEST_CASE("export is byte-deterministic") {
    std::mt19937_64 rng(0x5eed05);
    for (int round = 0; round < 50; ++round) {
        StructuredMetadata meta = meta_of(testutil::random_metadata_body(rng));
        CHECK(export_json(meta) == export_json(meta));
        CHECK(to_canonical_json(meta.body) == to_canonical_json(meta.body));
    }
}

TEST_CASE("key order never leaks into canonical output") {
    Value forward = Value::object();
    forward["a"] = 1;
    forward["b"] = 2;
    Value backward = Value::object();
    backward["b"] = 2;
    backward["a"] = 1;
    CHECK(to_canonical_json(forward) == to_canonical_json(backward));
}

TEST_CASE("exporter registry") {
    auto registry = ExporterRegistry::with_builtins();
    StructuredMetadata meta = meta_of(Value::parse(R"({"x":1})"));

    CHECK(registry.export_with("json", meta) == export_json(meta)); // default binding

    CHECK_THROWS_AS((void)registry.export_with("tsv", meta), UnknownExporterError);

    registry.register_exporter("tsv", [](const StructuredMetadata& m) {
        std::string out;
        for (auto it = m.body.begin(); it != m.body.end(); ++it) {
            out += it.key() + "\t" + to_canonical_json(it.value()) + "\n";
        }
        return out;
    });
    CHECK(registry.export_with("tsv", meta) == "x\t1\n");

    CHECK_THROWS_AS(registry.register_exporter("tsv",
                                               [](const StructuredMetadata&) {
                                                   return std::string();
                                               }),
                    RegistryConflictError);
}
