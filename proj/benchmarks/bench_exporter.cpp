#include <archivist/exporter.hpp>
#include <archivist/expr.hpp>
#include <archivist/formatter.hpp>

#include <benchmark/benchmark.h>

namespace {

archivist::Value medium_document(int width) {
    archivist::Value doc = archivist::Value::object();
    for (int i = 0; i < width; ++i) {
        archivist::Value row = archivist::Value::object();
        row["name"] = "entry_" + std::to_string(i);
        row["count"] = i;
        row["ratio"] = 1.0 / (i + 1);
        row["tags"] = archivist::Value::array({"a", "b", "c"});
        doc["row_" + std::to_string(i)] = std::move(row);
    }
    return doc;
}

void BM_CanonicalPretty(benchmark::State& state) {
    const auto doc = medium_document(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(archivist::to_canonical_json_pretty(doc));
    }
}
BENCHMARK(BM_CanonicalPretty)->Arg(16)->Arg(256);

void BM_CanonicalCompact(benchmark::State& state) {
    const auto doc = medium_document(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(archivist::to_canonical_json(doc));
    }
}
BENCHMARK(BM_CanonicalCompact)->Arg(16)->Arg(256);

void BM_EvalCompute(benchmark::State& state) {
    archivist::FragmentNamespace ns;
    ns.add("config", archivist::Value::parse(R"({"procs":4,"threads":8,"sim_time":10.0})"));
    ns.add("time", archivist::Value::parse(R"({"real":123.456})"));
    const auto expr = archivist::ComputeExpr::parse(
        "(${time/real} / ${config/sim_time}) * ${config/procs} * ${config/threads} + 0.5");
    for (auto _ : state) {
        benchmark::DoNotOptimize(archivist::eval_compute(expr, ns));
    }
}
BENCHMARK(BM_EvalCompute);

} // namespace
