#include <archivist/parsers.hpp>

#include <benchmark/benchmark.h>

#include <string>

namespace {

std::string keyvalue_input(std::size_t lines) {
    std::string text;
    for (std::size_t i = 0; i < lines; ++i) {
        text += "key_" + std::to_string(i) + ": " + std::to_string(i) + ".5\n";
    }
    return text;
}

void BM_ParseKeyValue(benchmark::State& state) {
    const std::string input = keyvalue_input(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(archivist::parse_keyvalue(input));
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(input.size()));
}
BENCHMARK(BM_ParseKeyValue)->Arg(16)->Arg(256)->Arg(4096);

void BM_ParseTime(benchmark::State& state) {
    const std::string input = "real\t12m34.567s\nuser\t98m45.3s\nsys\t0m1.002s\n";
    for (auto _ : state) {
        benchmark::DoNotOptimize(archivist::parse_time(input));
    }
}
BENCHMARK(BM_ParseTime);

void BM_ParseJson(benchmark::State& state) {
    std::string input = "{\"xs\":[";
    for (int i = 0; i < state.range(0); ++i) {
        input += (i ? "," : "");
        input += "{\"i\":" + std::to_string(i) + ",\"f\":" + std::to_string(i) + ".25}";
    }
    input += "]}";
    for (auto _ : state) {
        benchmark::DoNotOptimize(archivist::parse_json(input));
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(input.size()));
}
BENCHMARK(BM_ParseJson)->Arg(64)->Arg(1024);

void BM_RegexCapture(benchmark::State& state) {
    const std::string input = "step 12 done in wall=123.456s on node 7";
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            archivist::parse_regex_capture(input, "wall=(?<wall>[0-9.]+)s"));
    }
}
BENCHMARK(BM_RegexCapture);

} // namespace
