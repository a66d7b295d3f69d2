#include <archivist/store.hpp>

#include <benchmark/benchmark.h>

#include <filesystem>
#include <random>
#include <string>

namespace {

namespace fs = std::filesystem;

class ScratchStore {
public:
    ScratchStore() {
        static std::mt19937_64 rng(std::random_device{}());
        root_ = fs::temp_directory_path() / ("archivist-bench-" + std::to_string(rng()));
        fs::create_directories(root_);
    }
    ~ScratchStore() {
        std::error_code ec;
        fs::remove_all(root_, ec);
    }
    std::string path() const { return root_.string(); }

private:
    fs::path root_;
};

void fill(archivist::Store& store, int records) {
    for (int i = 0; i < records; ++i) {
        archivist::StructuredMetadata meta;
        meta.body = archivist::Value::object();
        meta.body["vp"] = static_cast<double>((i % 8) * 4);
        meta.body["platform"] = "P" + std::to_string(i % 4);
        meta.body["rtf"] = 10.0 + i * 0.01;
        meta.schema_id = "bench";
        store.annotate("blob-" + std::to_string(i), meta);
    }
}

void BM_Annotate(benchmark::State& state) {
    for (auto _ : state) {
        state.PauseTiming();
        ScratchStore scratch;
        auto store = archivist::Store::open(scratch.path());
        state.ResumeTiming();
        fill(store, static_cast<int>(state.range(0)));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Annotate)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Query(benchmark::State& state) {
    ScratchStore scratch;
    auto store = archivist::Store::open(scratch.path());
    fill(store, static_cast<int>(state.range(0)));
    const std::vector<archivist::Predicate> predicates = {
        archivist::parse_predicate("vp == 16")};
    for (auto _ : state) {
        benchmark::DoNotOptimize(store.query(predicates));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Query)->Arg(64)->Arg(512)->Unit(benchmark::kMicrosecond);

void BM_Aggregate(benchmark::State& state) {
    ScratchStore scratch;
    auto store = archivist::Store::open(scratch.path());
    fill(store, static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(store.aggregate({}, "platform", "rtf"));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Aggregate)->Arg(64)->Arg(512)->Unit(benchmark::kMicrosecond);

} // namespace
