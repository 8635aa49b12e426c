#include <benchmark/benchmark.h>

#include "icsgap/advisory.hpp"
#include "icsgap/analytics.hpp"
#include "icsgap/attack_ingest.hpp"
#include "icsgap/extraction.hpp"
#include "icsgap/lexicon.hpp"
#include "icsgap/quality_control.hpp"
#include "icsgap/stix_extensions.hpp"

using namespace icsgap;

namespace {

const std::filesystem::path kData = ICSGAP_BENCH_DATA_DIR;

const std::string& bundle_text() {
    static const std::string s = read_file(kData / "attack" / "ics-attack-pinned.json");
    return s;
}

const std::vector<ProcedureRecord>& records() {
    static const auto r = extract_procedures(parse_bundle(bundle_text())).records;
    return r;
}

const std::vector<Observable>& extracted() {
    static const auto v = [] {
        LexiconBackend backend(Lexicon::load(kData / "lexicon.json"));
        return extract_all(records(), backend).observables;
    }();
    return v;
}

const std::vector<Observable>& curated() {
    static const auto v = read_dataset(kData / "curation" / "observables.curated.jsonl");
    return v;
}

void BM_IngestBundle(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(extract_procedures(parse_bundle(bundle_text())));
}
BENCHMARK(BM_IngestBundle)->Unit(benchmark::kMillisecond);

void BM_LexiconExtract(benchmark::State& state) {
    LexiconBackend backend(Lexicon::load(kData / "lexicon.json"));
    for (auto _ : state) benchmark::DoNotOptimize(extract_all(records(), backend, state.range(0)));
    state.SetItemsProcessed(state.iterations() * records().size());
}
BENCHMARK(BM_LexiconExtract)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Dedupe(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(dedupe(extracted()));
    state.SetItemsProcessed(state.iterations() * extracted().size());
}
BENCHMARK(BM_Dedupe);

void BM_Aggregate(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(aggregate_parallel(curated(), state.range(0)));
    state.SetItemsProcessed(state.iterations() * curated().size());
}
BENCHMARK(BM_Aggregate)->Arg(1)->Arg(4);

void BM_DatasetParse(benchmark::State& state) {
    std::string text = dump_dataset(curated());
    for (auto _ : state) benchmark::DoNotOptimize(parse_dataset(text));
}
BENCHMARK(BM_DatasetParse);

void BM_EmitExtensions(benchmark::State& state) {
    auto schemas = load_schemas(ICSGAP_BENCH_EXTENSIONS_DIR);
    for (auto _ : state) benchmark::DoNotOptimize(emit_extension_bundle(schemas).dump());
}
BENCHMARK(BM_EmitExtensions);

void BM_ScoreAdvisories(benchmark::State& state) {
    auto advisories = load_advisories(kData / "advisories.json");
    for (auto _ : state) benchmark::DoNotOptimize(tally(advisories));
}
BENCHMARK(BM_ScoreAdvisories);

}  // namespace
BENCHMARK_MAIN();
