#include <string>

#include <benchmark/benchmark.h>

#include "evn/gateway/json_extract.hpp"

namespace {

void BM_ExtractFenced(benchmark::State& state) {
    std::string text = "Here is the result you asked for.\n```json\n{\"hidden_assumptions\": [";
    for (int i = 0; i < state.range(0); ++i) text += (i ? ", " : "") + std::string("\"a {nested} \\\"quoted\\\" item\"");
    text += "], \"novelty_score\": 0.8}\n```\nLet me know if you need more.";
    for (auto _ : state) benchmark::DoNotOptimize(evn::gateway::extract_json(text));
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ExtractFenced)->Arg(5)->Arg(500);

void BM_ExtractNoJson(benchmark::State& state) {
    const std::string text(static_cast<std::size_t>(state.range(0)), 'x');
    for (auto _ : state) benchmark::DoNotOptimize(evn::gateway::extract_json(text));
}
BENCHMARK(BM_ExtractNoJson)->Arg(4096);

}  // namespace
