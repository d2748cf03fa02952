// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "relassess/gateway.hpp"

namespace relassess {
namespace {

void BM_ParseStructuredBare(benchmark::State& state) {
    const std::string raw = R"({"label":"acceptable_substitute","reasoning":"same type, different colour"})";
    for (auto _ : state) benchmark::DoNotOptimize(parse_structured(raw, kSchemaJudgment));
}
BENCHMARK(BM_ParseStructuredBare);

void BM_ParseStructuredWrapped(benchmark::State& state) {
    std::string raw = "Here is my assessment. I compared {the title} against the query.\n";
    raw += std::string(static_cast<std::size_t>(state.range(0)), 'x');
    raw += "\n```json\n{\"label\": \"irrelevant\", \"reasoning\": \"wrong {brand}\", \"confidence\": 0.4}\n```\n";
    for (auto _ : state) benchmark::DoNotOptimize(parse_structured(raw, kSchemaJudgment));
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(raw.size()));
}
BENCHMARK(BM_ParseStructuredWrapped)->Arg(64)->Arg(4096);

}  // namespace
}  // namespace relassess
