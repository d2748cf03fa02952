// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <random>

#include "relassess/analysis.hpp"
#include "relassess/model.hpp"

namespace relassess {
namespace {

RelevanceLabel random_label(std::mt19937_64& rng) {
    return static_cast<RelevanceLabel>(rng() % 3);
}

struct Population {
    LabeledSet candidate;
    std::vector<AnnotationSet> annotations;
};

Population make_population(std::size_t pairs) {
    std::mt19937_64 rng(42);
    Population p;
    for (std::size_t i = 0; i < pairs; ++i) {
        AnnotationSet a;
        a.pair_id = {"q" + std::to_string(i / 20), "p" + std::to_string(i)};
        a.a1 = random_label(rng);
        a.a2 = random_label(rng);
        if (*a.a1 != *a.a2) a.tiebreaker = random_label(rng);
        p.candidate[a.pair_id] = random_label(rng);
        p.annotations.push_back(std::move(a));
    }
    return p;
}

void BM_MajorityVote(benchmark::State& state) {
    std::mt19937_64 rng(7);
    std::vector<RelevanceLabel> labels(3 * 1024);
    for (auto& l : labels) l = random_label(rng);
    std::size_t i = 0;
    for (auto _ : state) {
        const std::size_t at = (i++ % 1024) * 3;
        benchmark::DoNotOptimize(majority_vote(labels[at], labels[at + 1], labels[at + 2]));
    }
}
BENCHMARK(BM_MajorityVote);

void BM_AgreementVsMajority(benchmark::State& state) {
    const auto p = make_population(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(agreement_vs_majority(p.candidate, p.annotations));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AgreementVsMajority)->Arg(1000)->Arg(20000);

void BM_HardDisagreements(benchmark::State& state) {
    const auto p = make_population(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(find_hard_disagreements(p.candidate, p.annotations));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_HardDisagreements)->Arg(1000)->Arg(20000);

}  // namespace
}  // namespace relassess
