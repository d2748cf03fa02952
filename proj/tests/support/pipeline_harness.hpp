// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <set>

#include "relassess/cache_store.hpp"
#include "relassess/gateway.hpp"
#include "relassess/pipeline.hpp"
#include "relassess/prompts.hpp"
#include "test_support.hpp"

namespace relassess::testing {

inline ModelConfig stub_model(std::string id, bool images) {
    ModelConfig c;
    c.model_id = std::move(id);
    c.supports_image_input = images;
    c.max_parallel_requests = 8;
    c.price = {Decimal::parse("0.005"), Decimal::parse("0.015")};
    c.retry_base_delay_ms = 1;
    return c;
}

// Stub-backed pipeline over the bundled prompts and fixture assets. The text
// and vision models have separate stubs so their call counts can be told apart.
class PipelineHarness {
  public:
    explicit PipelineHarness(std::filesystem::path store_root = {}, StoreOptions store_options = {})
        : store_root_(store_root.empty() ? dir_.path() / "store" : std::move(store_root)),
          store_options_(std::move(store_options)) {
        const auto fixtures = StubBackend::load_fixtures((source_dir() / "config" / "stub_fixtures.json").string());
        text = std::make_shared<StubBackend>(fixtures);
        vision = std::make_shared<StubBackend>(fixtures);
        gateway.add_model(stub_model("stub-text", false), text);
        gateway.add_model(stub_model("stub-vision", true), vision);
        store = std::make_unique<CacheStore>(store_root_, store_options_);
        prompts = std::make_unique<PromptLibrary>(source_dir() / "prompts");
    }

    Pipeline pipeline(Variant variant, GuidelineKind mode, std::uint32_t workers = 4) {
        PipelineConfig c;
        c.variant = variant;
        c.guideline_mode = mode;
        c.analysis_model = "stub-text";
        c.vision_model = "stub-vision";
        c.judge_model = "stub-vision";
        c.max_workers = workers;
        c.run_id = "test";
        return Pipeline(gateway, *store, *prompts, AssetResolver(fixtures_dir()), c);
    }

    [[nodiscard]] std::uint64_t calls() const { return text->successful_calls() + vision->successful_calls(); }
    void reset_counters() {
        text->reset_counters();
        vision->reset_counters();
    }
    [[nodiscard]] std::uint64_t calls_for(std::string_view schema) const {
        std::uint64_t n = 0;
        for (const auto* stub : {text.get(), vision.get()}) {
            const auto per = stub->calls_per_schema();
            if (auto it = per.find(std::string(schema)); it != per.end()) n += it->second;
        }
        return n;
    }

    TempDir dir_;
    std::filesystem::path store_root_;
    StoreOptions store_options_;
    Gateway gateway;
    std::shared_ptr<StubBackend> text;
    std::shared_ptr<StubBackend> vision;
    std::unique_ptr<CacheStore> store;
    std::unique_ptr<PromptLibrary> prompts;
};

inline std::vector<PairInput> catalog_pairs() { return read_pairs_file(fixtures_dir() / "catalog" / "pairs.jsonl"); }

// The first `queries` queries with their first `products` products each.
inline std::vector<PairInput> catalog_subset(std::size_t queries, std::size_t products) {
    std::vector<PairInput> out;
    std::map<std::string, std::size_t> per_query;
    std::set<std::string> chosen;
    for (const auto& p : catalog_pairs()) {
        if (!chosen.contains(p.query.query_id)) {
            if (chosen.size() == queries) continue;
            chosen.insert(p.query.query_id);
        }
        if (per_query[p.query.query_id]++ < products) out.push_back(p);
    }
    return out;
}

inline std::size_t distinct_queries(const std::vector<PairInput>& pairs) {
    std::set<std::string> ids;
    for (const auto& p : pairs) ids.insert(p.query.query_id);
    return ids.size();
}

inline std::size_t distinct_images(const std::vector<PairInput>& pairs) {
    std::set<std::string> digests;
    const AssetResolver assets(fixtures_dir());
    for (const auto& p : pairs) digests.insert(assets.load(p.product).sha256);
    return digests.size();
}

}  // namespace relassess::testing
