// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <filesystem>
#include <string>
#include <unistd.h>

#include "relassess/cache_store.hpp"

namespace relassess {
namespace {

namespace fs = std::filesystem;

class ScratchDir {
  public:
    ScratchDir() {
        std::string tmpl = (fs::temp_directory_path() / "relassess-bench-XXXXXX").string();
        if (::mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
        path_ = tmpl;
    }
    ~ScratchDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }

  private:
    fs::path path_;
};

CacheEntry make_entry(std::int64_t i) {
    CacheEntry e;
    e.key = CacheKey::make(Step::judgment, "bench-model", "v1",
                           json{{"pair", {{"query_id", "q1"}, {"product_id", "p" + std::to_string(i)}}}});
    e.value = json{{"label", "irrelevant"}, {"reasoning", "different product type"}};
    e.usage = {120, 30};
    e.created_at = "2026-01-01T00:00:00.000Z";
    e.pipeline_run_id = "bench";
    return e;
}

void BM_CachePut(benchmark::State& state) {
    ScratchDir dir;
    CacheStore store(dir.path() / "store", StoreOptions{.sync = state.range(0) != 0, .before_publish = {}});
    std::int64_t i = 0;
    for (auto _ : state) store.put(make_entry(i++));
}
BENCHMARK(BM_CachePut)->ArgName("sync")->Arg(0)->Arg(1);

void BM_CacheGetHit(benchmark::State& state) {
    ScratchDir dir;
    CacheStore store(dir.path() / "store", StoreOptions{.sync = false, .before_publish = {}});
    constexpr std::int64_t kEntries = 256;
    std::vector<CacheKey> keys;
    for (std::int64_t i = 0; i < kEntries; ++i) {
        auto e = make_entry(i);
        store.put(e);
        keys.push_back(e.key);
    }
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(store.get(keys[i++ % keys.size()]));
}
BENCHMARK(BM_CacheGetHit);

void BM_CacheKeyDigest(benchmark::State& state) {
    const auto key = make_entry(1).key;
    for (auto _ : state) benchmark::DoNotOptimize(key.digest());
}
BENCHMARK(BM_CacheKeyDigest);

}  // namespace
}  // namespace relassess
