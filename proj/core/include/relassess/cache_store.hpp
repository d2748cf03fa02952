// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "relassess/model.hpp"
#include "relassess/serialization.hpp"

namespace relassess {

enum class Step : std::uint8_t { query_analysis, guideline, visual_description, judgment };

template <>
struct EnumNames<Step> {
    static constexpr std::string_view type_name = "Step";
    static constexpr std::array<std::string_view, 4> names = {"query_analysis", "guideline", "visual_description",
                                                              "judgment"};
};

struct CacheKey {
    Step step = Step::query_analysis;
    std::string model_id;
    std::string prompt_version;
    std::string input_digest;  // sha256 of the canonical serialization of all step inputs

    // Builds the key from the step inputs; member order of `inputs` is irrelevant.
    static CacheKey make(Step step, std::string model_id, std::string prompt_version, const json& inputs);

    // Digest of the whole key; names the entry file.
    [[nodiscard]] std::string digest() const;
    [[nodiscard]] json to_json() const;
    static CacheKey from_json(const json& j);

    bool operator==(const CacheKey&) const = default;
};

struct CacheEntry {
    CacheKey key;
    json value;  // the artifact, schema implied by key.step
    TokenUsage usage;
    std::optional<std::uint64_t> wall_time_ms;
    std::string created_at;
    std::string pipeline_run_id;
};

struct CacheStats {
    std::map<Step, std::uint64_t> entries_per_step;
    std::uint64_t hit_count = 0;
    std::uint64_t miss_count = 0;
    std::uint64_t bytes = 0;

    [[nodiscard]] std::uint64_t total_entries() const;
};

struct IntegrityReport {
    std::uint64_t entries = 0;
    std::vector<std::string> corrupt;
    std::uint64_t leftover_temp_files = 0;

    [[nodiscard]] bool ok() const { return corrupt.empty() && leftover_temp_files == 0; }
};

struct StoreOptions {
    bool sync = true;  // fsync entry and directory before put() returns
    // Test hook: runs after the temp file is fully written, before it is published.
    std::function<void(const std::filesystem::path& temp_file)> before_publish;
};

// Throws InvalidInput unless `value` parses under the schema of `step`.
void validate_artifact(Step step, const json& value);

// File-backed, content-addressed, write-once store for pipeline artifacts.
//
// Layout: <root>/store.json header, then <root>/<step>/<aa>/<key digest>.json
// per entry. An entry file is one canonical JSON line followed by a checksum
// trailer line "sha256:<hex of the JSON line>". Entries become visible through
// an atomic hard link of a fully written temp file, so readers observe either
// the whole entry or nothing, and an existing entry is never replaced.
class CacheStore {
  public:
    explicit CacheStore(std::filesystem::path root, StoreOptions options = {});

    // Counts a hit or a miss. Throws StoreCorruption on checksum mismatch.
    std::optional<CacheEntry> get(const CacheKey& key);
    // Lookup by entry digest (as recorded in output files); not counted.
    std::optional<CacheEntry> get_by_digest(Step step, const std::string& key_digest) const;
    // Existence probe for planning; not counted.
    [[nodiscard]] bool contains(const CacheKey& key) const;

    // Durable on return. Re-putting an identical value is a no-op; a different
    // value under an existing key raises ConflictError.
    void put(const CacheEntry& entry);

    [[nodiscard]] CacheStats stats() const;
    [[nodiscard]] IntegrityReport scan() const;
    [[nodiscard]] const std::filesystem::path& root() const { return root_; }

  private:
    [[nodiscard]] std::filesystem::path entry_path(Step step, const std::string& digest) const;
    std::optional<CacheEntry> read_entry(const std::filesystem::path& path, const std::string& digest) const;
    std::mutex& stripe(const std::string& digest);

    std::filesystem::path root_;
    StoreOptions options_;
    std::array<std::mutex, 64> stripes_;
    std::atomic<std::uint64_t> hits_{0};
    std::atomic<std::uint64_t> misses_{0};
    std::atomic<std::uint64_t> bytes_{0};
    std::array<std::atomic<std::uint64_t>, 4> entries_{};
    std::atomic<std::uint64_t> temp_counter_{0};
};

}  // namespace relassess
