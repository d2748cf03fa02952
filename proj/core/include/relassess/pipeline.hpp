// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "relassess/analysis.hpp"
#include "relassess/cache_store.hpp"
#include "relassess/gateway.hpp"
#include "relassess/model.hpp"
#include "relassess/prompts.hpp"

namespace relassess {

struct PipelineConfig {
    Variant variant = Variant::llm_text;
    GuidelineKind guideline_mode = GuidelineKind::query_specific;
    std::string analysis_model;
    std::string vision_model;  // required for mllm_text
    std::string judge_model;
    std::uint32_t max_workers = 4;
    std::string run_id;
    std::vector<std::string> languages = {"en", "de"};
};

// Throws ConfigError when a referenced model is unknown or lacks a capability
// the variant needs.
void validate(const PipelineConfig& config, const Gateway& gateway);

// One line of the input pairs file.
struct PairInput {
    QueryContext query;
    ProductRecord product;

    [[nodiscard]] PairId pair_id() const { return {query.query_id, product.product_id}; }
};

void to_json(json& j, const PairInput& v);
void from_json(const json& j, PairInput& v);

// Reads a JSON-lines pairs file. Throws InvalidInput naming the line.
std::vector<PairInput> read_pairs_file(const std::filesystem::path& path);

// Media type from magic bytes (PNG, JPEG, GIF, WEBP); ImageDecodeError otherwise.
std::string sniff_image_type(const std::vector<std::uint8_t>& bytes);

// Plain GET used for http(s) image refs. Throws MissingImage on failure.
std::vector<std::uint8_t> fetch_url_bytes(const std::string& url, std::uint32_t timeout_ms);

struct LoadedImage {
    std::vector<std::uint8_t> bytes;
    std::string media_type;
    std::string sha256;
};

// Resolves image refs: paths relative to the asset root (must stay inside
// it), absolute paths, file:// URIs, and http(s) URLs.
class AssetResolver {
  public:
    explicit AssetResolver(std::filesystem::path root = {});

    // Local file for a ref, or nullopt for remote refs.
    [[nodiscard]] std::optional<std::filesystem::path> local_path(const std::string& image_ref) const;
    // Throws MissingImage when absent or unreadable, ImageDecodeError when
    // the bytes are not a supported image.
    [[nodiscard]] LoadedImage load(const ProductRecord& product) const;

    [[nodiscard]] const std::filesystem::path& root() const { return root_; }

  private:
    std::filesystem::path root_;
};

// Everything known about one pair, as assembled by the pipeline or
// reconstructed from stored artifacts.
struct PairDossier {
    QueryContext query;
    QueryAnalysis analysis;
    GuidelineSet guideline;
    ProductRecord product;
    std::optional<std::string> visual_description;
    std::vector<Judgment> judgments;
    std::optional<Adjudication> adjudication;

    std::string analysis_digest;
    std::string guideline_digest;
    std::optional<std::string> visual_description_digest;
    std::optional<LoadedImage> image;  // loaded for mllm_multi only
    std::map<std::string, std::string> refs;  // step name -> cache entry digest
};

json to_json(const PairDossier& dossier);

// One line of the judgments output file.
struct JudgmentRecord {
    PairId pair_id;
    std::string model_id;
    Variant variant = Variant::llm_text;
    GuidelineKind guideline_mode = GuidelineKind::query_specific;
    RelevanceLabel label = RelevanceLabel::irrelevant;
    std::string reasoning;
    TokenUsage usage;
    std::string analysis_digest;
    std::string guideline_digest;
    std::optional<std::string> visual_description_digest;
    std::map<std::string, std::string> refs;  // step name -> cache entry digest
    std::optional<std::uint64_t> wall_time_ms;
    std::optional<std::string> created_at;

    [[nodiscard]] std::string source() const { return source_name(LlmSource{model_id, variant}); }
    bool operator==(const JudgmentRecord&) const = default;
};

void to_json(json& j, const JudgmentRecord& v);
void from_json(const json& j, JudgmentRecord& v);

std::vector<JudgmentRecord> read_judgments_file(const std::filesystem::path& path);
// Canonical JSON lines in pair order; byte-stable unless timing is included.
std::string render_judgments(const std::vector<JudgmentRecord>& records, bool with_timing);

struct PairFailure {
    PairId pair_id;
    std::string stage;  // query_analysis, guideline, visual_description, judgment, input
    std::string error_kind;
    std::string message;
};

json to_json(const PairFailure& failure);

struct BatchPlan {
    std::uint64_t analyses = 0;
    std::uint64_t guidelines = 0;
    std::uint64_t visual_descriptions = 0;
    std::uint64_t judgments = 0;

    [[nodiscard]] std::uint64_t total() const { return analyses + guidelines + visual_descriptions + judgments; }
};

json to_json(const BatchPlan& plan);

struct BatchReport {
    std::vector<JudgmentRecord> judgments;  // sorted by pair id
    std::vector<PairFailure> failures;      // sorted by pair id
    std::vector<std::string> warnings;
    std::uint64_t backend_calls = 0;
    TokenUsage usage;
    Decimal cost;
    CacheStats cache_stats;  // counters accumulated during this run
    std::uint64_t wall_time_ms = 0;
    bool cancelled = false;

    // 0 all pairs judged, 2 partial failure (or interrupted).
    [[nodiscard]] int exit_code() const { return failures.empty() && !cancelled ? 0 : 2; }
};

json summary_json(const BatchReport& report);

// Cooperative stop signal; workers finish their current pair and stop.
class CancellationToken {
  public:
    void cancel() { cancelled_ = true; }
    [[nodiscard]] bool cancelled() const { return cancelled_; }

  private:
    std::atomic<bool> cancelled_{false};
};

// The built-in generic guideline used in the ablation mode.
GuidelineSet generic_guideline();

class Pipeline {
  public:
    Pipeline(Gateway& gateway, CacheStore& store, PromptLibrary& prompts, AssetResolver assets, PipelineConfig config);

    QueryAnalysis analyze_query(const QueryContext& ctx);
    GuidelineSet generate_guideline(const QueryAnalysis& analysis, const QueryContext& ctx);
    std::string describe_image(const ProductRecord& product);
    [[nodiscard]] ChatRequest compose_judge_input(const PairDossier& dossier, Variant variant) const;
    Judgment judge_pair(PairDossier& dossier);

    // Steps 1-6 for one pair; fills the dossier as it goes.
    // `stage`, when given, tracks the step in progress for failure reports.
    JudgmentRecord run_pair(const PairInput& input, PairDossier& dossier, std::string* stage = nullptr);

    // Throws InvalidInput on an empty batch or duplicate pair ids and
    // StoreCorruption when the store is damaged; everything else is recorded
    // per pair.
    BatchReport run_batch(const std::vector<PairInput>& pairs, const CancellationToken* cancel = nullptr);

    // Backend calls a run over `pairs` would issue given the current store.
    [[nodiscard]] BatchPlan plan(const std::vector<PairInput>& pairs) const;

    [[nodiscard]] const PipelineConfig& config() const { return config_; }

    // Cache keys, exposed for tools that reconstruct dossiers.
    [[nodiscard]] CacheKey analysis_key(const QueryContext& ctx) const;
    [[nodiscard]] CacheKey guideline_key(const std::string& analysis_digest, const QueryContext& ctx) const;
    [[nodiscard]] CacheKey visual_key(const std::string& image_sha256) const;
    [[nodiscard]] CacheKey judgment_key(const PairDossier& dossier) const;

  private:
    struct StepResult {
        json value;
        std::string key_digest;
        TokenUsage usage;
        std::optional<std::uint64_t> wall_time_ms;
        std::string created_at;
    };
    struct Computed {
        json value;
        TokenUsage usage;
        std::uint64_t wall_time_ms = 0;
    };

    // Cache lookup with single-flight deduplication of concurrent misses.
    StepResult cached_step(const CacheKey& key, const std::function<Computed()>& compute);
    Computed call_model(ChatRequest request, const std::string& model_id);
    [[nodiscard]] const PromptTemplate& prompt(std::string_view step, std::string_view language) const;

    Gateway& gateway_;
    CacheStore& store_;
    PromptLibrary& prompts_;
    AssetResolver assets_;
    PipelineConfig config_;

    std::mutex inflight_mutex_;
    std::map<std::string, std::shared_future<StepResult>> inflight_;
};

}  // namespace relassess
