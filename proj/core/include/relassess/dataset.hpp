// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "relassess/analysis.hpp"
#include "relassess/model.hpp"
#include "relassess/serialization.hpp"

namespace relassess {

struct QuerySignals {
    double reformulation_rate = 0.0;
    double exit_rate = 0.0;

    bool operator==(const QuerySignals&) const = default;
};

struct QueryLogRow {
    std::string query_text;
    std::string language;
    std::string search_engine_id;
    std::optional<GenderFilter> gender_filter;
    std::uint64_t frequency = 1;
    std::optional<QuerySignals> signals;

    bool operator==(const QueryLogRow&) const = default;
};

void validate(const QueryLogRow& row);
void to_json(json& j, const QueryLogRow& v);
void from_json(const json& j, QueryLogRow& v);

// Bucket boundaries for stratification. Frequency buckets are assigned by
// rank after sorting by frequency: the first ceil(head_share * N) rows are
// "head", up to ceil((head_share + torso_share) * N) "torso", the rest "tail".
// Token-length buckets are closed ranges ending at each upper bound, plus an
// open bucket above the last one: {1, 3} gives 1, 2-3 and 4+.
struct StrataConfig {
    double head_share = 0.01;
    double torso_share = 0.19;
    std::vector<std::uint32_t> token_length_bounds = {1, 3};
};

void validate(const StrataConfig& config);

std::size_t token_count(std::string_view text);
std::string token_length_bucket(std::size_t tokens, const StrataConfig& config);

// Stratum of every row of an already deduplicated log, keyed
// "engine|gender|frequency bucket|length bucket".
std::vector<std::string> assign_strata(const std::vector<QueryLogRow>& rows, const StrataConfig& config);

// Exact-text deduplication: keeps the most frequent row per query_text
// (ties: smallest search_engine_id); output sorted by query_text.
std::vector<QueryLogRow> dedupe_queries(const std::vector<QueryLogRow>& log);

// Largest-remainder allocation of n over stratum sizes (ties broken by
// stratum key order).
std::map<std::string, std::size_t> allocate(const std::map<std::string, std::size_t>& sizes, std::size_t n);

// Throws InsufficientData when n exceeds the distinct query count.
std::vector<QueryLogRow> stratified_sample(const std::vector<QueryLogRow>& log, std::size_t n, std::uint64_t seed,
                                           const StrataConfig& config = {});

// Exact-text exclusions and replacements applied before sampling.
struct CurationList {
    std::set<std::string> exclude;
    std::map<std::string, std::string> replace;  // from -> to
};

CurationList read_curation_file(const std::filesystem::path& path);
std::vector<QueryLogRow> apply_curation(const std::vector<QueryLogRow>& log, const CurationList& curation);

// Deterministic random source. std::mt19937_64 is fully specified by the
// standard; the bounded draw below is ours because the standard
// distributions are implementation-defined.
class SeededRng {
  public:
    explicit SeededRng(std::uint64_t seed) : engine_(seed) {}
    // Uniform in [0, bound); bound > 0.
    std::uint64_t below(std::uint64_t bound);
    // k distinct indices from [0, n), uniform, in draw order.
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

  private:
    std::mt19937_64 engine_;
};

// The first top_k ranks verbatim plus tail_n ids drawn uniformly without
// replacement from ranks >= tail_start_rank (1-based), in rank order.
// Throws ShortRankingError when ranked.size() < tail_start_rank + tail_n
// (only checked when tail_n > 0) or ranked.size() < top_k; InvalidInput on
// duplicate ids or tail_start_rank <= top_k.
std::vector<std::string> mix_retrieval(const std::vector<std::string>& ranked, std::size_t top_k = 15,
                                       std::size_t tail_n = 5, std::size_t tail_start_rank = 500,
                                       std::uint64_t seed = 0);

struct RankedList {
    std::string query_id;
    std::vector<std::string> ranking;
};

std::vector<RankedList> read_rankings_file(const std::filesystem::path& path);

struct PriorityThresholds {
    double min_reformulation_rate = 0.5;
    double min_exit_rate = 0.5;
};

struct PrioritizedQueries {
    std::vector<QueryLogRow> rows;
    std::size_t excluded_without_signals = 0;
};

// Rows meeting either threshold (inclusive), by max(rate) descending, ties by
// query_text; truncated to `limit` when given.
PrioritizedQueries prioritize_queries(const std::vector<QueryLogRow>& log, const PriorityThresholds& thresholds,
                                      std::optional<std::size_t> limit = std::nullopt);

// File ingestion.

std::vector<QueryLogRow> read_query_log(const std::filesystem::path& path);
std::vector<AnnotationSet> read_annotations_file(const std::filesystem::path& path);
std::vector<Adjudication> read_adjudications_file(const std::filesystem::path& path);

// RFC-4180 records; accepts CRLF or LF line ends and quoted fields spanning
// lines. Throws InvalidInput on an unterminated quote.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

enum class DatasetKind : std::uint8_t {
    pairs,
    annotations,
    adjudications,
    query_log,
    rankings,
    judgments,
    report_csv,
    report_json,
};

template <>
struct EnumNames<DatasetKind> {
    static constexpr std::string_view type_name = "DatasetKind";
    static constexpr std::array<std::string_view, 8> names = {"pairs",    "annotations", "adjudications", "query_log",
                                                              "rankings", "judgments",   "report_csv",    "report_json"};
};

struct ValidationIssue {
    std::size_t line = 0;  // 1-based; 0 for file-level issues
    std::string kind;      // e.g. "duplicate", "missing_field", "unknown_enum", "image"
    std::string message;
};

struct ValidationReport {
    DatasetKind kind = DatasetKind::pairs;
    std::size_t records = 0;
    std::vector<ValidationIssue> errors;
    std::vector<ValidationIssue> warnings;

    [[nodiscard]] bool ok() const { return errors.empty(); }
};

json to_json(const ValidationReport& report);

struct ValidationOptions {
    std::optional<DatasetKind> kind;  // detected from content when absent
    std::filesystem::path asset_root;
    bool check_images = true;
    std::vector<std::string> languages = {"en", "de"};
};

DatasetKind detect_dataset_kind(const std::filesystem::path& path, std::string_view content);
ValidationReport validate_dataset(const std::filesystem::path& path, const ValidationOptions& options = {});
// Validates content that did not come from a file (e.g. stdin).
ValidationReport validate_dataset_text(std::string_view content, const ValidationOptions& options,
                                       const std::filesystem::path& name = "<stdin>");

}  // namespace relassess
