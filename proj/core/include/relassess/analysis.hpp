// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "relassess/model.hpp"
#include "relassess/numeric.hpp"
#include "relassess/serialization.hpp"

namespace relassess {

enum class ErrorClass : std::uint8_t {
    brand_error,
    product_error,
    too_strict,
    too_lenient,
    category_error,
    llm_hallucination,
    llm_translation,
    llm_understanding,
    llm_vision,
};

template <>
struct EnumNames<ErrorClass> {
    static constexpr std::string_view type_name = "ErrorClass";
    static constexpr std::array<std::string_view, 9> names = {
        "brand_error",       "product_error",   "too_strict",        "too_lenient", "category_error",
        "llm_hallucination", "llm_translation", "llm_understanding", "llm_vision"};
};

enum class Fault : std::uint8_t { human_wrong, llm_wrong, both_wrong };

template <>
struct EnumNames<Fault> {
    static constexpr std::string_view type_name = "Fault";
    static constexpr std::array<std::string_view, 3> names = {"human_wrong", "llm_wrong", "both_wrong"};
};

// A human's final ruling on a hard disagreement. Error classes are assigned
// by the adjudicator, never inferred.
struct Adjudication {
    PairId pair_id;
    RelevanceLabel final_label = RelevanceLabel::irrelevant;
    Fault fault = Fault::human_wrong;
    std::set<ErrorClass> human_error_classes;
    std::set<ErrorClass> llm_error_classes;
    std::string notes;
    std::string adjudicator;
    std::string created_at;

    bool operator==(const Adjudication&) const = default;
};

// The side(s) named by `fault` must carry at least one error class.
void validate(const Adjudication& adjudication);

void to_json(json& j, const Adjudication& v);
void from_json(const json& j, Adjudication& v);

using LabeledSet = std::map<PairId, RelevanceLabel>;

struct AgreementStat {
    Fraction agreement;                // matches / n
    std::int64_t n = 0;                // pairs compared
    std::int64_t skipped_unresolved = 0;
    std::int64_t excluded = 0;         // pairs lacking a label on one side

    [[nodiscard]] std::int64_t matches() const { return agreement.numerator; }
    bool operator==(const AgreementStat&) const = default;
};

// Fraction of pairs labeled by both sets that carry equal labels.
// Throws EmptyOverlap when no pair is labeled by both.
AgreementStat pairwise_agreement(const LabeledSet& a, const LabeledSet& b);

// Candidate vs. the majority vote of (a1, a2, tiebreaker); unresolved votes are
// skipped and counted.
AgreementStat agreement_vs_majority(const LabeledSet& candidate, const std::vector<AnnotationSet>& annotations);

// Candidate matches when it equals a1 or a2; pairs with neither are excluded.
AgreementStat agreement_vs_any(const LabeledSet& candidate, const std::vector<AnnotationSet>& annotations);

struct HardDisagreements {
    std::vector<PairId> pairs;  // sorted
    Fraction rate;              // pairs.size() / resolved pairs compared
    std::int64_t skipped_unresolved = 0;
};

HardDisagreements find_hard_disagreements(const LabeledSet& candidate, const std::vector<AnnotationSet>& annotations);

struct ErrorDistribution {
    std::int64_t total = 0;
    std::map<Fault, std::int64_t> fault_counts;
    std::map<Fault, Fraction> fault_split;
    std::map<ErrorClass, std::int64_t> human_class_counts;
    std::map<ErrorClass, std::int64_t> llm_class_counts;
};

// Throws EmptyInput on an empty list.
ErrorDistribution error_distribution(const std::vector<Adjudication>& adjudications);
json to_json(const ErrorDistribution& distribution);

struct PerQueryAgreement {
    std::map<std::string, AgreementStat> per_query;
    std::vector<std::string> omitted;  // queries without any resolvable overlap
};

// Groups by query id (from `pair_to_query`, falling back to the pair's own
// query id) and computes agreement_vs_majority within each group.
PerQueryAgreement per_query_agreement(const LabeledSet& candidate, const std::vector<AnnotationSet>& annotations,
                                      const std::map<PairId, std::string>& pair_to_query = {});

// Cohen's kappa of candidate vs. majority; nullopt when undefined. Offered as
// an extra, clearly labeled column, never as a replacement for raw agreement.
std::optional<double> cohen_kappa_vs_majority(const LabeledSet& candidate, const std::vector<AnnotationSet>& annotations);

LabeledSet labels_of(const std::vector<AnnotationSet>& annotations, int which /* 1 = a1, 2 = a2 */);

// Reports.

struct ReportRow {
    std::string source;
    std::string variant;         // "-" for human rows
    std::string guideline_mode;  // "-" for human rows
    std::optional<AgreementStat> vs_any;
    std::optional<AgreementStat> vs_majority;
    std::optional<double> kappa;
    std::uint64_t wall_time_ms = 0;
    Decimal cost;

    bool operator==(const ReportRow&) const = default;
};

struct AgreementReport {
    std::vector<ReportRow> rows;
    std::optional<AgreementStat> human_inter_annotator;  // A1 vs A2

    bool operator==(const AgreementReport&) const = default;
};

struct CandidateRun {
    std::string source;
    std::string variant;
    std::string guideline_mode;
    LabeledSet labels;
    std::uint64_t wall_time_ms = 0;
    Decimal cost;
};

struct ReportOptions {
    bool include_human_rows = true;
    bool include_kappa = false;
    std::uint64_t human_wall_time_ms = 0;  // per human group
    Decimal human_cost;                    // per human group
};

AgreementReport build_report(const std::vector<CandidateRun>& runs, const std::vector<AnnotationSet>& annotations,
                             const ReportOptions& options = {});

enum class ReportFormat : std::uint8_t { markdown, csv, json };

template <>
struct EnumNames<ReportFormat> {
    static constexpr std::string_view type_name = "ReportFormat";
    static constexpr std::array<std::string_view, 3> names = {"markdown", "csv", "json"};
};

std::string render_report(const AgreementReport& report, ReportFormat format);
// Inverse of render_report(..., json).
AgreementReport parse_report_json(std::string_view text);

std::vector<std::string> report_csv_header(bool with_kappa);

}  // namespace relassess
