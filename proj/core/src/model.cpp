// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

#include "relassess/model.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>

namespace relassess {

std::string to_string(const PairId& id) { return id.query_id + "/" + id.product_id; }

std::string source_name(const JudgmentSource& source) {
    if (const auto* human = std::get_if<HumanSource>(&source)) {
        return "human:" + human->annotator_group;
    }
    const auto& llm = std::get<LlmSource>(source);
    return "llm:" + llm.model_id + ":" + std::string(to_string(llm.variant));
}

std::optional<Variant> Judgment::variant() const {
    if (const auto* llm = std::get_if<LlmSource>(&source)) return llm->variant;
    return std::nullopt;
}

RelevanceLabel majority_vote(RelevanceLabel a1, RelevanceLabel a2, std::optional<RelevanceLabel> tiebreaker) {
    if (a1 == a2) return a1;
    if (!tiebreaker) {
        throw UnresolvedVote("annotations disagree (" + std::string(to_string(a1)) + " vs " +
                             std::string(to_string(a2)) + ") and no tiebreaker is present");
    }
    return *tiebreaker;
}

std::optional<RelevanceLabel> try_majority(const AnnotationSet& annotations) {
    if (!annotations.a1 || !annotations.a2) return std::nullopt;
    if (*annotations.a1 == *annotations.a2) return annotations.a1;
    return annotations.tiebreaker;
}

std::string trim(std::string_view text) {
    const auto is_space = [](unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
    std::size_t begin = 0;
    std::size_t end = text.size();
    while (begin < end && is_space(static_cast<unsigned char>(text[begin]))) ++begin;
    while (end > begin && is_space(static_cast<unsigned char>(text[end - 1]))) --end;
    return std::string(text.substr(begin, end - begin));
}

void validate(const QueryContext& ctx, const std::vector<std::string>& supported_languages) {
    if (ctx.query_id.empty()) throw InvalidInput("QueryContext.query_id is empty");
    if (trim(ctx.query_text).empty()) throw InvalidInput("QueryContext.query_text is empty for query '" + ctx.query_id + "'");
    if (std::find(supported_languages.begin(), supported_languages.end(), ctx.language) ==
        supported_languages.end()) {
        throw InvalidInput("QueryContext.language '" + ctx.language + "' is not a supported language");
    }
}

void validate(const Requirement& requirement) {
    if (trim(requirement.name).empty()) throw InvalidInput("Requirement.name is empty");
    if (trim(requirement.value).empty()) throw InvalidInput("Requirement.value is empty for '" + requirement.name + "'");
}

void validate(const QueryAnalysis& analysis) {
    if (trim(analysis.translated_query).empty()) throw InvalidInput("QueryAnalysis.translated_query is empty");
    if (analysis.requirements.empty()) throw InvalidInput("QueryAnalysis.requirements is empty");
    for (const auto& r : analysis.requirements) validate(r);
}

void validate(const GuidelineSet& guidelines) {
    for (auto label : all_values<RelevanceLabel>()) {
        if (trim(guidelines.criterion(label)).empty()) {
            throw InvalidInput("GuidelineSet criterion for '" + std::string(to_string(label)) + "' is empty");
        }
    }
    if (guidelines.kind == GuidelineKind::generic && guidelines.query_id != kGenericGuidelineId) {
        throw InvalidInput("generic GuidelineSet must use the GENERIC query id");
    }
}

void validate(const Judgment& judgment) {
    if (std::holds_alternative<LlmSource>(judgment.source)) {
        if (!judgment.reasoning) throw InvalidInput("llm Judgment for " + to_string(judgment.pair_id) + " has no reasoning");
    } else if (std::get<HumanSource>(judgment.source).annotator_group.empty()) {
        throw InvalidInput("human Judgment has an empty annotator group");
    }
}

void validate(const AnnotationSet& annotations) {
    if (annotations.tiebreaker && !(annotations.a1 && annotations.a2 && *annotations.a1 != *annotations.a2)) {
        throw InvalidInput("tiebreaker present for " + to_string(annotations.pair_id) +
                           " although a1 and a2 do not both exist and differ");
    }
}

std::string utc_now_iso() {
    using namespace std::chrono;
    const auto now = system_clock::now();
    const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
    const std::time_t t = system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                  tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
    return buf;
}

}  // namespace relassess
