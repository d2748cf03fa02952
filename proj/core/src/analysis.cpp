// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

#include "relassess/analysis.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>

namespace relassess {

namespace {

std::map<PairId, const AnnotationSet*> index_annotations(const std::vector<AnnotationSet>& annotations) {
    std::map<PairId, const AnnotationSet*> index;
    for (const auto& a : annotations) index[a.pair_id] = &a;
    return index;
}

std::string pct(const std::optional<AgreementStat>& stat) { return stat ? stat->agreement.percent(1) : "-"; }

std::string duration_text(std::uint64_t ms) {
    const std::uint64_t s = ms / 1000;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%llu:%02llu:%02llu", static_cast<unsigned long long>(s / 3600),
                  static_cast<unsigned long long>(s / 60 % 60), static_cast<unsigned long long>(s % 60));
    return buf;
}

std::string csv_field(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string kappa_text(const std::optional<double>& kappa) {
    if (!kappa) return "-";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", *kappa);
    return buf;
}

json stat_json(const std::optional<AgreementStat>& stat) {
    if (!stat) return nullptr;
    return json{{"matches", stat->matches()},
                {"n", stat->n},
                {"skipped_unresolved", stat->skipped_unresolved},
                {"excluded", stat->excluded},
                {"percent", stat->agreement.percent(1)}};
}

std::optional<AgreementStat> stat_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    AgreementStat s;
    s.n = j.at("n").get<std::int64_t>();
    s.agreement = {j.at("matches").get<std::int64_t>(), s.n};
    s.skipped_unresolved = j.at("skipped_unresolved").get<std::int64_t>();
    s.excluded = j.at("excluded").get<std::int64_t>();
    if (s.n <= 0 || s.matches() < 0 || s.matches() > s.n) throw InvalidInput("agreement statistic out of range");
    return s;
}

bool any_kappa(const AgreementReport& report) {
    return std::any_of(report.rows.begin(), report.rows.end(), [](const ReportRow& r) { return r.kappa.has_value(); });
}

}  // namespace

void validate(const Adjudication& adjudication) {
    const bool human_side = adjudication.fault == Fault::human_wrong || adjudication.fault == Fault::both_wrong;
    const bool llm_side = adjudication.fault == Fault::llm_wrong || adjudication.fault == Fault::both_wrong;
    if (human_side && adjudication.human_error_classes.empty()) {
        throw InvalidInput("fault '" + std::string(to_string(adjudication.fault)) + "' requires human_error_classes");
    }
    if (llm_side && adjudication.llm_error_classes.empty()) {
        throw InvalidInput("fault '" + std::string(to_string(adjudication.fault)) + "' requires llm_error_classes");
    }
}

void to_json(json& j, const Adjudication& v) {
    json human = json::array();
    for (auto c : v.human_error_classes) human.push_back(to_string(c));
    json llm = json::array();
    for (auto c : v.llm_error_classes) llm.push_back(to_string(c));
    j = json{{"pair_id", v.pair_id},
             {"final_label", to_string(v.final_label)},
             {"fault", to_string(v.fault)},
             {"human_error_classes", human},
             {"llm_error_classes", llm},
             {"notes", v.notes},
             {"adjudicator", v.adjudicator},
             {"created_at", v.created_at}};
}

void from_json(const json& j, Adjudication& v) {
    v.pair_id = require_field(j, "pair_id").get<PairId>();
    v.final_label = require_enum<RelevanceLabel>(j, "final_label");
    v.fault = require_enum<Fault>(j, "fault");
    auto classes = [&](const char* field) {
        std::set<ErrorClass> out;
        auto it = j.find(field);
        if (it == j.end() || it->is_null()) return out;
        if (!it->is_array()) throw InvalidInput(std::string("field '") + field + "' must be an array");
        for (const auto& c : *it) {
            if (!c.is_string()) throw InvalidInput(std::string("field '") + field + "' must hold strings");
            out.insert(parse_enum<ErrorClass>(c.get<std::string>()));
        }
        return out;
    };
    v.human_error_classes = classes("human_error_classes");
    v.llm_error_classes = classes("llm_error_classes");
    v.notes = optional_string(j, "notes");
    v.adjudicator = optional_string(j, "adjudicator");
    v.created_at = optional_string(j, "created_at");
}

AgreementStat pairwise_agreement(const LabeledSet& a, const LabeledSet& b) {
    AgreementStat stat;
    std::int64_t matches = 0;
    for (const auto& [id, label] : a) {
        auto it = b.find(id);
        if (it == b.end()) {
            ++stat.excluded;
            continue;
        }
        ++stat.n;
        if (it->second == label) ++matches;
    }
    for (const auto& [id, _] : b) {
        if (!a.contains(id)) ++stat.excluded;
    }
    if (stat.n == 0) throw EmptyOverlap("no pair is labeled by both sets");
    stat.agreement = {matches, stat.n};
    return stat;
}

AgreementStat agreement_vs_majority(const LabeledSet& candidate, const std::vector<AnnotationSet>& annotations) {
    AgreementStat stat;
    std::int64_t matches = 0;
    const auto index = index_annotations(annotations);
    for (const auto& [id, label] : candidate) {
        auto it = index.find(id);
        if (it == index.end()) {
            ++stat.excluded;
            continue;
        }
        const auto majority = try_majority(*it->second);
        if (!majority) {
            ++stat.skipped_unresolved;
            continue;
        }
        ++stat.n;
        if (*majority == label) ++matches;
    }
    if (stat.n == 0) {
        throw EmptyOverlap("no candidate pair has a resolvable majority vote (" + std::to_string(stat.skipped_unresolved) +
                               " unresolved)",
                           stat.skipped_unresolved);
    }
    stat.agreement = {matches, stat.n};
    return stat;
}

AgreementStat agreement_vs_any(const LabeledSet& candidate, const std::vector<AnnotationSet>& annotations) {
    AgreementStat stat;
    std::int64_t matches = 0;
    const auto index = index_annotations(annotations);
    for (const auto& [id, label] : candidate) {
        auto it = index.find(id);
        if (it == index.end() || (!it->second->a1 && !it->second->a2)) {
            ++stat.excluded;
            continue;
        }
        ++stat.n;
        if (it->second->a1 == label || it->second->a2 == label) ++matches;
    }
    if (stat.n == 0) throw EmptyOverlap("no candidate pair carries a human annotation");
    stat.agreement = {matches, stat.n};
    return stat;
}

HardDisagreements find_hard_disagreements(const LabeledSet& candidate, const std::vector<AnnotationSet>& annotations) {
    HardDisagreements out;
    std::int64_t compared = 0;
    const auto index = index_annotations(annotations);
    for (const auto& [id, label] : candidate) {
        auto it = index.find(id);
        if (it == index.end()) continue;
        const auto majority = try_majority(*it->second);
        if (!majority) {
            ++out.skipped_unresolved;
            continue;
        }
        ++compared;
        if (is_hard_disagreement(label, *majority)) out.pairs.push_back(id);
    }
    out.rate = {static_cast<std::int64_t>(out.pairs.size()), compared == 0 ? 1 : compared};
    return out;
}

ErrorDistribution error_distribution(const std::vector<Adjudication>& adjudications) {
    if (adjudications.empty()) throw EmptyInput("error distribution needs at least one adjudication");
    ErrorDistribution d;
    d.total = static_cast<std::int64_t>(adjudications.size());
    for (auto fault : all_values<Fault>()) d.fault_counts[fault] = 0;
    for (const auto& a : adjudications) {
        ++d.fault_counts[a.fault];
        for (auto c : a.human_error_classes) ++d.human_class_counts[c];
        for (auto c : a.llm_error_classes) ++d.llm_class_counts[c];
    }
    for (const auto& [fault, count] : d.fault_counts) d.fault_split[fault] = {count, d.total};
    return d;
}

json to_json(const ErrorDistribution& d) {
    json split = json::object();
    json counts = json::object();
    for (const auto& [fault, fraction] : d.fault_split) {
        split[std::string(to_string(fault))] = fraction.value();
        counts[std::string(to_string(fault))] = d.fault_counts.at(fault);
    }
    json human = json::object();
    json llm = json::object();
    for (auto c : all_values<ErrorClass>()) {
        auto h = d.human_class_counts.find(c);
        human[std::string(to_string(c))] = h == d.human_class_counts.end() ? 0 : h->second;
        auto l = d.llm_class_counts.find(c);
        llm[std::string(to_string(c))] = l == d.llm_class_counts.end() ? 0 : l->second;
    }
    return json{{"total", d.total},
                {"fault_counts", counts},
                {"fault_split", split},
                {"per_class_counts", {{"human", human}, {"llm", llm}}}};
}

PerQueryAgreement per_query_agreement(const LabeledSet& candidate, const std::vector<AnnotationSet>& annotations,
                                      const std::map<PairId, std::string>& pair_to_query) {
    auto query_of = [&](const PairId& id) {
        auto it = pair_to_query.find(id);
        return it == pair_to_query.end() ? id.query_id : it->second;
    };
    std::map<std::string, LabeledSet> candidate_groups;
    for (const auto& [id, label] : candidate) candidate_groups[query_of(id)].emplace(id, label);
    std::map<std::string, std::vector<AnnotationSet>> annotation_groups;
    for (const auto& a : annotations) annotation_groups[query_of(a.pair_id)].push_back(a);

    PerQueryAgreement out;
    for (const auto& [query, labels] : candidate_groups) {
        try {
            out.per_query.emplace(query, agreement_vs_majority(labels, annotation_groups[query]));
        } catch (const EmptyOverlap&) {
            out.omitted.push_back(query);
        }
    }
    return out;
}

std::optional<double> cohen_kappa_vs_majority(const LabeledSet& candidate, const std::vector<AnnotationSet>& annotations) {
    std::array<std::int64_t, 3> cand{};
    std::array<std::int64_t, 3> maj{};
    std::int64_t n = 0;
    std::int64_t agree = 0;
    const auto index = index_annotations(annotations);
    for (const auto& [id, label] : candidate) {
        auto it = index.find(id);
        if (it == index.end()) continue;
        const auto majority = try_majority(*it->second);
        if (!majority) continue;
        ++n;
        ++cand[static_cast<std::size_t>(label)];
        ++maj[static_cast<std::size_t>(*majority)];
        if (label == *majority) ++agree;
    }
    if (n == 0) return std::nullopt;
    const double nn = static_cast<double>(n);
    double expected = 0.0;
    for (std::size_t k = 0; k < 3; ++k) expected += (static_cast<double>(cand[k]) / nn) * (static_cast<double>(maj[k]) / nn);
    if (expected >= 1.0) return std::nullopt;
    return (static_cast<double>(agree) / nn - expected) / (1.0 - expected);
}

LabeledSet labels_of(const std::vector<AnnotationSet>& annotations, int which) {
    LabeledSet out;
    for (const auto& a : annotations) {
        const auto& label = which == 1 ? a.a1 : a.a2;
        if (label) out[a.pair_id] = *label;
    }
    return out;
}

AgreementReport build_report(const std::vector<CandidateRun>& runs, const std::vector<AnnotationSet>& annotations,
                             const ReportOptions& options) {
    auto attempt = [](auto&& fn) -> std::optional<AgreementStat> {
        try {
            return fn();
        } catch (const EmptyOverlap&) {
            return std::nullopt;
        }
    };

    AgreementReport report;
    for (const auto& run : runs) {
        ReportRow row{run.source, run.variant, run.guideline_mode, std::nullopt, std::nullopt, std::nullopt,
                      run.wall_time_ms, run.cost};
        row.vs_any = attempt([&] { return agreement_vs_any(run.labels, annotations); });
        row.vs_majority = attempt([&] { return agreement_vs_majority(run.labels, annotations); });
        if (options.include_kappa) row.kappa = cohen_kappa_vs_majority(run.labels, annotations);
        report.rows.push_back(std::move(row));
    }
    if (options.include_human_rows && !annotations.empty()) {
        for (int which : {1, 2}) {
            const LabeledSet labels = labels_of(annotations, which);
            if (labels.empty()) continue;
            ReportRow row{"human:A" + std::to_string(which), "-", "-", std::nullopt, std::nullopt, std::nullopt,
                          options.human_wall_time_ms, options.human_cost};
            // Human rows use the majority vote in both agreement columns.
            row.vs_majority = attempt([&] { return agreement_vs_majority(labels, annotations); });
            row.vs_any = row.vs_majority;
            if (options.include_kappa) row.kappa = cohen_kappa_vs_majority(labels, annotations);
            report.rows.push_back(std::move(row));
        }
        report.human_inter_annotator =
            attempt([&] { return pairwise_agreement(labels_of(annotations, 1), labels_of(annotations, 2)); });
    }
    std::sort(report.rows.begin(), report.rows.end(), [](const ReportRow& a, const ReportRow& b) {
        return std::tie(a.source, a.variant, a.guideline_mode) < std::tie(b.source, b.variant, b.guideline_mode);
    });
    return report;
}

std::vector<std::string> report_csv_header(bool with_kappa) {
    std::vector<std::string> header = {"source",          "variant",          "guideline_mode",     "vs_any_percent",
                                       "vs_any_matches",  "vs_any_n",         "vs_majority_percent", "vs_majority_matches",
                                       "vs_majority_n",   "skipped_unresolved", "wall_time_ms",      "cost"};
    if (with_kappa) header.emplace_back("kappa_vs_majority");
    return header;
}

std::string render_report(const AgreementReport& report, ReportFormat format) {
    const bool with_kappa = any_kappa(report);
    std::ostringstream out;
    switch (format) {
        case ReportFormat::markdown: {
            out << "| Source | Variant | Guidelines | Agreement A1 or A2 (%) | Agreement majority (%) | Pairs | "
                   "Unresolved | Time | Cost |";
            if (with_kappa) out << " Kappa vs majority (chance-corrected) |";
            out << "\n|---|---|---|---:|---:|---:|---:|---:|---:|";
            if (with_kappa) out << "---:|";
            out << "\n";
            for (const auto& r : report.rows) {
                const auto& basis = r.vs_majority ? r.vs_majority : r.vs_any;
                out << "| " << r.source << " | " << r.variant << " | " << r.guideline_mode << " | " << pct(r.vs_any)
                    << " | " << pct(r.vs_majority) << " | " << (basis ? std::to_string(basis->n) : "-") << " | "
                    << (r.vs_majority ? std::to_string(r.vs_majority->skipped_unresolved) : "-") << " | "
                    << duration_text(r.wall_time_ms) << " | " << r.cost.to_fixed(2) << " |";
                if (with_kappa) out << " " << kappa_text(r.kappa) << " |";
                out << "\n";
            }
            if (report.human_inter_annotator) {
                out << "\nHuman inter-annotator agreement (A1 vs A2): " << report.human_inter_annotator->agreement.percent(1)
                    << "% over " << report.human_inter_annotator->n << " pairs\n";
            }
            break;
        }
        case ReportFormat::csv: {
            const auto header = report_csv_header(with_kappa);
            for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
            out << "\r\n";
            for (const auto& r : report.rows) {
                auto num = [](const std::optional<AgreementStat>& s, int field) -> std::string {
                    if (!s) return "";
                    if (field == 0) return s->agreement.percent(1);
                    return std::to_string(field == 1 ? s->matches() : s->n);
                };
                std::vector<std::string> fields = {r.source,
                                                   r.variant,
                                                   r.guideline_mode,
                                                   num(r.vs_any, 0),
                                                   num(r.vs_any, 1),
                                                   num(r.vs_any, 2),
                                                   num(r.vs_majority, 0),
                                                   num(r.vs_majority, 1),
                                                   num(r.vs_majority, 2),
                                                   r.vs_majority ? std::to_string(r.vs_majority->skipped_unresolved) : "",
                                                   std::to_string(r.wall_time_ms),
                                                   r.cost.to_string()};
                if (with_kappa) fields.push_back(r.kappa ? kappa_text(r.kappa) : "");
                for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << csv_field(fields[i]);
                out << "\r\n";
            }
            break;
        }
        case ReportFormat::json: {
            json rows = json::array();
            for (const auto& r : report.rows) {
                json row{{"source", r.source},
                         {"variant", r.variant},
                         {"guideline_mode", r.guideline_mode},
                         {"vs_any", stat_json(r.vs_any)},
                         {"vs_majority", stat_json(r.vs_majority)},
                         {"wall_time_ms", r.wall_time_ms},
                         {"cost", r.cost.to_string()}};
                if (r.kappa) row["kappa_vs_majority"] = *r.kappa;
                rows.push_back(std::move(row));
            }
            json doc{{"rows", rows}, {"human_inter_annotator", stat_json(report.human_inter_annotator)}};
            out << doc.dump(2) << "\n";
            break;
        }
    }
    return out.str();
}

AgreementReport parse_report_json(std::string_view text) {
    const json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw InvalidInput("report is not a JSON object");
    try {
        AgreementReport report;
        for (const auto& row : doc.at("rows")) {
            ReportRow r;
            r.source = row.at("source").get<std::string>();
            r.variant = row.at("variant").get<std::string>();
            r.guideline_mode = row.at("guideline_mode").get<std::string>();
            r.vs_any = stat_from_json(row.at("vs_any"));
            r.vs_majority = stat_from_json(row.at("vs_majority"));
            if (row.contains("kappa_vs_majority")) r.kappa = row["kappa_vs_majority"].get<double>();
            r.wall_time_ms = row.at("wall_time_ms").get<std::uint64_t>();
            r.cost = Decimal::parse(row.at("cost").get<std::string>());
            report.rows.push_back(std::move(r));
        }
        report.human_inter_annotator = stat_from_json(doc.value("human_inter_annotator", json(nullptr)));
        return report;
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("malformed report: ") + e.what());
    }
}

}  // namespace relassess
