// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

#include "relassess/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

#include "relassess/pipeline.hpp"

namespace relassess {

namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Parses every non-blank line as a T; errors name the line.
template <typename T>
std::vector<T> read_jsonl(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    std::vector<T> out;
    std::string line;
    for (std::size_t number = 1; std::getline(in, line); ++number) {
        if (trim(line).empty()) continue;
        try {
            out.push_back(json::parse(line).get<T>());
        } catch (const json::exception& e) {
            throw InvalidInput(path.string() + ":" + std::to_string(number) + ": " + e.what());
        } catch (const InvalidInput& e) {
            throw InvalidInput(path.string() + ":" + std::to_string(number) + ": " + e.what());
        }
    }
    return out;
}

std::string gender_key(const std::optional<GenderFilter>& g) { return g ? std::string(to_string(*g)) : "-"; }

std::size_t share_count(double share, std::size_t n) {
    const double raw = share * static_cast<double>(n);
    return std::min(n, static_cast<std::size_t>(std::ceil(raw - 1e-9)));
}

void require_rate(double rate, const char* name) {
    if (!(rate >= 0.0 && rate <= 1.0)) throw InvalidInput(std::string(name) + " must lie in [0, 1]");
}

}  // namespace

void validate(const QueryLogRow& row) {
    if (trim(row.query_text).empty()) throw InvalidInput("QueryLogRow.query_text is empty");
    if (row.frequency < 1) throw InvalidInput("QueryLogRow.frequency must be at least 1 for '" + row.query_text + "'");
    if (row.signals) {
        require_rate(row.signals->reformulation_rate, "reformulation_rate");
        require_rate(row.signals->exit_rate, "exit_rate");
    }
}

void to_json(json& j, const QueryLogRow& v) {
    j = json{{"query_text", v.query_text},
             {"language", v.language},
             {"search_engine_id", v.search_engine_id},
             {"frequency", v.frequency}};
    j["gender_filter"] = v.gender_filter ? json(to_string(*v.gender_filter)) : json(nullptr);
    if (v.signals) {
        j["signals"] = {{"reformulation_rate", v.signals->reformulation_rate}, {"exit_rate", v.signals->exit_rate}};
    }
}

void from_json(const json& j, QueryLogRow& v) {
    v.query_text = require_string(j, "query_text");
    v.language = optional_string(j, "language");
    v.search_engine_id = optional_string(j, "search_engine_id");
    const auto gender = optional_string(j, "gender_filter");
    v.gender_filter = gender.empty() ? std::nullopt : std::optional(parse_enum<GenderFilter>(gender));
    const auto& freq = require_field(j, "frequency");
    if (!freq.is_number_integer() || freq.get<std::int64_t>() < 1) {
        throw InvalidInput("field 'frequency' must be a positive integer");
    }
    v.frequency = freq.get<std::uint64_t>();
    v.signals.reset();
    if (auto it = j.find("signals"); it != j.end() && !it->is_null()) {
        QuerySignals s;
        s.reformulation_rate = require_field(*it, "reformulation_rate").get<double>();
        s.exit_rate = require_field(*it, "exit_rate").get<double>();
        v.signals = s;
    }
    validate(v);
}

void validate(const StrataConfig& config) {
    if (config.head_share < 0 || config.torso_share < 0 || config.head_share + config.torso_share > 1.0) {
        throw ConfigError("frequency bucket shares must be non-negative and sum to at most 1");
    }
    for (std::size_t i = 0; i < config.token_length_bounds.size(); ++i) {
        if (config.token_length_bounds[i] == 0 ||
            (i > 0 && config.token_length_bounds[i] <= config.token_length_bounds[i - 1])) {
            throw ConfigError("token length bounds must be positive and strictly increasing");
        }
    }
}

std::size_t token_count(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::size_t n = 0;
    for (std::string word; in >> word;) ++n;
    return n;
}

std::string token_length_bucket(std::size_t tokens, const StrataConfig& config) {
    std::size_t lower = 1;
    for (auto bound : config.token_length_bounds) {
        if (tokens <= bound) return lower == bound ? std::to_string(bound) : std::to_string(lower) + "-" + std::to_string(bound);
        lower = bound + 1;
    }
    return std::to_string(lower) + "+";
}

std::vector<std::string> assign_strata(const std::vector<QueryLogRow>& rows, const StrataConfig& config) {
    validate(config);
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (rows[a].frequency != rows[b].frequency) return rows[a].frequency > rows[b].frequency;
        return rows[a].query_text < rows[b].query_text;
    });
    const std::size_t head = share_count(config.head_share, rows.size());
    const std::size_t torso_end = share_count(config.head_share + config.torso_share, rows.size());
    std::vector<std::string> freq_bucket(rows.size());
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        freq_bucket[order[rank]] = rank < head ? "head" : (rank < torso_end ? "torso" : "tail");
    }
    std::vector<std::string> keys;
    keys.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        keys.push_back(rows[i].search_engine_id + "|" + gender_key(rows[i].gender_filter) + "|" + freq_bucket[i] + "|" +
                       token_length_bucket(token_count(rows[i].query_text), config));
    }
    return keys;
}

std::vector<QueryLogRow> dedupe_queries(const std::vector<QueryLogRow>& log) {
    std::map<std::string, const QueryLogRow*> best;
    auto better = [](const QueryLogRow& a, const QueryLogRow& b) {
        if (a.frequency != b.frequency) return a.frequency > b.frequency;
        if (a.search_engine_id != b.search_engine_id) return a.search_engine_id < b.search_engine_id;
        return canonical_dump(json(a)) < canonical_dump(json(b));
    };
    for (const auto& row : log) {
        auto [it, inserted] = best.emplace(row.query_text, &row);
        if (!inserted && better(row, *it->second)) it->second = &row;
    }
    std::vector<QueryLogRow> out;
    out.reserve(best.size());
    for (const auto& [_, row] : best) out.push_back(*row);
    return out;
}

std::map<std::string, std::size_t> allocate(const std::map<std::string, std::size_t>& sizes, std::size_t n) {
    std::size_t total = 0;
    for (const auto& [_, size] : sizes) total += size;
    if (n > total) throw InsufficientData("cannot allocate " + std::to_string(n) + " items over " + std::to_string(total));
    std::map<std::string, std::size_t> out;
    if (total == 0) return out;
    struct Remainder {
        unsigned __int128 value;
        std::string key;
    };
    std::vector<Remainder> remainders;
    std::size_t assigned = 0;
    for (const auto& [key, size] : sizes) {
        const unsigned __int128 scaled = static_cast<unsigned __int128>(n) * size;
        out[key] = static_cast<std::size_t>(scaled / total);
        assigned += out[key];
        remainders.push_back({scaled % total, key});
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const Remainder& a, const Remainder& b) { return a.value > b.value; });
    for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++out[remainders[i].key];
    return out;
}

std::uint64_t SeededRng::below(std::uint64_t bound) {
    // Lemire's multiply-and-reject method.
    std::uint64_t x = engine_();
    unsigned __int128 m = static_cast<unsigned __int128>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            x = engine_();
            m = static_cast<unsigned __int128>(x) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

std::vector<std::size_t> SeededRng::sample_indices(std::size_t n, std::size_t k) {
    if (k > n) throw InvalidInput("cannot draw " + std::to_string(k) + " of " + std::to_string(n));
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + below(n - i)]);
    pool.resize(k);
    return pool;
}

std::vector<QueryLogRow> stratified_sample(const std::vector<QueryLogRow>& log, std::size_t n, std::uint64_t seed,
                                           const StrataConfig& config) {
    const auto rows = dedupe_queries(log);
    if (n > rows.size()) {
        throw InsufficientData("requested " + std::to_string(n) + " queries but the log holds only " +
                               std::to_string(rows.size()) + " distinct ones");
    }
    const auto keys = assign_strata(rows, config);
    std::map<std::string, std::vector<std::size_t>> members;  // rows are sorted by text already
    for (std::size_t i = 0; i < rows.size(); ++i) members[keys[i]].push_back(i);
    std::map<std::string, std::size_t> sizes;
    for (const auto& [key, idx] : members) sizes[key] = idx.size();
    const auto quota = allocate(sizes, n);

    SeededRng rng(seed);
    std::vector<QueryLogRow> out;
    out.reserve(n);
    for (const auto& [key, idx] : members) {
        const std::size_t k = quota.at(key);
        if (k > idx.size()) {
            throw InsufficientData("stratum '" + key + "' holds " + std::to_string(idx.size()) + " queries, " +
                                   std::to_string(k) + " requested");
        }
        for (auto pick : rng.sample_indices(idx.size(), k)) out.push_back(rows[idx[pick]]);
    }
    std::sort(out.begin(), out.end(), [](const QueryLogRow& a, const QueryLogRow& b) { return a.query_text < b.query_text; });
    return out;
}

CurationList read_curation_file(const fs::path& path) {
    const json doc = json::parse(read_text(path), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw InvalidInput("curation file '" + path.string() + "' is not a JSON object");
    CurationList list;
    try {
        const json exclude = doc.value("exclude", json::array());
        const json replace = doc.value("replace", json::object());
        for (const auto& text : exclude) list.exclude.insert(text.get<std::string>());
        for (const auto& [from, to] : replace.items()) list.replace[from] = to.get<std::string>();
    } catch (const json::exception& e) {
        throw InvalidInput("curation file '" + path.string() + "': " + e.what());
    }
    return list;
}

std::vector<QueryLogRow> apply_curation(const std::vector<QueryLogRow>& log, const CurationList& curation) {
    std::vector<QueryLogRow> out;
    for (auto row : log) {
        if (curation.exclude.contains(row.query_text)) continue;
        if (auto it = curation.replace.find(row.query_text); it != curation.replace.end()) row.query_text = it->second;
        out.push_back(std::move(row));
    }
    return out;
}

std::vector<std::string> mix_retrieval(const std::vector<std::string>& ranked, std::size_t top_k, std::size_t tail_n,
                                       std::size_t tail_start_rank, std::uint64_t seed) {
    {
        std::set<std::string_view> seen;
        for (const auto& id : ranked) {
            if (!seen.insert(id).second) throw InvalidInput("ranking lists product '" + id + "' twice");
        }
    }
    if (ranked.size() < top_k) {
        throw ShortRankingError("ranking has " + std::to_string(ranked.size()) + " items, top_k is " + std::to_string(top_k));
    }
    std::vector<std::string> out(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(top_k));
    if (tail_n == 0) return out;
    if (tail_start_rank <= top_k) {
        throw InvalidInput("tail_start_rank " + std::to_string(tail_start_rank) + " overlaps the top " + std::to_string(top_k));
    }
    if (ranked.size() < tail_start_rank + tail_n) {
        throw ShortRankingError("ranking has " + std::to_string(ranked.size()) + " items; need at least " +
                                std::to_string(tail_start_rank + tail_n) + " for " + std::to_string(tail_n) +
                                " tail items from rank " + std::to_string(tail_start_rank));
    }
    const std::size_t pool_start = tail_start_rank - 1;
    SeededRng rng(seed);
    auto picks = rng.sample_indices(ranked.size() - pool_start, tail_n);
    std::sort(picks.begin(), picks.end());
    for (auto p : picks) out.push_back(ranked[pool_start + p]);
    return out;
}

std::vector<RankedList> read_rankings_file(const fs::path& path) {
    std::vector<RankedList> out;
    for (const auto& doc : read_jsonl<json>(path)) {
        RankedList list;
        list.query_id = require_string(doc, "query_id");
        const auto& ranking = require_field(doc, "ranking");
        if (!ranking.is_array()) throw InvalidInput("field 'ranking' must be an array");
        for (const auto& id : ranking) list.ranking.push_back(id.get<std::string>());
        out.push_back(std::move(list));
    }
    return out;
}

PrioritizedQueries prioritize_queries(const std::vector<QueryLogRow>& log, const PriorityThresholds& thresholds,
                                      std::optional<std::size_t> limit) {
    PrioritizedQueries out;
    for (const auto& row : log) {
        if (!row.signals) {
            ++out.excluded_without_signals;
            continue;
        }
        if (row.signals->reformulation_rate >= thresholds.min_reformulation_rate ||
            row.signals->exit_rate >= thresholds.min_exit_rate) {
            out.rows.push_back(row);
        }
    }
    auto score = [](const QueryLogRow& r) { return std::max(r.signals->reformulation_rate, r.signals->exit_rate); };
    std::stable_sort(out.rows.begin(), out.rows.end(), [&](const QueryLogRow& a, const QueryLogRow& b) {
        if (score(a) != score(b)) return score(a) > score(b);
        return a.query_text < b.query_text;
    });
    if (limit && out.rows.size() > *limit) out.rows.resize(*limit);
    return out;
}

std::vector<QueryLogRow> read_query_log(const fs::path& path) { return read_jsonl<QueryLogRow>(path); }

std::vector<AnnotationSet> read_annotations_file(const fs::path& path) { return read_jsonl<AnnotationSet>(path); }

std::vector<Adjudication> read_adjudications_file(const fs::path& path) {
    auto out = read_jsonl<Adjudication>(path);
    for (const auto& a : out) validate(a);
    return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"' && !field_started) {
            quoted = true;
            field_started = true;
        } else if (c == ',') {
            record.push_back(std::move(field));
            field.clear();
            field_started = false;
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            record.push_back(std::move(field));
            records.push_back(std::move(record));
            record.clear();
            field.clear();
            field_started = false;
        } else {
            field += c;
            field_started = true;
        }
    }
    if (quoted) throw InvalidInput("unterminated quoted CSV field");
    if (field_started || !record.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
    }
    return records;
}

json to_json(const ValidationReport& report) {
    auto issues = [](const std::vector<ValidationIssue>& list) {
        json out = json::array();
        for (const auto& i : list) out.push_back({{"line", i.line}, {"kind", i.kind}, {"message", i.message}});
        return out;
    };
    return json{{"kind", to_string(report.kind)},
                {"records", report.records},
                {"ok", report.ok()},
                {"errors", issues(report.errors)},
                {"warnings", issues(report.warnings)}};
}

DatasetKind detect_dataset_kind(const fs::path& path, std::string_view content) {
    const auto ext = path.extension().string();
    if (ext == ".csv") return DatasetKind::report_csv;
    const std::string first_line = trim(content.substr(0, content.find('\n')));
    if (ext == ".json" || content.find('\n') == std::string_view::npos || first_line == "{") {
        const json whole = json::parse(content, nullptr, false);
        if (!whole.is_discarded() && whole.is_object() && whole.contains("rows")) return DatasetKind::report_json;
    }
    if (first_line.starts_with("source,")) return DatasetKind::report_csv;
    const json doc = json::parse(first_line, nullptr, false);
    if (doc.is_object()) {
        if (doc.contains("query") && doc.contains("product")) return DatasetKind::pairs;
        if (doc.contains("final_label") || doc.contains("fault")) return DatasetKind::adjudications;
        if (doc.contains("a1") || doc.contains("a2")) return DatasetKind::annotations;
        if (doc.contains("ranking")) return DatasetKind::rankings;
        if (doc.contains("frequency")) return DatasetKind::query_log;
        if (doc.contains("label") && doc.contains("variant")) return DatasetKind::judgments;
        if (doc.contains("rows")) return DatasetKind::report_json;
    }
    throw InvalidInput("cannot tell what kind of dataset '" + path.string() + "' is; pass --kind");
}

namespace {

std::string issue_kind(const std::string& message) {
    if (message.find("missing field") != std::string::npos || message.find("missing required") != std::string::npos) {
        return "missing_field";
    }
    if (message.find("unknown ") != std::string::npos) return "unknown_enum";
    return "invalid";
}

void validate_jsonl(std::string_view content, ValidationReport& report,
                    const std::function<void(std::size_t, const json&)>& check) {
    std::istringstream in{std::string(content)};
    std::string line;
    for (std::size_t number = 1; std::getline(in, line); ++number) {
        if (trim(line).empty()) continue;
        ++report.records;
        const json doc = json::parse(line, nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) {
            report.errors.push_back({number, "syntax", "line is not a JSON object"});
            continue;
        }
        try {
            check(number, doc);
        } catch (const Error& e) {
            report.errors.push_back({number, issue_kind(e.what()), e.what()});
        } catch (const json::exception& e) {
            report.errors.push_back({number, "invalid", e.what()});
        }
    }
}

template <typename Key>
struct DuplicateTracker {
    std::map<Key, std::size_t> first_line;

    void see(const Key& key, const std::string& label, std::size_t line, ValidationReport& report) {
        auto [it, inserted] = first_line.emplace(key, line);
        if (!inserted) {
            report.errors.push_back({line, "duplicate",
                                     "duplicate " + label + " (first seen on line " + std::to_string(it->second) + ")"});
        }
    }
};

void validate_report_csv(std::string_view content, ValidationReport& report) {
    std::vector<std::vector<std::string>> rows;
    try {
        rows = parse_csv(content);
    } catch (const InvalidInput& e) {
        report.errors.push_back({0, "syntax", e.what()});
        return;
    }
    if (rows.empty()) {
        report.errors.push_back({0, "missing_field", "CSV has no header row"});
        return;
    }
    const bool with_kappa = rows[0] == report_csv_header(true);
    if (!with_kappa && rows[0] != report_csv_header(false)) {
        report.errors.push_back({1, "header", "unexpected CSV header"});
        return;
    }
    const std::size_t width = rows[0].size();
    const std::set<std::size_t> integer_columns = {4, 5, 7, 8, 9, 10};
    const std::set<std::size_t> decimal_columns = {3, 6, 11};
    for (std::size_t r = 1; r < rows.size(); ++r) {
        ++report.records;
        const auto& row = rows[r];
        if (row.size() != width) {
            report.errors.push_back({r + 1, "columns", "expected " + std::to_string(width) + " fields, found " +
                                                           std::to_string(row.size())});
            continue;
        }
        for (std::size_t c = 0; c < width; ++c) {
            const auto& v = row[c];
            if (v.empty()) continue;
            if (integer_columns.contains(c) && v.find_first_not_of("0123456789") != std::string::npos) {
                report.errors.push_back({r + 1, "invalid", "column '" + rows[0][c] + "' is not an integer: " + v});
            } else if (decimal_columns.contains(c) || (with_kappa && c == width - 1)) {
                try {
                    Decimal::parse(v);
                } catch (const InvalidInput&) {
                    report.errors.push_back({r + 1, "invalid", "column '" + rows[0][c] + "' is not a number: " + v});
                }
            }
        }
    }
}

}  // namespace

ValidationReport validate_dataset_text(std::string_view content, const ValidationOptions& options, const fs::path& name) {
    ValidationReport report;
    report.kind = options.kind ? *options.kind : detect_dataset_kind(name, content);
    switch (report.kind) {
        case DatasetKind::pairs: {
            DuplicateTracker<PairId> pairs;
            std::map<std::string, std::string> products;  // id -> canonical record
            AssetResolver assets(options.asset_root);
            std::set<std::string> checked_images;
            validate_jsonl(content, report, [&](std::size_t line, const json& doc) {
                const auto input = doc.get<PairInput>();
                validate(input.query, options.languages);
                pairs.see(input.pair_id(), "pair id " + to_string(input.pair_id()), line, report);
                const std::string canonical = canonical_dump(json(input.product));
                auto [it, inserted] = products.emplace(input.product.product_id, canonical);
                if (!inserted && it->second != canonical) {
                    report.errors.push_back({line, "duplicate", "product id '" + input.product.product_id +
                                                                    "' is used for two different records"});
                }
                const bool has_image = input.product.image_ref && !input.product.image_ref->empty();
                if (trim(input.product.description).empty() && !has_image) {
                    report.warnings.push_back({line, "degenerate", "product '" + input.product.product_id +
                                                                       "' has neither description nor image"});
                }
                if (has_image && options.check_images && checked_images.insert(*input.product.image_ref).second) {
                    try {
                        if (assets.local_path(*input.product.image_ref)) (void)assets.load(input.product);
                    } catch (const Error& e) {
                        report.errors.push_back({line, "image", e.what()});
                    }
                }
            });
            break;
        }
        case DatasetKind::annotations: {
            DuplicateTracker<PairId> pairs;
            validate_jsonl(content, report, [&](std::size_t line, const json& doc) {
                const auto set = doc.get<AnnotationSet>();
                pairs.see(set.pair_id, "pair id " + to_string(set.pair_id), line, report);
                if (set.a1 && set.a2 && *set.a1 != *set.a2 && !set.tiebreaker) {
                    report.warnings.push_back({line, "unresolved", "a1 and a2 differ without a tiebreaker"});
                }
            });
            break;
        }
        case DatasetKind::adjudications: {
            DuplicateTracker<PairId> pairs;
            validate_jsonl(content, report, [&](std::size_t line, const json& doc) {
                const auto adjudication = doc.get<Adjudication>();
                validate(adjudication);
                pairs.see(adjudication.pair_id, "adjudication for " + to_string(adjudication.pair_id), line, report);
            });
            break;
        }
        case DatasetKind::query_log: {
            validate_jsonl(content, report, [&](std::size_t, const json& doc) { (void)doc.get<QueryLogRow>(); });
            break;
        }
        case DatasetKind::rankings: {
            DuplicateTracker<std::string> queries;
            validate_jsonl(content, report, [&](std::size_t line, const json& doc) {
                const std::string query_id = require_string(doc, "query_id");
                queries.see(query_id, "query id '" + query_id + "'", line, report);
                const auto& ranking = require_field(doc, "ranking");
                if (!ranking.is_array()) throw InvalidInput("field 'ranking' must be an array");
                std::set<std::string> seen;
                for (const auto& id : ranking) {
                    if (!id.is_string()) throw InvalidInput("ranking entries must be strings");
                    if (!seen.insert(id.get<std::string>()).second) {
                        report.errors.push_back({line, "duplicate", "product '" + id.get<std::string>() +
                                                                        "' appears twice in the ranking"});
                    }
                }
            });
            break;
        }
        case DatasetKind::judgments: {
            DuplicateTracker<std::pair<PairId, std::string>> pairs;
            validate_jsonl(content, report, [&](std::size_t line, const json& doc) {
                const auto record = doc.get<JudgmentRecord>();
                pairs.see({record.pair_id, record.source()}, "judgment for " + to_string(record.pair_id), line, report);
            });
            break;
        }
        case DatasetKind::report_csv:
            validate_report_csv(content, report);
            break;
        case DatasetKind::report_json:
            try {
                report.records = parse_report_json(content).rows.size();
            } catch (const Error& e) {
                report.errors.push_back({0, "invalid", e.what()});
            }
            break;
    }
    return report;
}

ValidationReport validate_dataset(const fs::path& path, const ValidationOptions& options) {
    return validate_dataset_text(read_text(path), options, path);
}

}  // namespace relassess
