// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

#include "relassess/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "relassess/digest.hpp"

namespace relassess {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kBuiltinModel = "builtin";

std::string digest_of(const json& value) { return sha256_hex(canonical_dump(value)); }

std::uint64_t elapsed_ms(std::chrono::steady_clock::time_point since) {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - since).count());
}

json query_inputs(const QueryContext& ctx) {
    return json{{"query_text", ctx.query_text},
                {"language", ctx.language},
                {"market", ctx.market},
                {"gender_filter", ctx.gender_filter ? json(to_string(*ctx.gender_filter)) : json(nullptr)}};
}

std::string requirements_text(const QueryAnalysis& analysis) {
    std::string out;
    for (const auto& r : analysis.requirements) {
        out += "- " + r.name + ": " + r.value + " (" + std::string(to_string(r.importance)) + ")";
        if (!r.reason.empty()) out += " - " + r.reason;
        out += "\n";
    }
    return out;
}

std::string must_have_text(const QueryAnalysis& analysis) {
    std::string out;
    for (const auto& r : analysis.requirements) {
        if (r.importance != Importance::must_have) continue;
        if (!out.empty()) out += ", ";
        out += r.name + ": " + r.value;
    }
    return out.empty() ? "none" : out;
}

std::string attributes_text(const ProductRecord& product) {
    std::string out;
    for (const auto& [key, value] : product.attributes) out += "- " + key + ": " + value + "\n";
    return out.empty() ? "- none\n" : out;
}

ChatRequest make_request(std::string system, std::vector<ContentPart> parts, std::string_view schema) {
    ChatRequest request;
    request.system_prompt = std::move(system);
    request.user_content = std::move(parts);
    request.response_schema_id = std::string(schema);
    return request;
}

std::string read_binary(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingImage("cannot read image '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

void validate(const PipelineConfig& config, const Gateway& gateway) {
    auto require_model = [&](const std::string& id, const char* role) {
        if (id.empty()) throw ConfigError(std::string("pipeline needs a ") + role);
        if (!gateway.has_model(id)) throw ConfigError(std::string(role) + " '" + id + "' is not configured");
    };
    require_model(config.analysis_model, "analysis_model");
    require_model(config.judge_model, "judge_model");
    if (config.max_workers == 0) throw ConfigError("max_workers must be at least 1");
    if (config.languages.empty()) throw ConfigError("at least one supported language is required");
    if (config.variant == Variant::mllm_text) require_model(config.vision_model, "vision_model");
    if (config.variant == Variant::mllm_multi && !gateway.model(config.judge_model).supports_image_input) {
        throw ConfigError("variant mllm_multi needs a judge model with image input; '" + config.judge_model +
                          "' is text-only");
    }
}

void to_json(json& j, const PairInput& v) { j = json{{"query", v.query}, {"product", v.product}}; }

void from_json(const json& j, PairInput& v) {
    v.query = require_field(j, "query").get<QueryContext>();
    v.product = require_field(j, "product").get<ProductRecord>();
}

std::vector<PairInput> read_pairs_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read pairs file '" + path.string() + "'");
    std::vector<PairInput> pairs;
    std::string line;
    for (std::size_t number = 1; std::getline(in, line); ++number) {
        if (trim(line).empty()) continue;
        try {
            pairs.push_back(json::parse(line).get<PairInput>());
        } catch (const json::exception& e) {
            throw InvalidInput(path.string() + ":" + std::to_string(number) + ": " + e.what());
        } catch (const InvalidInput& e) {
            throw InvalidInput(path.string() + ":" + std::to_string(number) + ": " + e.what());
        }
    }
    return pairs;
}

std::string sniff_image_type(const std::vector<std::uint8_t>& bytes) {
    auto starts = [&](std::initializer_list<int> magic, std::size_t offset = 0) {
        if (bytes.size() < offset + magic.size()) return false;
        std::size_t i = offset;
        for (int b : magic) {
            if (bytes[i++] != static_cast<std::uint8_t>(b)) return false;
        }
        return true;
    };
    if (starts({0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A})) return "image/png";
    if (starts({0xFF, 0xD8, 0xFF})) return "image/jpeg";
    if (starts({'G', 'I', 'F', '8'})) return "image/gif";
    if (starts({'R', 'I', 'F', 'F'}) && starts({'W', 'E', 'B', 'P'}, 8)) return "image/webp";
    throw ImageDecodeError("unrecognized image format (" + std::to_string(bytes.size()) + " bytes)");
}

AssetResolver::AssetResolver(fs::path root) : root_(std::move(root)) {}

std::optional<fs::path> AssetResolver::local_path(const std::string& image_ref) const {
    if (image_ref.starts_with("http://") || image_ref.starts_with("https://")) return std::nullopt;
    if (image_ref.starts_with("file://")) return fs::path(image_ref.substr(7));
    const fs::path ref(image_ref);
    if (ref.is_absolute()) return ref;
    const fs::path resolved = (root_ / ref).lexically_normal();
    const fs::path base = root_.lexically_normal();
    const auto rel = resolved.lexically_relative(base);
    if (rel.empty() || *rel.begin() == "..") {
        throw MissingImage("image ref '" + image_ref + "' escapes the asset root");
    }
    return resolved;
}

LoadedImage AssetResolver::load(const ProductRecord& product) const {
    if (!product.image_ref || product.image_ref->empty()) {
        throw MissingImage("product '" + product.product_id + "' has no image");
    }
    LoadedImage image;
    if (auto path = local_path(*product.image_ref)) {
        std::error_code ec;
        if (!fs::is_regular_file(*path, ec)) throw MissingImage("image '" + path->string() + "' does not exist");
        const std::string raw = read_binary(*path);
        image.bytes.assign(raw.begin(), raw.end());
    } else {
        image.bytes = fetch_url_bytes(*product.image_ref, 30'000);
    }
    image.media_type = sniff_image_type(image.bytes);
    image.sha256 = sha256_hex(image.bytes);
    return image;
}

json to_json(const PairDossier& d) {
    json analysis = d.analysis;
    json guideline = d.guideline;
    json judgments = json::array();
    for (const auto& j : d.judgments) judgments.push_back(j);
    json out{{"query", d.query},
             {"analysis", analysis},
             {"guideline", guideline},
             {"product", d.product},
             {"visual_description", d.visual_description ? json(*d.visual_description) : json(nullptr)},
             {"judgments", judgments},
             {"analysis_digest", d.analysis_digest},
             {"guideline_digest", d.guideline_digest}};
    out["adjudication"] = d.adjudication ? json(*d.adjudication) : json(nullptr);
    return out;
}

void to_json(json& j, const JudgmentRecord& v) {
    j = json{{"pair_id", v.pair_id},
             {"source", v.source()},
             {"model_id", v.model_id},
             {"variant", to_string(v.variant)},
             {"guideline_mode", to_string(v.guideline_mode)},
             {"label", to_string(v.label)},
             {"reasoning", v.reasoning},
             {"usage", v.usage},
             {"analysis_digest", v.analysis_digest},
             {"guideline_digest", v.guideline_digest},
             {"refs", v.refs}};
    if (v.visual_description_digest) j["visual_description_digest"] = *v.visual_description_digest;
    if (v.wall_time_ms) j["wall_time_ms"] = *v.wall_time_ms;
    if (v.created_at) j["created_at"] = *v.created_at;
}

void from_json(const json& j, JudgmentRecord& v) {
    v.pair_id = require_field(j, "pair_id").get<PairId>();
    v.model_id = require_string(j, "model_id");
    v.variant = require_enum<Variant>(j, "variant");
    v.guideline_mode = require_enum<GuidelineKind>(j, "guideline_mode");
    v.label = require_enum<RelevanceLabel>(j, "label");
    v.reasoning = optional_string(j, "reasoning");
    v.usage = j.contains("usage") ? j["usage"].get<TokenUsage>() : TokenUsage{};
    v.analysis_digest = optional_string(j, "analysis_digest");
    v.guideline_digest = optional_string(j, "guideline_digest");
    v.visual_description_digest.reset();
    if (j.contains("visual_description_digest")) v.visual_description_digest = require_string(j, "visual_description_digest");
    v.refs.clear();
    if (j.contains("refs")) v.refs = j["refs"].get<std::map<std::string, std::string>>();
    v.wall_time_ms.reset();
    if (j.contains("wall_time_ms")) v.wall_time_ms = j["wall_time_ms"].get<std::uint64_t>();
    v.created_at.reset();
    if (j.contains("created_at")) v.created_at = require_string(j, "created_at");
}

std::vector<JudgmentRecord> read_judgments_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read judgments file '" + path.string() + "'");
    std::vector<JudgmentRecord> records;
    std::string line;
    for (std::size_t number = 1; std::getline(in, line); ++number) {
        if (trim(line).empty()) continue;
        try {
            records.push_back(json::parse(line).get<JudgmentRecord>());
        } catch (const json::exception& e) {
            throw InvalidInput(path.string() + ":" + std::to_string(number) + ": " + e.what());
        } catch (const InvalidInput& e) {
            throw InvalidInput(path.string() + ":" + std::to_string(number) + ": " + e.what());
        }
    }
    return records;
}

std::string render_judgments(const std::vector<JudgmentRecord>& records, bool with_timing) {
    std::vector<const JudgmentRecord*> sorted;
    for (const auto& r : records) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->pair_id < b->pair_id; });
    std::string out;
    for (const auto* r : sorted) {
        json line = *r;
        if (!with_timing) {
            line.erase("wall_time_ms");
            line.erase("created_at");
        }
        out += canonical_dump(line);
        out += '\n';
    }
    return out;
}

json to_json(const PairFailure& f) {
    return json{{"pair_id", f.pair_id}, {"stage", f.stage}, {"error_kind", f.error_kind}, {"message", f.message}};
}

json to_json(const BatchPlan& plan) {
    return json{{"analyses", plan.analyses},
                {"guidelines", plan.guidelines},
                {"visual_descriptions", plan.visual_descriptions},
                {"judgments", plan.judgments},
                {"total", plan.total()}};
}

json summary_json(const BatchReport& report) {
    json failures = json::array();
    for (const auto& f : report.failures) failures.push_back(to_json(f));
    json per_step = json::object();
    for (const auto& [step, n] : report.cache_stats.entries_per_step) per_step[std::string(to_string(step))] = n;
    return json{{"judged", report.judgments.size()},
                {"failed", report.failures.size()},
                {"failures", failures},
                {"warnings", report.warnings},
                {"backend_calls", report.backend_calls},
                {"usage", report.usage},
                {"cost", report.cost.to_string()},
                {"wall_time_ms", report.wall_time_ms},
                {"cancelled", report.cancelled},
                {"cache",
                 {{"hits", report.cache_stats.hit_count},
                  {"misses", report.cache_stats.miss_count},
                  {"bytes", report.cache_stats.bytes},
                  {"entries_per_step", per_step}}}};
}

GuidelineSet generic_guideline() {
    GuidelineSet g;
    g.query_id = std::string(kGenericGuidelineId);
    g.kind = GuidelineKind::generic;
    g.model_id = std::string(kBuiltinModel);
    g.criteria[static_cast<std::size_t>(RelevanceLabel::highly_relevant)] =
        "The retrieved product satisfies all the specifications in the query: it is the requested type of product, "
        "from the requested brand if one is named, and matches every stated attribute such as colour, material, "
        "pattern, fit or target group.";
    g.criteria[static_cast<std::size_t>(RelevanceLabel::acceptable_substitute)] =
        "The product fulfils some, but not all aspects of the query and can be used as a functional substitute, for "
        "example a close colour, a similar style or a neighbouring product type, while brand and core product type "
        "are still respected.";
    g.criteria[static_cast<std::size_t>(RelevanceLabel::irrelevant)] =
        "A central aspect of the query is not fulfilled: wrong brand, wrong category or wrong product. If the query "
        "names a brand, any product from another brand is irrelevant; if it names a particular product, any other "
        "product is irrelevant, however similar it looks.";
    g.prompt_version = digest_of(json{{"criteria",
                                       {{"highly_relevant", g.criteria[2]},
                                        {"acceptable_substitute", g.criteria[1]},
                                        {"irrelevant", g.criteria[0]}}}})
                           .substr(0, 16);
    return g;
}

Pipeline::Pipeline(Gateway& gateway, CacheStore& store, PromptLibrary& prompts, AssetResolver assets,
                   PipelineConfig config)
    : gateway_(gateway), store_(store), prompts_(prompts), assets_(std::move(assets)), config_(std::move(config)) {
    validate(config_, gateway_);
    if (config_.run_id.empty()) config_.run_id = "run-" + utc_now_iso();
}

const PromptTemplate& Pipeline::prompt(std::string_view step, std::string_view language) const {
    return prompts_.get(step, language);
}

Pipeline::Computed Pipeline::call_model(ChatRequest request, const std::string& model_id) {
    const auto started = std::chrono::steady_clock::now();
    StructuredResult result = gateway_.complete_structured(std::move(request), model_id);
    return Computed{std::move(result.value), result.usage, elapsed_ms(started)};
}

Pipeline::StepResult Pipeline::cached_step(const CacheKey& key, const std::function<Computed()>& compute) {
    const std::string digest = key.digest();
    std::promise<StepResult> promise;
    std::shared_future<StepResult> pending;
    {
        std::lock_guard lock(inflight_mutex_);
        auto it = inflight_.find(digest);
        if (it != inflight_.end()) {
            pending = it->second;
        } else {
            inflight_.emplace(digest, promise.get_future().share());
        }
    }
    if (pending.valid()) return pending.get();

    auto finish = [&] {
        std::lock_guard lock(inflight_mutex_);
        inflight_.erase(digest);
    };
    try {
        StepResult result;
        result.key_digest = digest;
        if (auto entry = store_.get(key)) {
            result.value = std::move(entry->value);
            result.usage = entry->usage;
            result.wall_time_ms = entry->wall_time_ms;
            result.created_at = entry->created_at;
        } else {
            Computed computed = compute();
            CacheEntry fresh{key, computed.value, computed.usage, computed.wall_time_ms, utc_now_iso(), config_.run_id};
            store_.put(fresh);
            result.value = std::move(computed.value);
            result.usage = computed.usage;
            result.wall_time_ms = computed.wall_time_ms;
            result.created_at = fresh.created_at;
        }
        promise.set_value(result);
        finish();
        return result;
    } catch (...) {
        promise.set_exception(std::current_exception());
        finish();
        throw;
    }
}

CacheKey Pipeline::analysis_key(const QueryContext& ctx) const {
    return CacheKey::make(Step::query_analysis, config_.analysis_model, prompt("query_analysis", ctx.language).version(),
                          query_inputs(ctx));
}

CacheKey Pipeline::guideline_key(const std::string& analysis_digest, const QueryContext& ctx) const {
    if (config_.guideline_mode == GuidelineKind::generic) {
        const GuidelineSet g = generic_guideline();
        return CacheKey::make(Step::guideline, g.model_id, g.prompt_version, json{{"mode", "generic"}});
    }
    return CacheKey::make(Step::guideline, config_.analysis_model, prompt("guideline_set", ctx.language).version(),
                          json{{"analysis_digest", analysis_digest},
                               {"mode", to_string(config_.guideline_mode)},
                               {"language", ctx.language}});
}

CacheKey Pipeline::visual_key(const std::string& image_sha256) const {
    return CacheKey::make(Step::visual_description, config_.vision_model, prompt("visual_description", "en").version(),
                          json{{"image_sha256", image_sha256}});
}

CacheKey Pipeline::judgment_key(const PairDossier& d) const {
    json inputs{{"variant", to_string(config_.variant)},
                {"guideline_mode", to_string(config_.guideline_mode)},
                {"analysis_digest", d.analysis_digest},
                {"guideline_digest", d.guideline_digest},
                {"product_digest", digest_of(json(d.product))},
                {"query", query_inputs(d.query)}};
    inputs["visual_description_digest"] = d.visual_description_digest ? json(*d.visual_description_digest) : json(nullptr);
    inputs["image_sha256"] =
        config_.variant == Variant::mllm_multi && d.image ? json(d.image->sha256) : json(nullptr);
    return CacheKey::make(Step::judgment, config_.judge_model, prompt("judgment", d.query.language).version(), inputs);
}

QueryAnalysis Pipeline::analyze_query(const QueryContext& ctx) {
    validate(ctx, config_.languages);
    const CacheKey key = analysis_key(ctx);
    const auto result = cached_step(key, [&] {
        const auto& tpl = prompt("query_analysis", ctx.language);
        std::map<std::string, std::string> slots{
            {"query_text", ctx.query_text},
            {"language", ctx.language},
            {"market", ctx.market.empty() ? "unspecified" : ctx.market},
            {"gender_filter", ctx.gender_filter ? std::string(to_string(*ctx.gender_filter)) : "none"},
            {"few_shot_examples", prompts_.few_shot_text()}};
        const auto rendered = tpl.render(slots);
        ChatRequest request = make_request(rendered.system, {TextPart{rendered.user}}, kSchemaQueryAnalysis);
        request.slots = slots;
        Computed computed = call_model(std::move(request), config_.analysis_model);
        QueryAnalysis analysis;
        try {
            analysis = computed.value.get<QueryAnalysis>();
        } catch (const json::exception& e) {
            throw SchemaViolation(std::string("query analysis does not parse: ") + e.what(), computed.value.dump());
        }
        analysis.query_id.clear();
        analysis.model_id = config_.analysis_model;
        analysis.prompt_version = tpl.version();
        validate(analysis);
        computed.value = analysis;
        return computed;
    });
    QueryAnalysis analysis = result.value.get<QueryAnalysis>();
    analysis.query_id = ctx.query_id;
    return analysis;
}

GuidelineSet Pipeline::generate_guideline(const QueryAnalysis& analysis, const QueryContext& ctx) {
    json stored = analysis;
    stored["query_id"] = "";
    const std::string analysis_digest = digest_of(stored);
    const CacheKey key = guideline_key(analysis_digest, ctx);
    const auto result = cached_step(key, [&] {
        if (config_.guideline_mode == GuidelineKind::generic) return Computed{json(generic_guideline()), {}, 0};
        const auto& tpl = prompt("guideline_set", ctx.language);
        std::map<std::string, std::string> slots{{"translated_query", analysis.translated_query},
                                                 {"specificity", std::string(to_string(analysis.specificity))},
                                                 {"requirements", requirements_text(analysis)},
                                                 {"must_have_requirements", must_have_text(analysis)},
                                                 {"language", ctx.language}};
        const auto rendered = tpl.render(slots);
        ChatRequest request = make_request(rendered.system, {TextPart{rendered.user}}, kSchemaGuidelineSet);
        request.slots = slots;
        Computed computed = call_model(std::move(request), config_.analysis_model);
        GuidelineSet guideline;
        guideline.kind = GuidelineKind::query_specific;
        const json& criteria = computed.value.at("criteria");
        for (auto label : all_values<RelevanceLabel>()) {
            guideline.criteria[static_cast<std::size_t>(label)] = criteria.value(std::string(to_string(label)), "");
        }
        guideline.model_id = config_.analysis_model;
        guideline.prompt_version = tpl.version();
        try {
            validate(guideline);
        } catch (const InvalidInput& e) {
            throw SchemaViolation(e.what(), computed.value.dump());
        }
        computed.value = guideline;
        return computed;
    });
    GuidelineSet guideline = result.value.get<GuidelineSet>();
    if (guideline.kind == GuidelineKind::query_specific) guideline.query_id = ctx.query_id;
    return guideline;
}

std::string Pipeline::describe_image(const ProductRecord& product) {
    if (config_.vision_model.empty()) throw ConfigError("no vision_model configured");
    const LoadedImage image = assets_.load(product);
    const auto result = cached_step(visual_key(image.sha256), [&] {
        const auto& tpl = prompt("visual_description", "en");
        const auto rendered = tpl.render({});
        ChatRequest request = make_request(rendered.system, {TextPart{rendered.user}, ImagePart{image.bytes, image.media_type}}, kSchemaVisualDescription);
        return call_model(std::move(request), config_.vision_model);
    });
    return result.value.at("description").get<std::string>();
}

ChatRequest Pipeline::compose_judge_input(const PairDossier& d, Variant variant) const {
    const auto& tpl = prompt("judgment", d.query.language);
    std::string visual;
    if (variant == Variant::mllm_text) {
        if (!d.visual_description) throw MissingImage("no visual description for product '" + d.product.product_id + "'");
        visual = "Visual description of the product image:\n" + *d.visual_description + "\n";
    }
    std::map<std::string, std::string> slots{
        {"query_text", d.query.query_text},
        {"translated_query", d.analysis.translated_query},
        {"specificity", std::string(to_string(d.analysis.specificity))},
        {"requirements", requirements_text(d.analysis)},
        {"guideline_highly_relevant", d.guideline.criterion(RelevanceLabel::highly_relevant)},
        {"guideline_acceptable_substitute", d.guideline.criterion(RelevanceLabel::acceptable_substitute)},
        {"guideline_irrelevant", d.guideline.criterion(RelevanceLabel::irrelevant)},
        {"product_title", d.product.title},
        {"product_attributes", attributes_text(d.product)},
        {"product_description", d.product.description.empty() ? "(none)" : d.product.description},
        {"visual_description", visual},
        {"market", d.query.market.empty() ? "unspecified" : d.query.market},
        {"gender_filter", d.query.gender_filter ? std::string(to_string(*d.query.gender_filter)) : "none"},
        {"few_shot_examples", prompts_.few_shot_text()}};
    const auto rendered = tpl.render(slots);
    ChatRequest request = make_request(rendered.system, {TextPart{rendered.user}}, kSchemaJudgment);
    if (variant == Variant::mllm_multi) {
        if (!d.image) throw MissingImage("product '" + d.product.product_id + "' has no loaded image");
        request.user_content.emplace_back(ImagePart{d.image->bytes, d.image->media_type});
    }
    request.slots = std::move(slots);
    return request;
}

Judgment Pipeline::judge_pair(PairDossier& d) {
    const CacheKey key = judgment_key(d);
    const auto result = cached_step(key, [&] {
        Computed computed = call_model(compose_judge_input(d, config_.variant), config_.judge_model);
        computed.value = json{{"label", computed.value.at("label")}, {"reasoning", computed.value.value("reasoning", "")}};
        return computed;
    });
    d.refs[std::string(to_string(Step::judgment))] = result.key_digest;
    Judgment judgment;
    judgment.pair_id = {d.query.query_id, d.product.product_id};
    judgment.source = LlmSource{config_.judge_model, config_.variant};
    judgment.label = parse_enum<RelevanceLabel>(result.value.at("label").get<std::string>());
    judgment.reasoning = result.value.at("reasoning").get<std::string>();
    judgment.usage = result.usage;
    judgment.wall_time_ms = result.wall_time_ms;
    judgment.created_at = result.created_at;
    d.judgments.push_back(judgment);
    return judgment;
}

JudgmentRecord Pipeline::run_pair(const PairInput& input, PairDossier& d, std::string* stage) {
    auto enter = [&](std::string name) {
        if (stage) *stage = std::move(name);
    };
    enter("input");
    validate(input.query, config_.languages);
    const bool has_image = input.product.image_ref && !input.product.image_ref->empty();
    if (trim(input.product.description).empty() && !has_image) {
        throw InvalidInput("product '" + input.product.product_id + "' has neither a description nor an image");
    }
    d.query = input.query;
    d.product = input.product;

    enter(std::string(to_string(Step::query_analysis)));
    d.analysis = analyze_query(d.query);
    json stored_analysis = d.analysis;
    stored_analysis["query_id"] = "";
    d.analysis_digest = digest_of(stored_analysis);
    d.refs[std::string(to_string(Step::query_analysis))] = analysis_key(d.query).digest();

    enter(std::string(to_string(Step::guideline)));
    d.guideline = generate_guideline(d.analysis, d.query);
    json stored_guideline = d.guideline;
    if (d.guideline.kind == GuidelineKind::query_specific) stored_guideline["query_id"] = "";
    d.guideline_digest = digest_of(stored_guideline);
    d.refs[std::string(to_string(Step::guideline))] = guideline_key(d.analysis_digest, d.query).digest();

    if (config_.variant == Variant::mllm_text) {
        enter(std::string(to_string(Step::visual_description)));
        const LoadedImage image = assets_.load(d.product);
        d.visual_description = describe_image(d.product);
        d.visual_description_digest = digest_of(json{{"description", *d.visual_description}});
        d.refs[std::string(to_string(Step::visual_description))] = visual_key(image.sha256).digest();
    }

    enter(std::string(to_string(Step::judgment)));
    if (config_.variant == Variant::mllm_multi) d.image = assets_.load(d.product);
    const Judgment judgment = judge_pair(d);

    JudgmentRecord record;
    record.pair_id = judgment.pair_id;
    record.model_id = config_.judge_model;
    record.variant = config_.variant;
    record.guideline_mode = config_.guideline_mode;
    record.label = judgment.label;
    record.reasoning = judgment.reasoning.value_or("");
    record.usage = judgment.usage.value_or(TokenUsage{});
    record.analysis_digest = d.analysis_digest;
    record.guideline_digest = d.guideline_digest;
    record.visual_description_digest = d.visual_description_digest;
    record.refs = d.refs;
    record.wall_time_ms = judgment.wall_time_ms;
    record.created_at = judgment.created_at;
    return record;
}

BatchReport Pipeline::run_batch(const std::vector<PairInput>& pairs, const CancellationToken* cancel) {
    if (pairs.empty()) throw InvalidInput("batch is empty");
    {
        std::set<PairId> seen;
        for (const auto& p : pairs) {
            if (!seen.insert(p.pair_id()).second) throw InvalidInput("duplicate pair id " + to_string(p.pair_id()));
        }
    }

    const auto started = std::chrono::steady_clock::now();
    const std::size_t ledger_before = gateway_.ledger().size();
    const CacheStats stats_before = store_.stats();

    struct Outcome {
        std::optional<JudgmentRecord> record;
        std::optional<PairFailure> failure;
        std::optional<std::string> warning;
        std::exception_ptr fatal;
        bool done = false;  // worker exit marker
    };
    std::mutex channel_mutex;
    std::condition_variable channel_cv;
    std::deque<Outcome> channel;
    auto send = [&](Outcome outcome) {
        {
            std::lock_guard lock(channel_mutex);
            channel.push_back(std::move(outcome));
        }
        channel_cv.notify_one();
    };

    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    auto worker = [&] {
        for (;;) {
            if (abort || (cancel && cancel->cancelled())) break;
            const std::size_t index = next++;
            if (index >= pairs.size()) break;
            const PairInput& input = pairs[index];
            Outcome outcome;
            std::string stage = "input";
            try {
                PairDossier dossier;
                outcome.record = run_pair(input, dossier, &stage);
                if (outcome.record->reasoning.empty()) {
                    outcome.warning = "judgment for " + to_string(input.pair_id()) + " carries no reasoning";
                }
            } catch (const StoreCorruption&) {
                outcome.fatal = std::current_exception();
                abort = true;
            } catch (const Error& e) {
                outcome.failure = PairFailure{input.pair_id(), stage, e.kind(), e.what()};
            } catch (const std::exception& e) {
                outcome.failure = PairFailure{input.pair_id(), stage, "InternalError", e.what()};
            }
            send(std::move(outcome));
        }
        Outcome done;
        done.done = true;
        send(std::move(done));
    };

    const std::size_t worker_count = std::min<std::size_t>(config_.max_workers, pairs.size());
    std::vector<std::thread> workers;
    workers.reserve(worker_count);
    for (std::size_t i = 0; i < worker_count; ++i) workers.emplace_back(worker);

    // Single aggregator: only this thread touches the report.
    BatchReport report;
    std::exception_ptr fatal;
    for (std::size_t finished = 0; finished < worker_count;) {
        std::unique_lock lock(channel_mutex);
        channel_cv.wait(lock, [&] { return !channel.empty(); });
        Outcome outcome = std::move(channel.front());
        channel.pop_front();
        lock.unlock();
        if (outcome.done) {
            ++finished;
            continue;
        }
        if (outcome.fatal && !fatal) fatal = outcome.fatal;
        if (outcome.record) report.judgments.push_back(std::move(*outcome.record));
        if (outcome.failure) report.failures.push_back(std::move(*outcome.failure));
        if (outcome.warning) report.warnings.push_back(std::move(*outcome.warning));
    }
    for (auto& t : workers) t.join();
    if (fatal) std::rethrow_exception(fatal);

    std::sort(report.judgments.begin(), report.judgments.end(),
              [](const JudgmentRecord& a, const JudgmentRecord& b) { return a.pair_id < b.pair_id; });
    std::sort(report.failures.begin(), report.failures.end(),
              [](const PairFailure& a, const PairFailure& b) { return a.pair_id < b.pair_id; });
    std::sort(report.warnings.begin(), report.warnings.end());

    const auto entries = gateway_.ledger().entries();
    for (std::size_t i = ledger_before; i < entries.size(); ++i) {
        report.usage += entries[i].usage;
        report.cost += entries[i].cost;
    }
    report.backend_calls = entries.size() - ledger_before;
    const CacheStats stats_after = store_.stats();
    report.cache_stats = stats_after;
    report.cache_stats.hit_count = stats_after.hit_count - stats_before.hit_count;
    report.cache_stats.miss_count = stats_after.miss_count - stats_before.miss_count;
    report.wall_time_ms = elapsed_ms(started);
    report.cancelled = report.judgments.size() + report.failures.size() < pairs.size();
    return report;
}

BatchPlan Pipeline::plan(const std::vector<PairInput>& pairs) const {
    std::set<std::string> analyses;
    std::set<std::string> guidelines;
    std::set<std::string> visuals;
    std::set<std::string> judgments;
    for (const auto& input : pairs) {
        try {
            validate(input.query, config_.languages);
        } catch (const InvalidInput&) {
            continue;
        }
        const bool has_image = input.product.image_ref && !input.product.image_ref->empty();
        if (trim(input.product.description).empty() && !has_image) continue;

        PairDossier d;
        d.query = input.query;
        d.product = input.product;
        bool known = true;

        const CacheKey akey = analysis_key(input.query);
        const auto analysis = store_.get_by_digest(Step::query_analysis, akey.digest());
        if (analysis) {
            d.analysis_digest = digest_of(analysis->value);
        } else {
            analyses.insert(akey.digest());
            known = false;
        }

        if (config_.guideline_mode == GuidelineKind::generic) {
            json g = generic_guideline();
            d.guideline_digest = digest_of(g);
        } else if (known) {
            const CacheKey gkey = guideline_key(d.analysis_digest, input.query);
            if (const auto g = store_.get_by_digest(Step::guideline, gkey.digest())) {
                d.guideline_digest = digest_of(g->value);
            } else {
                guidelines.insert(gkey.digest());
                known = false;
            }
        } else {
            guidelines.insert("after-analysis:" + akey.digest());
        }

        if (config_.variant != Variant::llm_text) {
            try {
                d.image = assets_.load(input.product);
            } catch (const Error&) {
                continue;  // the pair fails before its judgment
            }
        }
        if (config_.variant == Variant::mllm_text) {
            const CacheKey vkey = visual_key(d.image->sha256);
            if (const auto v = store_.get_by_digest(Step::visual_description, vkey.digest())) {
                d.visual_description_digest = digest_of(v->value);
            } else {
                visuals.insert(vkey.digest());
                known = false;
            }
        }

        if (known) {
            const CacheKey jkey = judgment_key(d);
            if (!store_.contains(jkey)) judgments.insert(jkey.digest());
        } else {
            judgments.insert("pair:" + to_string(input.pair_id()));
        }
    }
    return BatchPlan{analyses.size(), guidelines.size(), visuals.size(), judgments.size()};
}

}  // namespace relassess
