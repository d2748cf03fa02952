// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <sstream>
#include <thread>

#include "relassess/digest.hpp"
#include "relassess/gateway.hpp"

namespace relassess {

namespace {

constexpr std::uint64_t kImageTokenEstimate = 85;

std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> words;
    std::istringstream in{std::string(text)};
    for (std::string w; in >> w;) words.push_back(w);
    return words;
}

std::string slot_or(const ChatRequest& request, const std::string& name, std::string fallback) {
    auto it = request.slots.find(name);
    return it == request.slots.end() ? std::move(fallback) : it->second;
}

json derive_query_analysis(const ChatRequest& request, const std::string& tag) {
    const std::string query = slot_or(request, "query_text", request.user_text());
    auto words = split_words(query);
    if (words.empty()) words.push_back("item");
    if (words.size() > 6) words.resize(6);
    json requirements = json::array();
    for (std::size_t i = 0; i < words.size(); ++i) {
        const bool soft = words.size() > 1 && i + 1 == words.size();
        requirements.push_back({{"name", "aspect " + std::to_string(i + 1)},
                                {"value", words[i]},
                                {"importance", soft ? "approximate_is_okay" : "must_have"},
                                {"reason", "the query mentions '" + words[i] + "'"}});
    }
    const std::size_t n = split_words(query).size();
    const char* specificity = n <= 1 ? "broad" : (n <= 3 ? "specific" : "exact_product");
    return json{{"translated_query", query},
                {"specificity", specificity},
                {"requirements", requirements},
                {"reasoning", "stub analysis " + tag + ": one requirement per query term"}};
}

json derive_guideline_set(const ChatRequest& request, const std::string& tag) {
    const std::string query = slot_or(request, "translated_query", "the query");
    const std::string must = slot_or(request, "must_have_requirements", "all stated requirements");
    return json{{"criteria",
                 {{"highly_relevant", "The product satisfies every requirement of '" + query + "', in particular: " + must + "."},
                  {"acceptable_substitute", "The product misses a soft requirement of '" + query +
                                                "' but can serve as a functional substitute."},
                  {"irrelevant", "The product violates a must-have requirement (" + must + ") [" + tag + "]."}}}};
}

json derive_visual_description(const ChatRequest& request, const std::string& tag) {
    std::size_t image_bytes = 0;
    for (const auto& part : request.user_content) {
        if (const auto* image = std::get_if<ImagePart>(&part)) image_bytes += image->bytes.size();
    }
    return json{{"description", "Packshot " + tag + ": a single product photographed on a plain background (" +
                                    std::to_string(image_bytes) + " image bytes)."}};
}

json derive_judgment(const std::string& tag, std::uint64_t hash) {
    const auto label = static_cast<RelevanceLabel>(hash % 3);
    return json{{"label", to_string(label)},
                {"reasoning", "Stub reasoning " + tag + ": compared the product against the requirement list and guideline."}};
}

}  // namespace

std::vector<StubBackend::Fixture> StubBackend::load_fixtures(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read stub fixtures file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("stub fixtures file '" + path + "' is not valid JSON: " + e.what());
    }
    std::vector<Fixture> fixtures;
    for (const auto& item : doc.value("fixtures", json::array())) {
        Fixture f;
        f.request_digest = item.value("request_digest", "");
        f.schema = item.value("schema", "");
        f.match = item.value("match", "");
        const auto& response = item.at("response");
        f.raw_text = response.is_string() ? response.get<std::string>() : response.dump(2);
        if (f.request_digest.empty() && f.schema.empty()) {
            throw ConfigError("stub fixture needs 'request_digest' or 'schema' in '" + path + "'");
        }
        fixtures.push_back(std::move(f));
    }
    return fixtures;
}

std::string StubBackend::respond(const ChatRequest& request) const {
    const std::string digest = request.digest();
    for (const auto& f : fixtures_) {
        if (!f.request_digest.empty() && f.request_digest == digest) return f.raw_text;
    }
    const std::string text = request.user_text();
    for (const auto& f : fixtures_) {
        if (f.request_digest.empty() && f.schema == request.response_schema_id &&
            text.find(f.match) != std::string::npos) {
            return f.raw_text;
        }
    }

    const std::uint64_t hash = std::stoull(digest.substr(0, 16), nullptr, 16);
    const std::string tag = digest.substr(0, 12);
    json body;
    const auto& schema = request.response_schema_id;
    if (schema == kSchemaQueryAnalysis) {
        body = derive_query_analysis(request, tag);
    } else if (schema == kSchemaGuidelineSet) {
        body = derive_guideline_set(request, tag);
    } else if (schema == kSchemaVisualDescription) {
        body = derive_visual_description(request, tag);
    } else if (schema == kSchemaJudgment) {
        body = derive_judgment(tag, hash);
    } else {
        return "stub: no schema";
    }
    return "Here is my answer.\n```json\n" + body.dump(2) + "\n```\n";
}

ChatResponse StubBackend::send(const ChatRequest& request, const ModelConfig& /*config*/) {
    ++attempts_;
    const std::uint32_t now_in_flight = ++in_flight_;
    for (std::uint32_t seen = max_in_flight_.load(); now_in_flight > seen &&
                                                     !max_in_flight_.compare_exchange_weak(seen, now_in_flight);) {
    }
    struct Leave {
        std::atomic<std::uint32_t>& counter;
        ~Leave() { --counter; }
    } leave{in_flight_};

    if (latency_.count() > 0) std::this_thread::sleep_for(latency_);
    for (std::uint32_t pending = pending_failures_.load(); pending > 0;) {
        if (pending_failures_.compare_exchange_weak(pending, pending - 1)) {
            throw TransientBackendError("stub: injected transient failure");
        }
    }

    ChatResponse response;
    response.raw_text = respond(request);
    response.usage.input_tokens = estimate_tokens(request.system_prompt.size() + request.user_text().size()) +
                                  kImageTokenEstimate * request.image_count();
    response.usage.output_tokens = estimate_tokens(response.raw_text.size());
    response.latency_ms = static_cast<std::uint64_t>(latency_.count());
    response.backend_id = id();

    ++successes_;
    if (request.image_count() > 0) ++image_requests_;
    {
        std::lock_guard lock(schema_mutex_);
        ++per_schema_[request.response_schema_id];
    }
    if (on_success_) on_success_(request);
    return response;
}

std::map<std::string, std::uint64_t> StubBackend::calls_per_schema() const {
    std::lock_guard lock(schema_mutex_);
    return per_schema_;
}

void StubBackend::reset_counters() {
    attempts_ = 0;
    successes_ = 0;
    image_requests_ = 0;
    max_in_flight_ = 0;
    std::lock_guard lock(schema_mutex_);
    per_schema_.clear();
}

}  // namespace relassess
