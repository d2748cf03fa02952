// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

#include "relassess/gateway.hpp"

#include <algorithm>
#include <random>
#include <thread>

#include "relassess/digest.hpp"

namespace relassess {

namespace {

Decimal decimal_from_json(const json& value, const std::string& field) {
    if (value.is_string()) return Decimal::parse(value.get<std::string>());
    if (value.is_number()) return Decimal::parse(value.dump());
    throw InvalidInput("field '" + field + "' must be a decimal number or string");
}

template <typename T>
T number_or(const json& j, const char* field, T fallback) {
    auto it = j.find(field);
    if (it == j.end() || it->is_null()) return fallback;
    if (!it->is_number_integer() || it->get<long long>() < 0) {
        throw ConfigError(std::string("field '") + field + "' must be a non-negative integer");
    }
    return it->get<T>();
}

}  // namespace

void validate(const ModelConfig& config) {
    if (config.model_id.empty()) throw ConfigError("model config without model_id");
    if (config.backend != "stub" && config.backend != "http") {
        throw ConfigError("model '" + config.model_id + "': unknown backend '" + config.backend + "'");
    }
    if (config.backend == "http" && config.endpoint.empty()) {
        throw ConfigError("model '" + config.model_id + "': http backend requires an endpoint");
    }
    if (config.max_parallel_requests < 1) throw ConfigError("model '" + config.model_id + "': max_parallel_requests must be >= 1");
    if (config.price.input_per_1k.is_negative() || config.price.output_per_1k.is_negative()) {
        throw ConfigError("model '" + config.model_id + "': prices must be non-negative");
    }
    if (config.batch_price_multiplier <= Decimal(0) || config.batch_price_multiplier > Decimal(1)) {
        throw ConfigError("model '" + config.model_id + "': batch_price_multiplier must be in (0, 1]");
    }
}

ModelConfig model_config_from_json(const json& j) {
    ModelConfig c;
    try {
        c.model_id = require_string(j, "model_id");
        c.backend = optional_string(j, "backend", "stub");
        c.endpoint = optional_string(j, "endpoint");
        c.api_key_env = optional_string(j, "api_key_env");
        c.max_parallel_requests = number_or<std::uint32_t>(j, "max_parallel_requests", c.max_parallel_requests);
        c.request_timeout_ms = number_or<std::uint32_t>(j, "request_timeout_ms", c.request_timeout_ms);
        c.max_retries = number_or<std::uint32_t>(j, "max_retries", c.max_retries);
        c.retry_base_delay_ms = number_or<std::uint32_t>(j, "retry_base_delay_ms", c.retry_base_delay_ms);
        c.supports_image_input = j.value("supports_image_input", false);
        if (auto it = j.find("price"); it != j.end()) {
            c.price.input_per_1k = decimal_from_json(require_field(*it, "input_per_1k"), "input_per_1k");
            c.price.output_per_1k = decimal_from_json(require_field(*it, "output_per_1k"), "output_per_1k");
        }
        c.batch_mode = j.value("batch_mode", false);
        if (auto it = j.find("batch_price_multiplier"); it != j.end()) {
            c.batch_price_multiplier = decimal_from_json(*it, "batch_price_multiplier");
        }
        c.fixtures_path = optional_string(j, "fixtures");
    } catch (const InvalidInput& e) {
        throw ConfigError(std::string("model config: ") + e.what());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("model config: ") + e.what());
    }
    validate(c);
    return c;
}

json to_json(const ModelConfig& c) {
    json j{{"model_id", c.model_id},
           {"backend", c.backend},
           {"endpoint", c.endpoint},
           {"api_key_env", c.api_key_env},
           {"max_parallel_requests", c.max_parallel_requests},
           {"request_timeout_ms", c.request_timeout_ms},
           {"max_retries", c.max_retries},
           {"retry_base_delay_ms", c.retry_base_delay_ms},
           {"supports_image_input", c.supports_image_input},
           {"price", {{"input_per_1k", c.price.input_per_1k.to_string()}, {"output_per_1k", c.price.output_per_1k.to_string()}}},
           {"batch_mode", c.batch_mode},
           {"batch_price_multiplier", c.batch_price_multiplier.to_string()}};
    if (!c.fixtures_path.empty()) j["fixtures"] = c.fixtures_path;
    return j;
}

std::size_t ChatRequest::image_count() const {
    return static_cast<std::size_t>(std::count_if(user_content.begin(), user_content.end(),
                                                   [](const ContentPart& p) { return std::holds_alternative<ImagePart>(p); }));
}

std::string ChatRequest::user_text() const {
    std::string out;
    for (const auto& part : user_content) {
        if (const auto* text = std::get_if<TextPart>(&part)) {
            if (!out.empty()) out += '\n';
            out += text->text;
        }
    }
    return out;
}

std::string ChatRequest::canonical_bytes() const {
    json parts = json::array();
    for (const auto& part : user_content) {
        if (const auto* text = std::get_if<TextPart>(&part)) {
            parts.push_back({{"text", text->text}});
        } else {
            const auto& image = std::get<ImagePart>(part);
            parts.push_back({{"image_sha256", sha256_hex(image.bytes)}, {"media_type", image.media_type}});
        }
    }
    return canonical_dump(json{{"system", system_prompt},
                               {"parts", parts},
                               {"schema", response_schema_id},
                               {"temperature", temperature.to_string()}});
}

std::string ChatRequest::digest() const { return sha256_hex(canonical_bytes()); }

Decimal estimate_cost(const TokenUsage& usage, const ModelConfig& config) {
    const Decimal thousand(1000);
    Decimal cost = Decimal(static_cast<std::int64_t>(usage.input_tokens)) / thousand * config.price.input_per_1k +
                   Decimal(static_cast<std::int64_t>(usage.output_tokens)) / thousand * config.price.output_per_1k;
    if (config.batch_mode) cost = cost * config.batch_price_multiplier;
    return cost;
}

void CostLedger::record(const std::string& model_id, const TokenUsage& usage, const Decimal& cost) {
    const auto now = std::chrono::steady_clock::now();
    std::lock_guard lock(mutex_);
    entries_.push_back({model_id, usage, cost});
    grand_total_ += cost;
    per_model_[model_id] += cost;
    if (!first_) first_ = now;
    last_ = now;
}

std::vector<CostRecord> CostLedger::entries() const {
    std::lock_guard lock(mutex_);
    return entries_;
}

std::size_t CostLedger::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

Decimal CostLedger::grand_total() const {
    std::lock_guard lock(mutex_);
    return grand_total_;
}

std::map<std::string, Decimal> CostLedger::totals_per_model() const {
    std::lock_guard lock(mutex_);
    return per_model_;
}

TokenUsage CostLedger::total_usage() const {
    std::lock_guard lock(mutex_);
    TokenUsage total;
    for (const auto& e : entries_) total += e.usage;
    return total;
}

std::uint64_t CostLedger::wall_clock_span_ms() const {
    std::lock_guard lock(mutex_);
    if (!first_) return 0;
    return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(last_ - *first_).count());
}

std::shared_ptr<Backend> make_backend(const ModelConfig& config) {
    if (config.backend == "http") return std::make_shared<HttpBackend>();
    std::vector<StubBackend::Fixture> fixtures;
    if (!config.fixtures_path.empty()) fixtures = StubBackend::load_fixtures(config.fixtures_path);
    return std::make_shared<StubBackend>(std::move(fixtures));
}

void Gateway::Limiter::acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [this] { return available_ > 0; });
    --available_;
}

void Gateway::Limiter::release() {
    {
        std::lock_guard lock(mutex_);
        ++available_;
    }
    cv_.notify_one();
}

Gateway::Gateway() : ledger_(std::make_unique<CostLedger>()) {}

void Gateway::add_model(const ModelConfig& config, std::shared_ptr<Backend> backend) {
    validate(config);
    std::lock_guard lock(mutex_);
    Entry entry{config, std::move(backend), std::make_unique<Limiter>(config.max_parallel_requests)};
    models_.insert_or_assign(config.model_id, std::move(entry));
}

bool Gateway::has_model(const std::string& model_id) const {
    std::lock_guard lock(mutex_);
    return models_.contains(model_id);
}

const ModelConfig& Gateway::model(const std::string& model_id) const {
    std::lock_guard lock(mutex_);
    auto it = models_.find(model_id);
    if (it == models_.end()) throw ConfigError("unknown model '" + model_id + "'");
    return it->second.config;
}

Gateway::Entry& Gateway::entry_for(const std::string& model_id) {
    std::lock_guard lock(mutex_);
    auto it = models_.find(model_id);
    if (it == models_.end()) throw ConfigError("unknown model '" + model_id + "'");
    return it->second;
}

ChatResponse Gateway::complete(const ChatRequest& request, const ModelConfig& config) {
    if (request.user_content.empty()) throw InvalidInput("chat request without user content");
    if (request.image_count() > 0 && !config.supports_image_input) {
        throw CapabilityError("model '" + config.model_id + "' does not accept image input");
    }
    Entry& entry = entry_for(config.model_id);

    thread_local std::mt19937_64 jitter_rng{std::random_device{}()};
    const std::uint32_t attempts = config.max_retries + 1;
    std::string last_error;
    for (std::uint32_t attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            // Full jitter: uniform in [0, base * 2^(attempt-1)], capped at 30 s.
            const std::uint64_t ceiling = std::min<std::uint64_t>(
                30'000, static_cast<std::uint64_t>(config.retry_base_delay_ms) << std::min<std::uint32_t>(attempt - 1, 16));
            std::uniform_int_distribution<std::uint64_t> dist(0, ceiling);
            std::this_thread::sleep_for(std::chrono::milliseconds(dist(jitter_rng)));
        }
        entry.limiter->acquire();
        try {
            const auto started = std::chrono::steady_clock::now();
            ChatResponse response = entry.backend->send(request, config);
            entry.limiter->release();
            if (response.latency_ms == 0) {
                response.latency_ms = static_cast<std::uint64_t>(
                    std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count());
            }
            ledger_->record(config.model_id, response.usage, estimate_cost(response.usage, config));
            return response;
        } catch (const TransientBackendError& e) {
            entry.limiter->release();
            last_error = e.what();
        } catch (...) {
            entry.limiter->release();
            throw;
        }
    }
    throw BackendUnavailable("model '" + config.model_id + "' unavailable after " + std::to_string(attempts) +
                             " attempts: " + last_error);
}

StructuredResult Gateway::complete_structured(ChatRequest request, const std::string& model_id) {
    const ModelConfig& config = model(model_id);
    StructuredResult result;
    result.response = complete(request, config);
    result.usage = result.response.usage;
    result.calls = 1;
    try {
        result.value = parse_structured(result.response.raw_text, request.response_schema_id);
        return result;
    } catch (const SchemaViolation&) {
        request.user_content.emplace_back(TextPart{std::string(kRepairInstruction)});
    }
    result.response = complete(request, config);
    result.usage += result.response.usage;
    result.calls = 2;
    result.value = parse_structured(result.response.raw_text, request.response_schema_id);
    return result;
}

}  // namespace relassess
