// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "relassess/model.hpp"
#include "relassess/numeric.hpp"
#include "relassess/serialization.hpp"

namespace relassess {

struct Price {
    Decimal input_per_1k;
    Decimal output_per_1k;
};

struct ModelConfig {
    std::string model_id;
    std::string backend = "stub";  // "stub" or "http"
    std::string endpoint;          // chat-completions URI for "http"
    std::string api_key_env;       // name of the env var holding the key, never the key
    std::uint32_t max_parallel_requests = 4;
    std::uint32_t request_timeout_ms = 60'000;
    std::uint32_t max_retries = 3;
    std::uint32_t retry_base_delay_ms = 500;
    bool supports_image_input = false;
    Price price;
    bool batch_mode = false;
    Decimal batch_price_multiplier = Decimal::ratio(1, 2);
    std::string fixtures_path;  // stub backend canned responses
};

void validate(const ModelConfig& config);
ModelConfig model_config_from_json(const json& j);
json to_json(const ModelConfig& config);

struct TextPart {
    std::string text;
};

struct ImagePart {
    std::vector<std::uint8_t> bytes;
    std::string media_type;  // e.g. "image/png"
};

using ContentPart = std::variant<TextPart, ImagePart>;

struct ChatRequest {
    std::string system_prompt;
    std::vector<ContentPart> user_content;
    std::string response_schema_id;
    Decimal temperature{0};
    // Slot values the prompts were rendered from. Not sent over the wire;
    // the stub backend uses them to synthesize plausible outputs.
    std::map<std::string, std::string> slots;

    [[nodiscard]] std::size_t image_count() const;
    // All text parts joined with newlines.
    [[nodiscard]] std::string user_text() const;
    // Canonical serialization (image parts represented by content digest).
    [[nodiscard]] std::string canonical_bytes() const;
    [[nodiscard]] std::string digest() const;
};

struct ChatResponse {
    std::string raw_text;
    TokenUsage usage;
    std::uint64_t latency_ms = 0;
    std::string backend_id;
};

// Cost of one call; exact decimal arithmetic.
Decimal estimate_cost(const TokenUsage& usage, const ModelConfig& config);

struct CostRecord {
    std::string model_id;
    TokenUsage usage;
    Decimal cost;
};

class CostLedger {
  public:
    void record(const std::string& model_id, const TokenUsage& usage, const Decimal& cost);

    [[nodiscard]] std::vector<CostRecord> entries() const;
    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] Decimal grand_total() const;
    [[nodiscard]] std::map<std::string, Decimal> totals_per_model() const;
    [[nodiscard]] TokenUsage total_usage() const;
    // Milliseconds between the first and the last recorded call.
    [[nodiscard]] std::uint64_t wall_clock_span_ms() const;

  private:
    mutable std::mutex mutex_;
    std::vector<CostRecord> entries_;
    Decimal grand_total_;
    std::map<std::string, Decimal> per_model_;
    std::optional<std::chrono::steady_clock::time_point> first_;
    std::chrono::steady_clock::time_point last_{};
};

class Backend {
  public:
    virtual ~Backend() = default;
    // Throws TransientBackendError for retryable failures, AuthError for
    // credential problems, BackendUnavailable for permanent ones.
    virtual ChatResponse send(const ChatRequest& request, const ModelConfig& config) = 0;
    [[nodiscard]] virtual std::string id() const = 0;
};

// Deterministic in-process backend. Responses are canned fixtures when one
// matches, otherwise a schema-valid instance derived from the request digest.
class StubBackend : public Backend {
  public:
    struct Fixture {
        std::string request_digest;  // exact match on ChatRequest::digest()
        std::string schema;          // or: schema id plus...
        std::string match;           // ...substring of the user text
        std::string raw_text;
    };

    StubBackend() = default;
    explicit StubBackend(std::vector<Fixture> fixtures) : fixtures_(std::move(fixtures)) {}
    // Fixtures file: {"fixtures": [{"request_digest"|("schema","match"), "response"}]}.
    static std::vector<Fixture> load_fixtures(const std::string& path);

    ChatResponse send(const ChatRequest& request, const ModelConfig& config) override;
    [[nodiscard]] std::string id() const override { return "stub"; }

    // Pure function used by send(); exposed for tests.
    [[nodiscard]] std::string respond(const ChatRequest& request) const;
    static std::uint64_t estimate_tokens(std::size_t bytes) { return (bytes + 3) / 4; }

    // Instrumentation.
    void fail_next(std::uint32_t count) { pending_failures_ = count; }
    void set_latency(std::chrono::milliseconds latency) { latency_ = latency; }
    // Called after every successful response (before returning it).
    void set_on_success(std::function<void(const ChatRequest&)> hook) { on_success_ = std::move(hook); }

    [[nodiscard]] std::uint64_t attempts() const { return attempts_; }
    [[nodiscard]] std::uint64_t successful_calls() const { return successes_; }
    [[nodiscard]] std::uint64_t image_requests() const { return image_requests_; }
    [[nodiscard]] std::uint32_t max_in_flight() const { return max_in_flight_; }
    [[nodiscard]] std::map<std::string, std::uint64_t> calls_per_schema() const;
    void reset_counters();

  private:
    std::vector<Fixture> fixtures_;
    std::atomic<std::uint32_t> pending_failures_{0};
    std::chrono::milliseconds latency_{0};
    std::function<void(const ChatRequest&)> on_success_;

    std::atomic<std::uint64_t> attempts_{0};
    std::atomic<std::uint64_t> successes_{0};
    std::atomic<std::uint64_t> image_requests_{0};
    std::atomic<std::uint32_t> in_flight_{0};
    std::atomic<std::uint32_t> max_in_flight_{0};
    mutable std::mutex schema_mutex_;
    std::map<std::string, std::uint64_t> per_schema_;
};

// Chat-completions style HTTP backend: role-tagged messages, image parts as
// base64 data URIs, bearer token from the configured env var.
class HttpBackend : public Backend {
  public:
    ChatResponse send(const ChatRequest& request, const ModelConfig& config) override;
    [[nodiscard]] std::string id() const override { return "http"; }

    static json build_payload(const ChatRequest& request, const ModelConfig& config);
};

std::shared_ptr<Backend> make_backend(const ModelConfig& config);

struct StructuredResult {
    json value;
    ChatResponse response;  // the response that parsed
    TokenUsage usage;       // summed over the attempt and the repair attempt
    std::uint32_t calls = 0;
};

// Shared entry point for all model calls. Rate limits per model, retries
// transient failures with exponential backoff and full jitter, and records
// every successful call in the cost ledger.
class Gateway {
  public:
    Gateway();

    void add_model(const ModelConfig& config, std::shared_ptr<Backend> backend);
    [[nodiscard]] const ModelConfig& model(const std::string& model_id) const;
    [[nodiscard]] bool has_model(const std::string& model_id) const;

    ChatResponse complete(const ChatRequest& request, const ModelConfig& config);
    ChatResponse complete(const ChatRequest& request, const std::string& model_id) {
        return complete(request, model(model_id));
    }

    // complete() + parse_structured(); on SchemaViolation re-prompts once with
    // an instruction to answer with the object only, then rethrows.
    StructuredResult complete_structured(ChatRequest request, const std::string& model_id);

    CostLedger& ledger() { return *ledger_; }
    [[nodiscard]] const CostLedger& ledger() const { return *ledger_; }

  private:
    class Limiter {
      public:
        explicit Limiter(std::uint32_t capacity) : available_(capacity) {}
        void acquire();
        void release();

      private:
        std::mutex mutex_;
        std::condition_variable cv_;
        std::uint32_t available_;
    };

    struct Entry {
        ModelConfig config;
        std::shared_ptr<Backend> backend;
        std::unique_ptr<Limiter> limiter;
    };

    Entry& entry_for(const std::string& model_id);

    mutable std::mutex mutex_;
    std::map<std::string, Entry> models_;
    std::unique_ptr<CostLedger> ledger_;
};

inline constexpr std::string_view kRepairInstruction =
    "Your previous answer could not be parsed. Respond only with the JSON object, nothing else.";

// Registered schema ids.
inline constexpr std::string_view kSchemaQueryAnalysis = "query_analysis";
inline constexpr std::string_view kSchemaGuidelineSet = "guideline_set";
inline constexpr std::string_view kSchemaVisualDescription = "visual_description";
inline constexpr std::string_view kSchemaJudgment = "judgment";

// Extracts the first JSON object in `raw_text` that conforms to the schema
// (prose and code fences around it are skipped). Returns the normalized
// object with unknown fields dropped. Throws SchemaViolation otherwise.
json parse_structured(std::string_view raw_text, std::string_view response_schema_id);

}  // namespace relassess
