// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "relassess/analysis.hpp"
#include "relassess/cache_store.hpp"
#include "relassess/dataset.hpp"
#include "relassess/gateway.hpp"
#include "relassess/pipeline.hpp"

namespace relassess {

struct ServerConfig {
    std::string bind = "127.0.0.1";
    int port = 8080;
    std::filesystem::path static_dir;  // optional
    std::string cors_origin = "*";
};

struct AppConfig {
    std::vector<ModelConfig> models;
    std::filesystem::path store_root;
    std::filesystem::path prompts_dir;
    std::filesystem::path asset_root;
    std::vector<std::string> languages = {"en", "de"};
    ServerConfig server;
    std::uint64_t seed = 0;
    std::string analysis_model;
    std::string vision_model;
    std::string judge_model;
    std::uint32_t max_workers = 4;
    StrataConfig strata;
};

// Relative paths are resolved against the config file's directory. The store
// root is created when missing; every other referenced path must exist.
// Throws ConfigError.
AppConfig load_app_config(const std::filesystem::path& path);
AppConfig parse_app_config(const json& doc, const std::filesystem::path& base_dir);

// Registers every configured model with its backend.
void register_models(Gateway& gateway, const AppConfig& config);

// Appends one line and fsyncs before returning. A torn final line left by an
// earlier crash is dropped first.
void append_line_durable(const std::filesystem::path& path, const std::string& line);

// Reads an adjudications file written by append_line_durable. A torn final
// line (no trailing newline, not parseable) is skipped and reported through
// `torn_tail`.
std::vector<Adjudication> load_adjudications_log(const std::filesystem::path& path, bool* torn_tail = nullptr);

struct ServiceData {
    std::vector<PairInput> pairs;
    std::vector<JudgmentRecord> judgments;
    std::vector<AnnotationSet> annotations;
    std::filesystem::path adjudications_path;
    std::string candidate_source;  // required when judgments mix sources
};

struct HttpResult {
    int status = 200;
    json body;
};

// Adjudication queue over the hard disagreements between one candidate
// source and the human majority. All handlers are safe to call concurrently;
// appends go through a single writer.
class AdjudicationService {
  public:
    // `store` may be null; dossiers then omit the analysis and guideline.
    AdjudicationService(std::shared_ptr<CacheStore> store, AssetResolver assets);
    ~AdjudicationService();

    AdjudicationService(const AdjudicationService&) = delete;
    AdjudicationService& operator=(const AdjudicationService&) = delete;

    // Builds the hard-disagreement set and replays the adjudications file.
    void load(ServiceData data);
    [[nodiscard]] bool loaded() const;

    HttpResult queue(std::optional<std::string> limit_param) const;
    HttpResult submit(const std::string& body);
    HttpResult stats() const;

    struct Image {
        std::string bytes;
        std::string media_type;
        std::string redirect;  // remote refs are redirected, not proxied
    };
    [[nodiscard]] std::optional<Image> image(const std::string& product_id) const;

    // Binds and serves in a background thread; returns the bound port.
    int start(const ServerConfig& config);
    // Serves on the calling thread until stop().
    void listen(const ServerConfig& config);
    void stop();

    [[nodiscard]] std::vector<PairId> hard_disagreements() const;

  private:
    struct State;
    struct Server;

    json dossier_json(const PairId& id) const;
    json stats_json_locked() const;

    std::shared_ptr<CacheStore> store_;
    AssetResolver assets_;
    mutable std::mutex mutex_;
    std::unique_ptr<State> state_;
    std::mutex writer_mutex_;
    std::unique_ptr<Server> server_;
};

}  // namespace relassess
