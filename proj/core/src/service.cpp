// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

#include "relassess/service.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <httplib.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

namespace relassess {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const std::string& value) {
    if (value.empty()) return {};
    const fs::path p(value);
    return p.is_absolute() ? p : (base / p).lexically_normal();
}

void require_dir(const fs::path& path, const char* what) {
    std::error_code ec;
    if (path.empty()) throw ConfigError(std::string(what) + " is not configured");
    if (!fs::is_directory(path, ec)) throw ConfigError(std::string(what) + " '" + path.string() + "' does not exist");
}

HttpResult error_result(int status, const std::string& kind, const std::string& message) {
    return {status, json{{"error", {{"kind", kind}, {"message", message}}}}};
}

}  // namespace

AppConfig parse_app_config(const json& doc, const fs::path& base_dir) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    AppConfig config;
    try {
        for (const auto& m : doc.value("models", json::array())) {
            ModelConfig model = model_config_from_json(m);
            if (!model.fixtures_path.empty()) model.fixtures_path = resolve(base_dir, model.fixtures_path).string();
            config.models.push_back(std::move(model));
        }
        config.store_root = resolve(base_dir, doc.value("store_root", ""));
        config.prompts_dir = resolve(base_dir, doc.value("prompts_dir", ""));
        config.asset_root = resolve(base_dir, doc.value("asset_root", ""));
        if (doc.contains("languages")) config.languages = doc["languages"].get<std::vector<std::string>>();
        config.seed = doc.value("seed", std::uint64_t{0});
        if (auto it = doc.find("server"); it != doc.end()) {
            config.server.bind = it->value("bind", config.server.bind);
            config.server.port = it->value("port", config.server.port);
            config.server.static_dir = resolve(base_dir, it->value("static_dir", ""));
            config.server.cors_origin = it->value("cors_origin", config.server.cors_origin);
        }
        if (auto it = doc.find("pipeline"); it != doc.end()) {
            config.analysis_model = it->value("analysis_model", "");
            config.vision_model = it->value("vision_model", "");
            config.judge_model = it->value("judge_model", "");
            config.max_workers = it->value("max_workers", config.max_workers);
        }
        if (auto it = doc.find("strata"); it != doc.end()) {
            config.strata.head_share = it->value("head_share", config.strata.head_share);
            config.strata.torso_share = it->value("torso_share", config.strata.torso_share);
            if (it->contains("token_length_bounds")) {
                config.strata.token_length_bounds = (*it)["token_length_bounds"].get<std::vector<std::uint32_t>>();
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    if (config.models.empty()) throw ConfigError("config declares no models");
    std::set<std::string> ids;
    for (const auto& m : config.models) {
        validate(m);
        if (!ids.insert(m.model_id).second) throw ConfigError("model '" + m.model_id + "' is declared twice");
    }
    if (config.languages.empty()) throw ConfigError("config needs at least one language");
    if (config.server.port < 1 || config.server.port > 65535) {
        throw ConfigError("server.port " + std::to_string(config.server.port) + " is outside 1-65535");
    }
    if (config.store_root.empty()) throw ConfigError("store_root is not configured");
    std::error_code ec;
    fs::create_directories(config.store_root, ec);
    if (ec) throw ConfigError("cannot create store_root '" + config.store_root.string() + "': " + ec.message());
    require_dir(config.prompts_dir, "prompts_dir");
    require_dir(config.asset_root, "asset_root");
    if (!config.server.static_dir.empty()) require_dir(config.server.static_dir, "server.static_dir");
    validate(config.strata);
    return config;
}

AppConfig load_app_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return parse_app_config(doc, fs::absolute(path).parent_path());
}

void register_models(Gateway& gateway, const AppConfig& config) {
    for (const auto& m : config.models) gateway.add_model(m, make_backend(m));
}

namespace {

// Cuts a final line that lacks its newline (a write torn by a crash) so the
// next append starts on a fresh line.
void drop_torn_tail(int fd, const fs::path& path) {
    struct stat st {};
    if (::fstat(fd, &st) != 0) throw IoError("cannot stat '" + path.string() + "'");
    off_t end = st.st_size;
    char last = '\n';
    if (end == 0 || ::pread(fd, &last, 1, end - 1) != 1 || last == '\n') return;
    char buf[4096];
    while (end > 0) {
        const off_t start = end > static_cast<off_t>(sizeof(buf)) ? end - static_cast<off_t>(sizeof(buf)) : 0;
        const ssize_t n = ::pread(fd, buf, static_cast<std::size_t>(end - start), start);
        if (n <= 0) throw IoError("cannot read '" + path.string() + "'");
        for (ssize_t i = n - 1; i >= 0; --i) {
            if (buf[i] == '\n') {
                end = start + i + 1;
                if (::ftruncate(fd, end) != 0) throw IoError("cannot truncate '" + path.string() + "'");
                return;
            }
        }
        end = start;
    }
    if (::ftruncate(fd, 0) != 0) throw IoError("cannot truncate '" + path.string() + "'");
}

}  // namespace

void append_line_durable(const fs::path& path, const std::string& line) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const bool existed = fs::exists(path);
    const int fd = ::open(path.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd < 0) throw IoError("cannot open '" + path.string() + "': " + std::strerror(errno));
    try {
        drop_torn_tail(fd, path);
    } catch (...) {
        ::close(fd);
        throw;
    }
    const std::string with_newline = line + "\n";
    std::string_view bytes = with_newline;
    while (!bytes.empty()) {
        const ssize_t n = ::write(fd, bytes.data(), bytes.size());
        if (n < 0) {
            if (errno == EINTR) continue;
            const std::string reason = std::strerror(errno);
            ::close(fd);
            throw IoError("append to '" + path.string() + "' failed: " + reason);
        }
        bytes.remove_prefix(static_cast<std::size_t>(n));
    }
    if (::fsync(fd) != 0) {
        ::close(fd);
        throw IoError("fsync of '" + path.string() + "' failed");
    }
    ::close(fd);
    if (!existed) {
        // A new file is only durable once its directory entry is.
        const auto dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
        const int dfd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
        if (dfd >= 0) {
            ::fsync(dfd);
            ::close(dfd);
        }
    }
}

std::vector<Adjudication> load_adjudications_log(const fs::path& path, bool* torn_tail) {
    if (torn_tail) *torn_tail = false;
    std::vector<Adjudication> out;
    std::error_code ec;
    if (!fs::exists(path, ec)) return out;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string content = buf.str();
    std::size_t pos = 0;
    for (std::size_t number = 1; pos < content.size(); ++number) {
        const auto end = content.find('\n', pos);
        const bool complete = end != std::string::npos;
        const std::string line = content.substr(pos, complete ? end - pos : std::string::npos);
        pos = complete ? end + 1 : content.size();
        if (trim(line).empty()) continue;
        const json doc = json::parse(line, nullptr, false);
        if (doc.is_discarded()) {
            if (!complete) {
                if (torn_tail) *torn_tail = true;
                break;
            }
            throw InvalidInput(path.string() + ":" + std::to_string(number) + ": not valid JSON");
        }
        try {
            Adjudication a = doc.get<Adjudication>();
            validate(a);
            out.push_back(std::move(a));
        } catch (const json::exception& e) {
            throw InvalidInput(path.string() + ":" + std::to_string(number) + ": " + e.what());
        } catch (const InvalidInput& e) {
            throw InvalidInput(path.string() + ":" + std::to_string(number) + ": " + e.what());
        }
    }
    return out;
}

struct AdjudicationService::State {
    std::map<PairId, PairInput> pairs;
    std::map<PairId, std::vector<JudgmentRecord>> judgments;
    std::map<PairId, AnnotationSet> annotations;
    std::map<std::string, const PairInput*> products;
    std::string candidate_source;
    std::set<PairId> hard;
    std::map<PairId, Adjudication> adjudicated;  // restricted to the hard set
    fs::path adjudications_path;
};

struct AdjudicationService::Server {
    httplib::Server http;
    std::thread thread;
};

AdjudicationService::AdjudicationService(std::shared_ptr<CacheStore> store, AssetResolver assets)
    : store_(std::move(store)), assets_(std::move(assets)) {}

AdjudicationService::~AdjudicationService() { stop(); }

void AdjudicationService::load(ServiceData data) {
    auto state = std::make_unique<State>();
    state->adjudications_path = data.adjudications_path;
    for (auto& p : data.pairs) state->pairs.emplace(p.pair_id(), std::move(p));
    for (const auto& [id, p] : state->pairs) state->products.emplace(p.product.product_id, &p);
    for (auto& a : data.annotations) state->annotations[a.pair_id] = std::move(a);

    std::set<std::string> sources;
    for (const auto& r : data.judgments) sources.insert(r.source());
    state->candidate_source = data.candidate_source;
    if (state->candidate_source.empty()) {
        if (sources.size() > 1) throw ConfigError("judgments mix several sources; choose one candidate source");
        if (!sources.empty()) state->candidate_source = *sources.begin();
    }
    LabeledSet candidate;
    for (auto& r : data.judgments) {
        if (r.source() == state->candidate_source) candidate[r.pair_id] = r.label;
        state->judgments[r.pair_id].push_back(std::move(r));
    }
    std::vector<AnnotationSet> annotations;
    annotations.reserve(state->annotations.size());
    for (const auto& [_, a] : state->annotations) annotations.push_back(a);
    for (const auto& id : find_hard_disagreements(candidate, annotations).pairs) state->hard.insert(id);

    // Replay and swap under the writer lock so no append lands in between.
    std::lock_guard writer(writer_mutex_);
    for (auto& a : load_adjudications_log(state->adjudications_path)) {
        if (state->hard.contains(a.pair_id)) state->adjudicated.emplace(a.pair_id, std::move(a));
    }
    std::lock_guard lock(mutex_);
    state_ = std::move(state);
}

bool AdjudicationService::loaded() const {
    std::lock_guard lock(mutex_);
    return state_ != nullptr;
}

std::vector<PairId> AdjudicationService::hard_disagreements() const {
    std::lock_guard lock(mutex_);
    if (!state_) return {};
    return {state_->hard.begin(), state_->hard.end()};
}

json AdjudicationService::dossier_json(const PairId& id) const {
    const State& s = *state_;
    json out{{"pair_id", id}};
    const PairInput* input = nullptr;
    if (auto it = s.pairs.find(id); it != s.pairs.end()) input = &it->second;
    out["query"] = input ? json(input->query) : json(nullptr);
    out["product"] = input ? json(input->product) : json(nullptr);
    out["image_url"] = input && input->product.image_ref ? json("/api/images/" + input->product.product_id) : json(nullptr);

    json analysis = nullptr;
    json guideline = nullptr;
    json visual = nullptr;
    json judgments = json::array();
    json llm = nullptr;
    if (auto it = s.judgments.find(id); it != s.judgments.end()) {
        for (const auto& r : it->second) {
            json j = r;
            judgments.push_back(j);
            if (r.source() != s.candidate_source) continue;
            llm = json{{"source", r.source()}, {"label", to_string(r.label)}, {"reasoning", r.reasoning}};
            if (!store_) continue;
            auto lookup = [&](Step step) -> json {
                auto ref = r.refs.find(std::string(to_string(step)));
                if (ref == r.refs.end()) return nullptr;
                auto entry = store_->get_by_digest(step, ref->second);
                return entry ? entry->value : json(nullptr);
            };
            analysis = lookup(Step::query_analysis);
            guideline = lookup(Step::guideline);
            if (const json v = lookup(Step::visual_description); v.is_object()) visual = v.value("description", "");
        }
    }
    if (analysis.is_object() && input) analysis["query_id"] = input->query.query_id;
    out["analysis"] = analysis;
    out["guideline"] = guideline;
    out["visual_description"] = visual;
    out["llm"] = llm;
    out["judgments"] = judgments;

    json human = nullptr;
    if (auto it = s.annotations.find(id); it != s.annotations.end()) {
        const auto& a = it->second;
        auto label = [](const std::optional<RelevanceLabel>& l) { return l ? json(to_string(*l)) : json(nullptr); };
        human = json{{"a1", label(a.a1)}, {"a2", label(a.a2)}, {"tiebreaker", label(a.tiebreaker)},
                     {"majority", label(try_majority(a))}};
    }
    out["human"] = human;
    return out;
}

HttpResult AdjudicationService::queue(std::optional<std::string> limit_param) const {
    std::size_t limit = std::numeric_limits<std::size_t>::max();
    if (limit_param) {
        const std::string& text = *limit_param;
        if (text.empty() || text.size() > 9 || text.find_first_not_of("0123456789") != std::string::npos) {
            return error_result(400, "InvalidInput", "limit must be a non-negative integer");
        }
        limit = std::stoul(text);
    }
    std::lock_guard lock(mutex_);
    if (!state_) return error_result(503, "NotReady", "data is still loading");
    json items = json::array();
    for (const auto& id : state_->hard) {  // std::set order: query_id, then product_id
        if (items.size() >= limit) break;
        if (state_->adjudicated.contains(id)) continue;
        items.push_back(dossier_json(id));
    }
    return {200, json{{"items", items}, {"queue_remaining", state_->hard.size() - state_->adjudicated.size()}}};
}

json AdjudicationService::stats_json_locked() const {
    const State& s = *state_;
    std::vector<Adjudication> list;
    list.reserve(s.adjudicated.size());
    for (const auto& [_, a] : s.adjudicated) list.push_back(a);
    json out{{"queue_remaining", s.hard.size() - s.adjudicated.size()},
             {"adjudicated", s.adjudicated.size()},
             {"hard_disagreements", s.hard.size()}};
    if (list.empty()) {
        json zeros = json::object();
        json counts = json::object();
        for (auto f : all_values<Fault>()) {
            zeros[std::string(to_string(f))] = 0.0;
            counts[std::string(to_string(f))] = 0;
        }
        json classes = json::object();
        for (auto c : all_values<ErrorClass>()) classes[std::string(to_string(c))] = 0;
        out["fault_split"] = zeros;
        out["fault_counts"] = counts;
        out["per_class_counts"] = {{"human", classes}, {"llm", classes}};
        return out;
    }
    const json d = to_json(error_distribution(list));
    out["fault_split"] = d["fault_split"];
    out["fault_counts"] = d["fault_counts"];
    out["per_class_counts"] = d["per_class_counts"];
    return out;
}

HttpResult AdjudicationService::stats() const {
    std::lock_guard lock(mutex_);
    if (!state_) return error_result(503, "NotReady", "data is still loading");
    return {200, stats_json_locked()};
}

HttpResult AdjudicationService::submit(const std::string& body) {
    const json doc = json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) return error_result(400, "InvalidInput", "body is not a JSON object");
    Adjudication adjudication;
    try {
        adjudication = doc.get<Adjudication>();
    } catch (const Error& e) {
        return error_result(400, e.kind(), e.what());
    } catch (const json::exception& e) {
        return error_result(400, "InvalidInput", e.what());
    }

    // Single writer: validation, append and state update happen in order.
    std::lock_guard writer(writer_mutex_);
    {
        std::lock_guard lock(mutex_);
        if (!state_) return error_result(503, "NotReady", "data is still loading");
        if (!state_->hard.contains(adjudication.pair_id)) {
            return error_result(404, "NotFound", "pair " + to_string(adjudication.pair_id) + " is not in the queue");
        }
        if (state_->adjudicated.contains(adjudication.pair_id)) {
            return error_result(409, "ConflictError", "pair " + to_string(adjudication.pair_id) + " is already adjudicated");
        }
    }
    try {
        validate(adjudication);
    } catch (const InvalidInput& e) {
        return error_result(422, "InvalidInput", e.what());
    }
    if (adjudication.created_at.empty()) adjudication.created_at = utc_now_iso();
    try {
        append_line_durable(state_->adjudications_path, canonical_dump(json(adjudication)));
    } catch (const Error& e) {
        return error_result(500, e.kind(), e.what());
    }
    std::lock_guard lock(mutex_);
    state_->adjudicated.emplace(adjudication.pair_id, adjudication);
    return {201, json{{"adjudication", adjudication}, {"stats", stats_json_locked()}}};
}

std::optional<AdjudicationService::Image> AdjudicationService::image(const std::string& product_id) const {
    ProductRecord product;
    {
        std::lock_guard lock(mutex_);
        if (!state_) return std::nullopt;
        auto it = state_->products.find(product_id);
        if (it == state_->products.end()) return std::nullopt;
        product = it->second->product;
    }
    if (!product.image_ref) return std::nullopt;
    try {
        if (!assets_.local_path(*product.image_ref)) return Image{{}, {}, *product.image_ref};
        LoadedImage loaded = assets_.load(product);
        return Image{std::string(loaded.bytes.begin(), loaded.bytes.end()), loaded.media_type, {}};
    } catch (const Error&) {
        return std::nullopt;
    }
}

namespace {

void send_json(httplib::Response& res, const HttpResult& result) {
    res.status = result.status;
    res.set_content(result.body.dump(), "application/json");
}

}  // namespace

int AdjudicationService::start(const ServerConfig& config) {
    stop();
    server_ = std::make_unique<Server>();
    auto& http = server_->http;
    const std::string origin = config.cors_origin;
    http.set_default_headers({{"Access-Control-Allow-Origin", origin},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    http.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    http.Get("/api/queue", [this](const httplib::Request& req, httplib::Response& res) {
        std::optional<std::string> limit;
        if (req.has_param("limit")) limit = req.get_param_value("limit");
        send_json(res, queue(limit));
    });
    http.Get("/api/stats", [this](const httplib::Request&, httplib::Response& res) { send_json(res, stats()); });
    http.Post("/api/adjudications",
              [this](const httplib::Request& req, httplib::Response& res) { send_json(res, submit(req.body)); });
    http.Get(R"(/api/images/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        if (!loaded()) return send_json(res, error_result(503, "NotReady", "data is still loading"));
        auto img = image(req.matches[1]);
        if (!img) return send_json(res, error_result(404, "MissingImage", "no image for this product"));
        if (!img->redirect.empty()) return res.set_redirect(img->redirect);
        res.set_content(img->bytes, img->media_type);
    });
    if (!config.static_dir.empty()) http.set_mount_point("/", config.static_dir.string());

    int port = config.port;
    if (port == 0) {
        port = http.bind_to_any_port(config.bind);
    } else if (!http.bind_to_port(config.bind, port)) {
        port = -1;
    }
    if (port < 0) {
        server_.reset();
        throw IoError("cannot bind " + config.bind + ":" + std::to_string(config.port));
    }
    server_->thread = std::thread([this] { server_->http.listen_after_bind(); });
    server_->http.wait_until_ready();
    return port;
}

void AdjudicationService::listen(const ServerConfig& config) {
    start(config);
    if (server_ && server_->thread.joinable()) server_->thread.join();
}

void AdjudicationService::stop() {
    if (!server_) return;
    server_->http.stop();
    if (server_->thread.joinable() && server_->thread.get_id() != std::this_thread::get_id()) server_->thread.join();
    server_.reset();
}

}  // namespace relassess
