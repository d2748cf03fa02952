// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

// relassess: command-line front end for sampling, annotation, evaluation and
// the adjudication server.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "relassess/analysis.hpp"
#include "relassess/cache_store.hpp"
#include "relassess/dataset.hpp"
#include "relassess/digest.hpp"
#include "relassess/gateway.hpp"
#include "relassess/pipeline.hpp"
#include "relassess/prompts.hpp"
#include "relassess/service.hpp"

namespace fs = std::filesystem;
using namespace relassess;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFatal = 1;
constexpr int kExitPartial = 2;

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    bool json_errors = false;
    std::string out;
};

Globals g;

void report_error(const std::string& kind, const std::string& message) {
    if (g.json_errors) {
        std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
    } else {
        std::cerr << "relassess: " << kind << ": " << message << "\n";
    }
}

void warn(const std::string& message) {
    if (g.json_errors) {
        std::cerr << json{{"warning", message}}.dump() << "\n";
    } else {
        std::cerr << "relassess: warning: " << message << "\n";
    }
}

void write_output(const std::string& text) {
    if (g.out.empty() || g.out == "-") {
        std::cout << text << std::flush;
        return;
    }
    const fs::path path(g.out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + g.out + "'");
    out << text;
    if (!out.flush()) throw IoError("write to '" + g.out + "' failed");
}

std::string read_input(const std::string& path) {
    std::ostringstream buf;
    if (path == "-") {
        buf << std::cin.rdbuf();
        return buf.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    buf << in.rdbuf();
    return buf.str();
}

std::optional<AppConfig> maybe_config() {
    if (g.config_path.empty()) return std::nullopt;
    return load_app_config(g.config_path);
}

AppConfig require_config() {
    if (g.config_path.empty()) throw ConfigError("this command needs --config");
    return load_app_config(g.config_path);
}

std::uint64_t effective_seed(const std::optional<AppConfig>& config) {
    if (g.seed) return *g.seed;
    return config ? config->seed : 0;
}

template <typename T>
std::string json_lines(const std::vector<T>& items) {
    std::string out;
    for (const auto& item : items) {
        out += canonical_dump(json(item));
        out += '\n';
    }
    return out;
}

// Per-query seed so that one query's draw does not depend on the others.
std::uint64_t derive_seed(std::uint64_t seed, const std::string& salt) {
    return std::stoull(sha256_hex(std::to_string(seed) + ":" + salt).substr(0, 16), nullptr, 16);
}

CancellationToken* g_cancel = nullptr;

extern "C" void on_interrupt(int) {
    if (g_cancel) g_cancel->cancel();
}

// sample

struct SampleArgs {
    std::string log;
    std::size_t n = 0;
    std::string curation;
};

int run_sample(const SampleArgs& args) {
    const auto config = maybe_config();
    auto log = read_query_log(args.log);
    if (!args.curation.empty()) log = apply_curation(log, read_curation_file(args.curation));
    const StrataConfig strata = config ? config->strata : StrataConfig{};
    write_output(json_lines(stratified_sample(log, args.n, effective_seed(config), strata)));
    return kExitOk;
}

// mix

struct MixArgs {
    std::string rankings;
    std::size_t top_k = 15;
    std::size_t tail_n = 5;
    std::size_t tail_start = 500;
};

int run_mix(const MixArgs& args) {
    const auto config = maybe_config();
    const std::uint64_t seed = effective_seed(config);
    std::string out;
    int failed = 0;
    for (const auto& list : read_rankings_file(args.rankings)) {
        try {
            const auto ids =
                mix_retrieval(list.ranking, args.top_k, args.tail_n, args.tail_start, derive_seed(seed, list.query_id));
            out += canonical_dump(json{{"query_id", list.query_id}, {"product_ids", ids}}) + "\n";
        } catch (const ShortRankingError& e) {
            ++failed;
            warn("query " + list.query_id + ": " + e.what());
        }
    }
    write_output(out);
    return failed ? kExitPartial : kExitOk;
}

// validate

struct ValidateArgs {
    std::string path;
    std::string kind;
    bool skip_images = false;
};

int run_validate(const ValidateArgs& args) {
    const auto config = maybe_config();
    ValidationOptions options;
    if (!args.kind.empty()) options.kind = parse_enum<DatasetKind>(args.kind);
    options.check_images = !args.skip_images;
    if (config) {
        options.asset_root = config->asset_root;
        options.languages = config->languages;
    } else if (args.path != "-") {
        options.asset_root = fs::absolute(args.path).parent_path();
    }
    const ValidationReport report = args.path == "-" ? validate_dataset_text(read_input("-"), options)
                                                     : validate_dataset(args.path, options);
    write_output(to_json(report).dump(2) + "\n");
    return report.ok() ? kExitOk : kExitFatal;
}

// annotate

struct AnnotateArgs {
    std::string pairs;
    std::string variant = "llm_text";
    std::string guideline_mode = "query_specific";
    std::string model;
    std::uint32_t max_workers = 0;
    bool dry_run = false;
    bool with_timing = false;
    std::string failures;
    std::string run_id;
};

int run_annotate(const AnnotateArgs& args) {
    const AppConfig config = require_config();
    Gateway gateway;
    register_models(gateway, config);

    PipelineConfig pc;
    pc.variant = parse_enum<Variant>(args.variant);
    pc.guideline_mode = parse_enum<GuidelineKind>(args.guideline_mode);
    pc.analysis_model = config.analysis_model;
    pc.vision_model = config.vision_model;
    pc.judge_model = args.model.empty() ? config.judge_model : args.model;
    pc.max_workers = args.max_workers ? args.max_workers : config.max_workers;
    pc.languages = config.languages;
    pc.run_id = args.run_id.empty() ? "run-" + utc_now_iso() : args.run_id;

    CacheStore store(config.store_root);
    PromptLibrary prompts(config.prompts_dir);
    Pipeline pipeline(gateway, store, prompts, AssetResolver(config.asset_root), pc);
    const auto pairs = read_pairs_file(args.pairs);

    if (args.dry_run) {
        const BatchPlan plan = pipeline.plan(pairs);
        json out = to_json(plan);
        out["pairs"] = pairs.size();
        write_output(out.dump(2) + "\n");
        return kExitOk;
    }

    CancellationToken cancel;
    g_cancel = &cancel;
    std::signal(SIGINT, on_interrupt);
    std::signal(SIGTERM, on_interrupt);
    const BatchReport report = pipeline.run_batch(pairs, &cancel);
    std::signal(SIGINT, SIG_DFL);
    std::signal(SIGTERM, SIG_DFL);
    g_cancel = nullptr;

    write_output(render_judgments(report.judgments, args.with_timing));
    if (!args.failures.empty()) {
        std::ofstream out(args.failures, std::ios::trunc);
        for (const auto& f : report.failures) out << canonical_dump(to_json(f)) << "\n";
    }
    for (const auto& w : report.warnings) warn(w);
    std::cerr << summary_json(report).dump(g.json_errors ? -1 : 2) << "\n";
    return report.exit_code();
}

// evaluate / report

struct EvaluateArgs {
    std::vector<std::string> judgments;
    std::string annotations;
    std::string format = "json";
    bool kappa = false;
    bool no_human_rows = false;
};

int run_evaluate(const EvaluateArgs& args) {
    const auto config = maybe_config();
    std::map<std::string, ModelConfig> models;
    if (config) {
        for (const auto& m : config->models) models.emplace(m.model_id, m);
    }
    const auto annotations = read_annotations_file(args.annotations);

    std::map<std::pair<std::string, std::string>, CandidateRun> runs;
    std::set<std::string> unpriced;
    for (const auto& path : args.judgments) {
        for (const auto& r : read_judgments_file(path)) {
            const std::string mode(to_string(r.guideline_mode));
            auto [it, fresh] = runs.try_emplace({r.source(), mode});
            CandidateRun& run = it->second;
            if (fresh) {
                run.source = r.source();
                run.variant = std::string(to_string(r.variant));
                run.guideline_mode = mode;
            }
            if (!run.labels.emplace(r.pair_id, r.label).second) {
                throw InvalidInput("pair " + to_string(r.pair_id) + " is judged twice by " + run.source + " (" + mode + ")");
            }
            if (r.wall_time_ms) run.wall_time_ms += *r.wall_time_ms;
            if (auto m = models.find(r.model_id); m != models.end()) {
                run.cost += estimate_cost(r.usage, m->second);
            } else {
                unpriced.insert(r.model_id);
            }
        }
    }
    for (const auto& m : unpriced) warn("no price configured for model '" + m + "'; its cost is reported as 0");

    std::vector<CandidateRun> list;
    for (auto& [_, run] : runs) list.push_back(std::move(run));
    ReportOptions options;
    options.include_kappa = args.kappa;
    options.include_human_rows = !args.no_human_rows;
    const AgreementReport report = build_report(list, annotations, options);
    write_output(render_report(report, parse_enum<ReportFormat>(args.format)));
    return kExitOk;
}

struct ReportArgs {
    std::string input;
    std::string format = "markdown";
};

int run_report(const ReportArgs& args) {
    const AgreementReport report = parse_report_json(read_input(args.input));
    write_output(render_report(report, parse_enum<ReportFormat>(args.format)));
    return kExitOk;
}

// prioritize

struct PrioritizeArgs {
    std::string log;
    double min_reformulation = 0.5;
    double min_exit = 0.5;
    std::optional<std::size_t> limit;
};

int run_prioritize(const PrioritizeArgs& args) {
    const auto result = prioritize_queries(read_query_log(args.log), {args.min_reformulation, args.min_exit}, args.limit);
    if (result.excluded_without_signals > 0) {
        warn(std::to_string(result.excluded_without_signals) + " queries have no behavioural signals and were skipped");
    }
    write_output(json_lines(result.rows));
    return kExitOk;
}

// serve

struct ServeArgs {
    std::string pairs;
    std::vector<std::string> judgments;
    std::string annotations;
    std::string adjudications;
    std::string candidate_source;
    std::optional<int> port;
    std::string bind;
};

int run_serve(const ServeArgs& args) {
    const AppConfig config = require_config();
    ServerConfig server = config.server;
    if (args.port) server.port = *args.port;
    if (!args.bind.empty()) server.bind = args.bind;

    // Block the stop signals before any thread starts so only sigwait sees them.
    sigset_t stop_signals;
    sigemptyset(&stop_signals);
    sigaddset(&stop_signals, SIGINT);
    sigaddset(&stop_signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

    auto store = std::make_shared<CacheStore>(config.store_root);
    AdjudicationService service(store, AssetResolver(config.asset_root));
    const int port = service.start(server);
    std::cerr << "listening on http://" << server.bind << ":" << port << std::endl;

    ServiceData data;
    data.pairs = read_pairs_file(args.pairs);
    for (const auto& path : args.judgments) {
        auto records = read_judgments_file(path);
        data.judgments.insert(data.judgments.end(), records.begin(), records.end());
    }
    data.annotations = read_annotations_file(args.annotations);
    data.adjudications_path = args.adjudications;
    data.candidate_source = args.candidate_source;
    bool torn = false;
    load_adjudications_log(args.adjudications, &torn);
    if (torn) warn("ignoring an incomplete last line in " + args.adjudications);
    service.load(std::move(data));
    std::cerr << "loaded " << service.hard_disagreements().size() << " hard disagreements" << std::endl;

    int signal = 0;
    sigwait(&stop_signals, &signal);
    service.stop();
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relevance assessment of product search with (M)LLM judges", "relassess"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--config", g.config_path, "Configuration file (JSON)");
    app.add_option("--seed", g.seed, "Seed for sampling and mixing (default: config seed)");
    app.add_flag("--json-errors", g.json_errors, "Print errors as JSON objects on stderr");
    app.add_option("--out", g.out, "Output file (default: stdout)");

    std::function<int()> command;

    SampleArgs sample;
    auto* sample_cmd = app.add_subcommand("sample", "Stratified sample of a query log");
    sample_cmd->add_option("--log", sample.log, "Query log (JSON lines)")->required();
    sample_cmd->add_option("-n,--n", sample.n, "Number of queries")->required();
    sample_cmd->add_option("--curation", sample.curation, "Exclusion and replacement list (JSON)");
    sample_cmd->callback([&] { command = [&] { return run_sample(sample); }; });

    MixArgs mix;
    auto* mix_cmd = app.add_subcommand("mix", "Top-k plus random tail candidates per query");
    mix_cmd->add_option("--rankings", mix.rankings, "Rankings (JSON lines of {query_id, ranking})")->required();
    mix_cmd->add_option("--top-k", mix.top_k, "Leading ranks kept verbatim")->capture_default_str();
    mix_cmd->add_option("--tail-n", mix.tail_n, "Ids drawn from the tail")->capture_default_str();
    mix_cmd->add_option("--tail-start", mix.tail_start, "First eligible tail rank (1-based)")->capture_default_str();
    mix_cmd->callback([&] { command = [&] { return run_mix(mix); }; });

    ValidateArgs validate;
    auto* validate_cmd = app.add_subcommand("validate", "Check a dataset file");
    validate_cmd->add_option("path", validate.path, "Dataset file, or - for stdin")->required();
    validate_cmd->add_option("--kind", validate.kind, "Dataset kind (detected when omitted)");
    validate_cmd->add_flag("--skip-images", validate.skip_images, "Do not check image references");
    validate_cmd->callback([&] { command = [&] { return run_validate(validate); }; });

    AnnotateArgs annotate;
    auto* annotate_cmd = app.add_subcommand("annotate", "Judge query-product pairs");
    annotate_cmd->add_option("--pairs", annotate.pairs, "Pairs file (JSON lines)")->required();
    annotate_cmd->add_option("--variant", annotate.variant, "llm_text, mllm_text or mllm_multi")->capture_default_str();
    annotate_cmd->add_option("--guideline-mode", annotate.guideline_mode, "query_specific or generic")
        ->capture_default_str();
    annotate_cmd->add_option("--model", annotate.model, "Judge model (default: config)");
    annotate_cmd->add_option("--max-workers", annotate.max_workers, "Parallel pairs (default: config)");
    annotate_cmd->add_flag("--dry-run", annotate.dry_run, "Print the planned backend calls and exit");
    annotate_cmd->add_flag("--with-timing", annotate.with_timing, "Include wall time and timestamps in the output");
    annotate_cmd->add_option("--failures", annotate.failures, "Write per-pair failures here (JSON lines)");
    annotate_cmd->add_option("--run-id", annotate.run_id, "Run id recorded in new cache entries");
    annotate_cmd->callback([&] { command = [&] { return run_annotate(annotate); }; });

    EvaluateArgs evaluate;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Agreement of judgment files with human annotations");
    evaluate_cmd->add_option("--judgments", evaluate.judgments, "Judgment files")->required();
    evaluate_cmd->add_option("--annotations", evaluate.annotations, "Annotations file (JSON lines)")->required();
    evaluate_cmd->add_option("--format", evaluate.format, "json, markdown or csv")->capture_default_str();
    evaluate_cmd->add_flag("--kappa", evaluate.kappa, "Add Cohen's kappa against the majority");
    evaluate_cmd->add_flag("--no-human-rows", evaluate.no_human_rows, "Omit the human annotator rows");
    evaluate_cmd->callback([&] { command = [&] { return run_evaluate(evaluate); }; });

    ReportArgs report;
    auto* report_cmd = app.add_subcommand("report", "Render a saved evaluation");
    report_cmd->add_option("input", report.input, "Report JSON from evaluate, or - for stdin")->required();
    report_cmd->add_option("--format", report.format, "markdown, csv or json")->capture_default_str();
    report_cmd->callback([&] { command = [&] { return run_report(report); }; });

    PrioritizeArgs prioritize;
    auto* prioritize_cmd = app.add_subcommand("prioritize", "Queries with high reformulation or exit rates");
    prioritize_cmd->add_option("--log", prioritize.log, "Query log with signals (JSON lines)")->required();
    prioritize_cmd->add_option("--min-reformulation", prioritize.min_reformulation)->capture_default_str();
    prioritize_cmd->add_option("--min-exit", prioritize.min_exit)->capture_default_str();
    prioritize_cmd->add_option("--limit", prioritize.limit, "Keep at most this many queries");
    prioritize_cmd->callback([&] { command = [&] { return run_prioritize(prioritize); }; });

    ServeArgs serve;
    auto* serve_cmd = app.add_subcommand("serve", "Adjudication API (and the static UI when configured)");
    serve_cmd->add_option("--pairs", serve.pairs, "Pairs file")->required();
    serve_cmd->add_option("--judgments", serve.judgments, "Judgment files")->required();
    serve_cmd->add_option("--annotations", serve.annotations, "Annotations file")->required();
    serve_cmd->add_option("--adjudications", serve.adjudications, "Adjudications log (appended to)")->required();
    serve_cmd->add_option("--candidate-source", serve.candidate_source, "Judgment source to adjudicate against");
    serve_cmd->add_option("--port", serve.port, "Port (0 picks a free one)");
    serve_cmd->add_option("--bind", serve.bind, "Bind address");
    serve_cmd->callback([&] { command = [&] { return run_serve(serve); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitFatal;
    }

    try {
        return command();
    } catch (const Error& e) {
        report_error(e.kind(), e.what());
    } catch (const json::exception& e) {
        report_error("InvalidInput", e.what());
    } catch (const std::exception& e) {
        report_error("Internal", e.what());
    }
    return kExitFatal;
}
