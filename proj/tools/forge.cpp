// forge: command-line driver for the theme-analysis pipeline.

#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>
#include <sstream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "forge/analytics.hpp"
#include "forge/clusters.hpp"
#include "forge/error.hpp"
#include "forge/service/config.hpp"
#include "forge/service/curation.hpp"
#include "forge/service/pipeline.hpp"
#include "forge/service/server.hpp"
#include "forge/service/store.hpp"
#include "forge/util/csv.hpp"
#include "forge/util/io.hpp"

namespace fs = std::filesystem;
using namespace forge;
using namespace forge::service;

namespace {

struct Common {
    std::string store = "forge-store";
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string log_level = "info";
};

/// Explicit --config replaces the store's snapshot; otherwise the snapshot is reused.
Config resolve_config(const Common& opt, ProjectStore& store) {
    Config cfg;
    if (!opt.config.empty()) {
        cfg = Config::load(opt.config);
    } else if (auto snap = store.config_snapshot()) {
        cfg = Config::from_json(*snap, fs::path("/"));
    } else {
        throw UsageError(fmt::format("store {} has no configuration; pass --config", opt.store));
    }
    if (opt.seed) cfg.seed = *opt.seed;
    return cfg;
}

void print_result(const StageResult& r) {
    fmt::print("{} {} ({})\n", r.stage, r.noop ? "up-to-date" : "done", r.input_key.substr(0, 12));
}

std::vector<std::size_t> parse_range(const std::string& spec) {
    std::size_t a = 0, b = 0, s = 1;
    char c1 = 0, c2 = 0;
    std::istringstream in(spec);
    in >> a >> c1 >> b;
    if (in >> c2 && !(in >> s)) s = 0;
    if (c1 != ':' || a == 0 || b < a || s == 0) throw UsageError(fmt::format("range '{}' must be start:end[:step]", spec));
    std::vector<std::size_t> out;
    for (std::size_t k = a; k <= b; k += s) out.push_back(k);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"forge: transcript theme pipeline"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--store", common.store, "Project store directory")->capture_default_str();
    app.add_option("--config", common.config, "Config JSON; replaces the store's config snapshot");
    app.add_option("--seed", common.seed, "Override the project seed");
    app.add_option("--log-level", common.log_level, "trace|debug|info|warn|error")->capture_default_str();

    std::string stage_to_run;

    auto stage_cmd = [&](const std::string& name, const std::string& help) {
        auto* sub = app.add_subcommand(name, help);
        sub->callback([&, name] { stage_to_run = name; });
        return sub;
    };

    stage_cmd("ingest", "Load, validate and filter the corpus");
    std::string backend_name, audit_path;
    auto* extract = stage_cmd("extract", "Extract topics with the generation backend");
    extract->add_option("--backend", backend_name, "Generation backend name");
    extract->add_option("--audit", audit_path, "Append request/response audit lines to this file");
    std::string embed_backend;
    stage_cmd("embed", "Embed unique topic texts")->add_option("--backend", embed_backend, "Embedding backend name");
    std::optional<std::size_t> k, max_iter, budget;
    auto* cluster = stage_cmd("cluster", "Spherical k-means over topic embeddings");
    cluster->add_option("--k", k, "Number of clusters");
    cluster->add_option("--max-iter", max_iter, "Iteration cap");
    stage_cmd("name-clusters", "Name each cluster with the generation backend")
        ->add_option("--budget", budget, "Members shown per naming prompt");

    std::string action_file;
    bool show_history = false;
    auto* curate = app.add_subcommand("curate", "Initialize the merge map or apply a curation action");
    curate->add_option("--action", action_file, "CurationAction JSON file to apply");
    curate->add_flag("--history", show_history, "Print the merge history");

    std::string elbow;
    bool silhouette = false;
    auto* diagnose = app.add_subcommand("diagnose", "Elbow curve and silhouette diagnostics");
    diagnose->add_option("--elbow", elbow, "k range start:end[:step]");
    diagnose->add_flag("--silhouette", silhouette, "Silhouette of the current clustering");

    stage_cmd("tables", "Theme frequency tables and coherence report");
    std::string metric;
    std::optional<std::size_t> min_occ;
    auto* engagement = stage_cmd("engagement", "Engagement-ratio rankings");
    engagement->add_option("--metric", metric, "Print one metric: comment|like");
    engagement->add_option("--min-occ", min_occ, "Minimum videos carrying a theme");
    std::optional<double> perplexity;
    auto* viz = stage_cmd("viz", "Channel theme vectors and t-SNE layout");
    viz->add_option("--perplexity", perplexity, "t-SNE perplexity");
    std::string groups_file;
    stage_cmd("quality", "Q_c quality of channel groups")->add_option("--groups", groups_file, "Groups JSON file");

    std::string targets_file, gold_file;
    std::optional<double> threshold, credit;
    auto* scan = stage_cmd("stance-scan", "Find documents mentioning each target");
    scan->add_option("--targets", targets_file, "Targets JSON file");
    scan->add_option("--threshold", threshold, "Fuzzy match threshold in [0, 100]");
    stage_cmd("stance-classify", "Classify stance for relevant documents");
    auto* eval = stage_cmd("stance-eval", "Accuracy and soft accuracy against gold labels");
    eval->add_option("--credit", credit, "Partial credit for Neutral on polar gold labels");
    eval->add_option("--gold", gold_file, "Gold labels CSV");
    stage_cmd("stance-tables", "Stance distribution tables");

    stage_cmd("run", "Run every configured stage in order");
    app.add_subcommand("status", "Show stage status");

    std::string out_dir = "report";
    app.add_subcommand("export", "Write the report bundle")->add_option("--out", out_dir, "Output directory")->capture_default_str();

    std::string bind = "127.0.0.1:8080";
    app.add_subcommand("serve", "Serve the curation API")->add_option("--bind", bind, "host:port")->capture_default_str();

    CLI11_PARSE(app, argc, argv);
    spdlog::set_default_logger(spdlog::stderr_color_mt("forge"));
    spdlog::set_level(spdlog::level::from_str(common.log_level));

    try {
        ProjectStore store(common.store);
        Config cfg = resolve_config(common, store);
        if (!backend_name.empty()) cfg.generation = backend_name;
        if (!audit_path.empty()) cfg.audit = fs::absolute(audit_path);
        if (!embed_backend.empty()) cfg.embedding = embed_backend;
        if (k) cfg.cluster.k = *k;
        if (max_iter) cfg.cluster.max_iter = *max_iter;
        if (budget) cfg.cluster.naming_budget = *budget;
        if (min_occ) cfg.analytics.min_occurrence = *min_occ;
        if (perplexity) cfg.tsne.perplexity = *perplexity;
        if (!groups_file.empty()) cfg.inputs.quality_groups = fs::absolute(groups_file);
        if (!targets_file.empty()) cfg.inputs.targets = fs::absolute(targets_file);
        if (!gold_file.empty()) cfg.inputs.gold = fs::absolute(gold_file);
        if (threshold) cfg.stance.threshold = *threshold;
        if (credit) cfg.stance.credit = *credit;

        const auto* sub = app.get_subcommands().front();
        const std::string cmd = sub->get_name();

        if (cmd == "status") {
            Pipeline p(store, cfg);
            for (const auto& s : stage_graph())
                fmt::print("{:<16} {}{}\n", s.name, to_string(p.status(s.name)), p.enabled(s.name) ? "" : " (not configured)");
            return 0;
        }
        if (cmd == "run") {
            Pipeline p(store, cfg);
            for (const auto& r : p.run_all()) print_result(r);
            return 0;
        }
        if (cmd == "curate") {
            Pipeline p(store, cfg);
            if (action_file.empty() && !show_history) {
                print_result(p.run_stage("curate"));
                return 0;
            }
            CurationService svc(store, cfg);
            if (!action_file.empty()) {
                const auto e = svc.apply(CurationService::parse_action(util::read_file(action_file)));
                fmt::print("applied {} -> {} (version {})\n", themes::to_string(e.kind), e.theme_id, e.version);
            }
            const auto map = p.merge_map();
            if (show_history)
                for (const auto& e : map.history())
                    fmt::print("v{} {} {} [{}] {} {}\n", e.version, themes::to_string(e.kind), e.theme_id,
                               fmt::join(e.clusters, ","), e.name, e.timestamp);
            return 0;
        }
        if (cmd == "diagnose") {
            Pipeline p(store, cfg);
            if (p.status("embed") != StageStatus::Current) throw DependencyError("diagnose needs a current 'embed' stage", "embed");
            const auto ts = p.topics();
            const auto vectors = p.topic_vectors(ts, p.embeddings());
            if (!elbow.empty()) {
                fmt::print("k,inertia\n");
                const auto ks = parse_range(elbow);
                for (const auto& [kk, inertia] : clusters::elbow_curve(vectors, ks, cfg.seed, cfg.cluster.max_iter))
                    fmt::print("{},{:.6f}\n", kk, inertia);
            }
            if (silhouette) {
                if (p.status("cluster") != StageStatus::Current)
                    throw DependencyError("--silhouette needs a current 'cluster' stage", "cluster");
                fmt::print("silhouette,{:.6f}\n", clusters::silhouette(vectors, p.clustering()));
            }
            return 0;
        }
        if (cmd == "export") {
            const auto r = export_report(store, out_dir);
            for (const auto& f : r.files) fmt::print("{}\n", (fs::path(out_dir) / f).string());
            return 0;
        }
        if (cmd == "serve") {
            CurationService svc(store, cfg);
            ApiServer server(svc);
            const int port = server.bind(bind);
            spdlog::info("serving curation API on port {}", port);
            server.listen();
            return 0;
        }

        Pipeline p(store, cfg);
        print_result(p.run_stage(stage_to_run));
        if (cmd == "engagement" && !metric.empty()) {
            const auto m = analytics::parse_metric(metric);
            const auto rows = util::parse_csv(store.read_output("engagement", "engagement.csv"));
            for (std::size_t i = 0; i < rows.size(); ++i)
                if (i == 0 || rows[i][1] == analytics::to_string(m)) std::cout << util::csv_row(rows[i]);
        }
        if (cmd == "stance-eval") std::cout << store.read_output("stance-eval", "stance_eval.json");
        return 0;
    } catch (const DependencyError& e) {
        spdlog::error("{}", e.what());
        return 3;
    } catch (const UsageError& e) {
        spdlog::error("{}", e.what());
        return 2;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
}
