#include "forge/service/pipeline.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <set>

#include "forge/analytics.hpp"
#include "forge/error.hpp"
#include "forge/text.hpp"
#include "forge/tsne.hpp"
#include "forge/util/csv.hpp"
#include "forge/util/hash.hpp"
#include "forge/util/io.hpp"
#include "forge/util/parallel.hpp"
#include "json.hpp"

namespace forge::service {

using nlohmann::json;
using nlohmann::ordered_json;

const std::vector<StageSpec>& stage_graph() {
    static const std::vector<StageSpec> graph = {
        {"ingest", {}},
        {"extract", {"ingest"}},
        {"embed", {"extract"}},
        {"cluster", {"embed", "extract"}},
        {"name-clusters", {"cluster", "extract"}},
        {"curate", {"name-clusters", "cluster", "extract", "ingest"}},
        {"tables", {"curate", "cluster", "extract", "embed", "ingest"}},
        {"engagement", {"curate", "cluster", "extract", "ingest"}},
        {"viz", {"curate", "cluster", "extract", "ingest"}},
        {"quality", {"viz", "ingest"}},
        {"stance-scan", {"ingest"}},
        {"stance-classify", {"stance-scan", "ingest"}},
        {"stance-eval", {"stance-classify"}},
        {"stance-tables", {"stance-classify", "ingest"}},
    };
    return graph;
}

const StageSpec& stage_spec(std::string_view name) {
    for (const auto& s : stage_graph())
        if (s.name == name) return s;
    throw UsageError(fmt::format("unknown stage '{}'", name));
}

std::vector<std::string> dependents_of(std::string_view name) {
    std::set<std::string> reached{std::string(name)};
    std::vector<std::string> out;
    for (const auto& s : stage_graph()) {
        if (reached.contains(s.name)) continue;
        for (const auto& d : s.deps)
            if (reached.contains(d)) {
                reached.insert(s.name);
                out.push_back(s.name);
                break;
            }
    }
    return out;
}

std::string_view to_string(StageStatus s) {
    switch (s) {
        case StageStatus::Missing: return "missing";
        case StageStatus::Current: return "current";
        case StageStatus::Stale: return "stale";
    }
    return "?";
}

std::string embedding_key(std::string_view topic_text) { return text::casefold(text::trim(topic_text)); }

Pipeline::Pipeline(ProjectStore& store, Config config, std::shared_ptr<gateway::Transport> transport)
    : store_(store), config_(std::move(config)) {
    config_.validate();
    gateway_ = std::make_unique<gateway::Gateway>(config_.gateway_options(), std::move(transport));
    store_.set_config_snapshot(config_.to_json());
}

bool Pipeline::enabled(std::string_view name) const {
    if (name.starts_with("stance-")) {
        if (!config_.inputs.targets) return false;
        if (name == "stance-eval") return config_.inputs.gold.has_value();
    }
    return true;
}

std::string Pipeline::config_subset(std::string_view name) const {
    ordered_json j = ordered_json::object();
    const auto& c = config_;
    if (name == "ingest") {
        j["snapshot_date"] = c.snapshot_date ? json(*c.snapshot_date) : json(nullptr);
        j["filters"] = {c.filters.min_videos_political, c.filters.min_subs_national, c.filters.min_subs_local};
    } else if (name == "extract" || name == "stance-classify") {
        j["backend"] = ordered_json::parse(backend_json(c.backend(c.generation)));
    } else if (name == "embed") {
        j["backend"] = ordered_json::parse(backend_json(c.backend(c.embedding)));
    } else if (name == "cluster") {
        j["k"] = c.cluster.k;
        j["max_iter"] = c.cluster.max_iter;
        j["seed"] = c.seed;
    } else if (name == "name-clusters") {
        j["backend"] = ordered_json::parse(backend_json(c.backend(c.generation)));
        j["naming_budget"] = c.cluster.naming_budget;
        j["seed"] = c.seed;
    } else if (name == "curate") {
        j["validation"] = {c.validation.per_dataset, c.validation.max_words};
        j["seed"] = c.seed;
    } else if (name == "engagement") {
        j["min_occurrence"] = c.analytics.min_occurrence;
        j["pooled"] = c.analytics.pooled;
    } else if (name == "viz") {
        j["min_videos_viz"] = c.filters.min_videos_viz;
        j["perplexity"] = c.tsne.perplexity;
        j["iterations"] = c.tsne.iterations;
        j["seed"] = c.seed;
    } else if (name == "stance-scan") {
        j["threshold"] = c.stance.threshold;
    } else if (name == "stance-eval") {
        j["credit"] = c.stance.credit;
    }
    return j.dump();
}

std::map<std::string, std::string> Pipeline::external_inputs(std::string_view name) const {
    std::map<std::string, std::string> out;
    auto add = [&](const char* key, const std::optional<fs::path>& p) {
        if (!p) return;
        if (!fs::exists(*p)) throw PreconditionError(fmt::format("input file {} does not exist", p->string()));
        out[key] = util::sha256_file(*p);
    };
    if (name == "ingest") {
        add("channels", config_.inputs.channels);
        add("videos", config_.inputs.videos);
    } else if (name == "quality") {
        add("quality_groups", config_.inputs.quality_groups);
    } else if (name == "stance-scan" || name == "stance-classify" || name == "stance-tables") {
        add("targets", config_.inputs.targets);
    } else if (name == "stance-eval") {
        add("gold", config_.inputs.gold);
    }
    return out;
}

std::string Pipeline::input_key(std::string_view name) const {
    const auto& spec = stage_spec(name);
    ordered_json j;
    j["stage"] = spec.name;
    j["store_version"] = kStoreVersion;
    j["config"] = ordered_json::parse(config_subset(name));
    ordered_json up = ordered_json::object();
    for (const auto& d : spec.deps) {
        const auto* rec = store_.stage(d);
        if (!rec) throw DependencyError(fmt::format("stage '{}' requires '{}', which has not run", name, d), d);
        ordered_json files = ordered_json::object();
        for (const auto& [f, ref] : rec->outputs) files[f] = ref.sha256;
        up[d] = files;
    }
    j["upstream"] = up;
    ordered_json ext = ordered_json::object();
    for (const auto& [k, h] : external_inputs(name)) ext[k] = h;
    j["external"] = ext;
    return util::sha256_hex(j.dump());
}

StageStatus Pipeline::status(std::string_view name) const {
    const auto* rec = store_.stage(name);
    if (!rec) return StageStatus::Missing;
    for (const auto& d : stage_spec(name).deps)
        if (status(d) != StageStatus::Current) return StageStatus::Stale;
    return rec->input_key == input_key(name) ? StageStatus::Current : StageStatus::Stale;
}

StageResult Pipeline::run_stage(std::string_view name) {
    const auto& spec = stage_spec(name);
    if (!enabled(name))
        throw UsageError(fmt::format("stage '{}' needs inputs that are not configured", name));
    for (const auto& d : spec.deps) {
        const auto s = status(d);
        if (s != StageStatus::Current)
            throw DependencyError(fmt::format("stage '{}' requires '{}', which is {}", name, d, to_string(s)), d);
    }
    StageResult result;
    result.stage = spec.name;
    result.input_key = input_key(name);
    const auto* prev = store_.stage(name);
    if (prev && prev->input_key == result.input_key) {
        for (const auto& [f, _] : prev->outputs) {
            store_.read_output(name, f);
            result.files.push_back(f);
        }
        result.noop = true;
        spdlog::info("{}: up to date", name);
        return result;
    }

    spdlog::info("{}: running", name);
    auto files = compute(name);
    bool same_outputs = prev != nullptr && prev->outputs.size() == files.size();
    if (same_outputs)
        for (const auto& [f, content] : files) {
            auto it = prev->outputs.find(f);
            if (it == prev->outputs.end() || it->second.sha256 != util::sha256_hex(content)) {
                same_outputs = false;
                break;
            }
        }
    std::optional<std::string> corpus_hash;
    if (name == "ingest")
        corpus_hash = util::sha256_hex(util::sha256_hex(files.at("channels.jsonl")) + util::sha256_hex(files.at("videos.jsonl")));
    for (const auto& [f, _] : files) result.files.push_back(f);
    store_.commit(spec.name, result.input_key, files, same_outputs ? std::vector<std::string>{} : dependents_of(name),
                  corpus_hash);
    return result;
}

std::vector<StageResult> Pipeline::run_all() {
    std::vector<StageResult> out;
    for (const auto& s : stage_graph()) {
        if (!enabled(s.name)) {
            spdlog::warn("{}: skipped, inputs not configured", s.name);
            continue;
        }
        out.push_back(run_stage(s.name));
    }
    return out;
}

// ------------------------------------------------------------ loaders

corpus::Corpus Pipeline::corpus() const {
    auto c = corpus::parse_corpus(store_.read_output("ingest", "channels.jsonl"),
                                  store_.read_output("ingest", "videos.jsonl"));
    if (config_.snapshot_date) c.snapshot_date = corpus::parse_date(*config_.snapshot_date);
    return c;
}

std::vector<topics::Topic> Pipeline::topics() const {
    return topics::parse_topics(store_.read_output("extract", "topics.jsonl"));
}

EmbeddingTable Pipeline::embeddings() const {
    EmbeddingTable table;
    const auto text = store_.read_output("embed", "embeddings.jsonl");
    for (auto line : util::split_lines(text)) {
        if (line.empty()) continue;
        const auto j = json::parse(line);
        table[j.at("key").get<std::string>()] = j.at("vector").get<Vec>();
    }
    return table;
}

std::vector<Vec> Pipeline::topic_vectors(const std::vector<topics::Topic>& ts, const EmbeddingTable& table) const {
    std::vector<Vec> out;
    out.reserve(ts.size());
    for (const auto& t : ts) {
        auto it = table.find(embedding_key(t.text));
        if (it == table.end()) throw IntegrityError(fmt::format("no embedding for topic {}", t.key()));
        out.push_back(it->second);
    }
    return out;
}

clusters::Clustering Pipeline::clustering() const {
    return clusters::parse_clustering(store_.read_output("cluster", "clustering.json"));
}

std::vector<clusters::ClusterName> Pipeline::cluster_names() const {
    return clusters::parse_names(store_.read_output("name-clusters", "names.jsonl"));
}

themes::MergeMap Pipeline::merge_map() const {
    return themes::MergeMap::from_json(store_.read_output("curate", "merge_map.json"));
}

themes::VideoThemes Pipeline::video_themes() const {
    return themes::assign_all(topics(), clustering(), merge_map());
}

std::vector<stance::TargetSpec> Pipeline::targets() const {
    if (!config_.inputs.targets) throw UsageError("no targets file configured");
    return stance::parse_targets(util::read_file(*config_.inputs.targets));
}

std::vector<themes::ThemeMembers> theme_members(const std::vector<topics::Topic>& ts, const std::vector<Vec>& vectors,
                                                const clusters::Clustering& clustering, const themes::MergeMap& map) {
    std::vector<themes::ThemeMembers> out;
    for (const auto& theme : themes::apply_merge(clustering, map)) {
        themes::ThemeMembers m;
        m.theme_id = theme.theme_id;
        for (auto i : theme.member_topics) {
            m.keys.push_back(ts[i].key());
            m.vectors.push_back(vectors[i]);
        }
        if (!m.keys.empty()) out.push_back(std::move(m));
    }
    return out;
}

// ------------------------------------------------------------ stages

namespace {

std::vector<analytics::Group> table_groups(const corpus::Corpus& c) {
    std::set<analytics::Group> groups;
    for (const auto& ch : c.channels()) {
        const auto ds = corpus::dataset_of(ch.source_kind);
        if (ds == corpus::Dataset::Local)
            groups.insert({ds, std::nullopt});
        else
            groups.insert({ds, ch.orientation});
    }
    return {groups.begin(), groups.end()};
}

std::vector<analytics::ChannelThemeVector> parse_channel_vectors(std::string_view csv) {
    std::vector<analytics::ChannelThemeVector> out;
    const auto rows = util::parse_csv(csv);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != 3) throw CorruptionError("channel_vectors.csv: expected 3 fields");
        if (out.empty() || out.back().channel_id != row[0]) out.push_back({row[0], {}, 0});
        out.back().probabilities[row[1]] = std::stod(row[2]);
    }
    return out;
}

}  // namespace

std::map<std::string, std::string> Pipeline::compute(std::string_view name) {
    const auto& c = config_;
    std::map<std::string, std::string> files;

    if (name == "ingest") {
        auto raw = corpus::ingest_corpus(c.inputs.channels, c.inputs.videos);
        const auto kept = corpus::apply_filters(raw, c.filters);
        std::size_t transcribed = 0;
        for (const auto& v : kept.videos()) transcribed += v.has_transcript() ? 1 : 0;
        ordered_json report;
        report["channels_in"] = raw.channels().size();
        report["channels_kept"] = kept.channels().size();
        report["videos_in"] = raw.videos().size();
        report["videos_kept"] = kept.videos().size();
        report["transcribed"] = transcribed;
        report["snapshot_date"] = c.snapshot_date ? json(*c.snapshot_date) : json(nullptr);
        files["channels.jsonl"] = corpus::serialize_channels(kept);
        files["videos.jsonl"] = corpus::serialize_videos(kept);
        files["ingest_report.json"] = report.dump(2) + "\n";
    } else if (name == "extract") {
        const auto ex = topics::extract_corpus(corpus(), *gateway_, c.backend(c.generation), c.workers);
        files["topics.jsonl"] = topics::serialize_topics(ex.topics);
        files["skipped.jsonl"] = topics::serialize_skips(ex.skipped);
    } else if (name == "embed") {
        std::set<std::string> keys;
        for (const auto& t : topics()) keys.insert(embedding_key(t.text));
        const std::vector<std::string> texts(keys.begin(), keys.end());
        std::string out;
        if (!texts.empty()) {
            const auto vectors = gateway_->embed_batch(texts, c.backend(c.embedding));
            for (std::size_t i = 0; i < texts.size(); ++i) {
                ordered_json j;
                j["key"] = texts[i];
                j["vector"] = vectors[i].values();
                out += j.dump() + "\n";
            }
        }
        files["embeddings.jsonl"] = std::move(out);
    } else if (name == "cluster") {
        const auto ts = topics();
        const auto vectors = topic_vectors(ts, embeddings());
        const auto clustering = clusters::kmeans(vectors, c.cluster.k, c.seed, c.cluster.max_iter, c.workers);
        files["clustering.json"] = clusters::serialize_clustering(clustering);
    } else if (name == "name-clusters") {
        const auto ts = topics();
        const auto clustering = this->clustering();
        const auto backend = c.backend(c.generation);
        std::vector<clusters::ClusterName> names(clustering.k);
        util::parallel_for(clustering.k, c.workers, [&](std::size_t id) {
            std::vector<std::string> member_texts;
            for (auto i : clustering.members(id)) member_texts.push_back(ts[i].text);
            names[id] = clusters::name_cluster(id, member_texts, *gateway_, backend, c.cluster.naming_budget, c.seed);
        });
        files["names.jsonl"] = clusters::serialize_names(names);
    } else if (name == "curate") {
        std::vector<std::string> names;
        for (const auto& n : cluster_names()) names.push_back(n.name);
        const auto map = themes::MergeMap::identity(names);
        files["merge_map.json"] = map.to_json();
        if (c.validation.per_dataset > 0) {
            const auto corp = corpus();
            std::map<corpus::Dataset, std::size_t> n;
            for (const auto& ch : corp.channels()) n[corpus::dataset_of(ch.source_kind)] = c.validation.per_dataset;
            const auto vt = themes::assign_all(topics(), clustering(), map);
            const auto items = themes::export_validation_sample(corp, vt, map, n, c.validation.max_words, c.seed);
            files["validation.csv"] = themes::validation_csv(items);
        }
    } else if (name == "tables") {
        const auto corp = corpus();
        const auto ts = topics();
        const auto clustering = this->clustering();
        const auto map = merge_map();
        const auto vt = themes::assign_all(ts, clustering, map);
        std::vector<analytics::FrequencyRow> rows;
        for (const auto& g : table_groups(corp)) {
            std::vector<analytics::PeriodFilter> periods{std::nullopt};
            if (g.dataset != corpus::Dataset::Local)
                for (auto p : {corpus::Period::PreElection, corpus::Period::European, corpus::Period::Legislative})
                    periods.emplace_back(p);
            for (const auto& p : periods) {
                auto part = analytics::theme_frequency(corp, vt, map.theme_names(), g, p);
                rows.insert(rows.end(), part.begin(), part.end());
            }
        }
        files["frequency.csv"] = analytics::frequency_csv(rows);
        const auto members = theme_members(ts, topic_vectors(ts, embeddings()), clustering, map);
        files["theme_coherence.csv"] = themes::coherence_csv(themes::coherence_report(members, map));
    } else if (name == "engagement") {
        const auto corp = corpus();
        const auto map = merge_map();
        const auto vt = themes::assign_all(topics(), clustering(), map);
        std::vector<analytics::EngagementRow> rows;
        for (auto metric : {analytics::Metric::CommentPerView, analytics::Metric::LikePerView})
            for (const auto& g : table_groups(corp)) {
                analytics::EngagementOptions opt;
                opt.metric = metric;
                opt.min_occurrence = c.analytics.min_occurrence;
                opt.averaging = c.analytics.pooled ? analytics::Averaging::Pooled : analytics::Averaging::PerVideo;
                auto part = analytics::engagement_ranking(corp, vt, map.theme_names(), g, opt);
                rows.insert(rows.end(), part.begin(), part.end());
            }
        files["engagement.csv"] = analytics::engagement_csv(rows);
    } else if (name == "viz") {
        const auto corp = corpus();
        const auto vt = video_themes();
        const auto vectors = analytics::channel_theme_vectors(corp, vt, c.filters.min_videos_viz);
        files["channel_vectors.csv"] = analytics::channel_vectors_csv(vectors);
        std::string layout = util::csv_row({"channel_id", "x", "y", "orientation"});
        if (vectors.size() < 3) {
            spdlog::warn("viz: {} channels qualify, layout left empty", vectors.size());
        } else {
            analytics::TsneOptions opt;
            opt.perplexity = c.tsne.perplexity;
            opt.iterations = c.tsne.iterations;
            opt.seed = c.seed;
            const auto res = analytics::tsne(analytics::densify(vectors), opt);
            spdlog::info("viz: KL {:.4f} -> {:.4f}", res.initial_kl, res.final_kl);
            for (std::size_t i = 0; i < vectors.size(); ++i) {
                const auto* ch = corp.find_channel(vectors[i].channel_id);
                layout += util::csv_row({vectors[i].channel_id, fmt::format("{:.6f}", res.points[i][0]),
                                         fmt::format("{:.6f}", res.points[i][1]),
                                         std::string(corpus::to_string(ch->orientation))});
            }
        }
        files["tsne_layout.csv"] = std::move(layout);
    } else if (name == "quality") {
        const auto vectors = parse_channel_vectors(store_.read_output("viz", "channel_vectors.csv"));
        std::map<std::string, std::vector<std::string>> groups;
        if (c.inputs.quality_groups) {
            try {
                groups = json::parse(util::read_file(*c.inputs.quality_groups))
                             .get<std::map<std::string, std::vector<std::string>>>();
            } catch (const json::exception& e) {
                throw ParseError(fmt::format("quality groups: {}", e.what()));
            }
        } else {
            const auto corp = corpus();
            for (const auto& v : vectors)
                groups[std::string(corpus::to_string(corp.find_channel(v.channel_id)->orientation))].push_back(
                    v.channel_id);
            std::erase_if(groups, [&](const auto& kv) { return kv.second.size() < 2 || kv.second.size() == vectors.size(); });
        }
        files["quality.csv"] = analytics::quality_csv(analytics::quality_report(vectors, groups));
    } else if (name == "stance-scan") {
        const auto corp = corpus();
        std::vector<stance::Relevance> rows;
        for (const auto& t : targets()) {
            rows.push_back(stance::select_relevant_docs(corp, t, c.stance.threshold, c.workers));
            if (rows.back().excluded)
                spdlog::warn("stance-scan: target {} excluded ({} relevant documents)", t.target_id, rows.back().count);
        }
        files["relevance.jsonl"] = stance::serialize_relevance(rows);
    } else if (name == "stance-classify") {
        const auto corp = corpus();
        const auto ts = targets();
        const auto relevance = stance::parse_relevance(store_.read_output("stance-scan", "relevance.jsonl"));
        std::vector<std::pair<const stance::TargetSpec*, const corpus::TranscriptDoc*>> jobs;
        for (const auto& r : relevance) {
            if (r.excluded) continue;
            auto t = std::find_if(ts.begin(), ts.end(), [&](const auto& s) { return s.target_id == r.target_id; });
            if (t == ts.end()) throw IntegrityError(fmt::format("relevance names unknown target {}", r.target_id));
            for (const auto& d : r.docs) jobs.emplace_back(&*t, corp.find_video(d));
        }
        const auto backend = c.backend(c.generation);
        std::vector<stance::StanceRecord> records(jobs.size());
        util::parallel_for(jobs.size(), c.workers, [&](std::size_t i) {
            records[i] = stance::classify_stance(*jobs[i].second, *jobs[i].first, *gateway_, backend);
        });
        std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
            return std::tie(a.doc_id, a.target_id) < std::tie(b.doc_id, b.target_id);
        });
        files["predictions.jsonl"] = stance::serialize_records(records);
    } else if (name == "stance-eval") {
        const auto gold = stance::parse_gold_csv(util::read_file(*c.inputs.gold));
        const auto pred = stance::parse_records(store_.read_output("stance-classify", "predictions.jsonl"));
        std::set<std::pair<std::string, std::string>> keys;
        for (const auto& g : gold) keys.emplace(g.doc_id, g.target_id);
        std::vector<stance::StanceRecord> aligned;
        for (const auto& p : pred)
            if (keys.contains({p.doc_id, p.target_id})) aligned.push_back(p);
        ordered_json j;
        j["items"] = gold.size();
        j["credit"] = c.stance.credit;
        j["accuracy"] = stance::accuracy(aligned, gold);
        j["soft_accuracy"] = stance::soft_accuracy(aligned, gold, c.stance.credit);
        files["stance_eval.json"] = j.dump(2) + "\n";
    } else if (name == "stance-tables") {
        const auto corp = corpus();
        const auto records = stance::parse_records(store_.read_output("stance-classify", "predictions.jsonl"));
        using stance::Grouping;
        files["stance_orientation.csv"] =
            stance::stance_csv(stance::stance_table(records, corp, Grouping::MediaOrientation), Grouping::MediaOrientation);
        files["stance_target.csv"] =
            stance::stance_csv(stance::stance_table(records, corp, Grouping::Target), Grouping::Target);
        files["stance_grid.csv"] =
            stance::stance_grid_csv(stance::stance_table(records, corp, Grouping::OrientationByTarget), targets());
    } else {
        throw UsageError(fmt::format("unknown stage '{}'", name));
    }
    return files;
}

// ------------------------------------------------------------- export

ExportResult export_report(const ProjectStore& store, const fs::path& out_dir) {
    std::vector<std::string> missing;
    for (const char* s : {"ingest", "extract", "embed", "cluster", "name-clusters", "curate"})
        if (!store.stage(s)) missing.push_back(s);
    if (!missing.empty())
        throw DependencyError(fmt::format("export needs completed stages: {}", fmt::join(missing, ", ")), missing.front());

    struct Family {
        const char* name;
        std::vector<std::pair<const char*, const char*>> files;  // stage, file
    };
    const std::vector<Family> families = {
        {"frequency", {{"tables", "frequency.csv"}, {"tables", "theme_coherence.csv"}}},
        {"engagement", {{"engagement", "engagement.csv"}}},
        {"stance",
         {{"stance-tables", "stance_orientation.csv"},
          {"stance-tables", "stance_target.csv"},
          {"stance-tables", "stance_grid.csv"},
          {"stance-eval", "stance_eval.json"}}},
        {"tsne", {{"viz", "tsne_layout.csv"}, {"viz", "channel_vectors.csv"}}},
        {"quality", {{"quality", "quality.csv"}}},
    };

    fs::create_directories(out_dir);
    ExportResult result;
    ordered_json fams = ordered_json::object();
    for (const auto& fam : families) {
        ordered_json files = ordered_json::object();
        for (const auto& [stage, file] : fam.files) {
            if (!store.has_output(stage, file)) {
                result.warnings.push_back(fmt::format("{}: {} missing (stage '{}' has not run)", fam.name, file, stage));
                continue;
            }
            const auto content = store.read_output(stage, file);
            util::write_file_atomic(out_dir / file, content);
            files[file] = {{"stage", stage}, {"input_key", store.stage(stage)->input_key},
                           {"sha256", util::sha256_hex(content)}};
            result.files.push_back(file);
        }
        fams[fam.name] = files;
    }
    ordered_json m;
    m["store_version"] = kStoreVersion;
    m["corpus_hash"] = store.manifest().corpus_hash;
    m["config"] = store.manifest().config_json.empty() ? ordered_json(nullptr)
                                                       : ordered_json::parse(store.manifest().config_json);
    ordered_json stages = ordered_json::object();
    for (const auto& [name, rec] : store.manifest().stages) stages[name] = rec.input_key;
    m["stages"] = stages;
    m["families"] = fams;
    m["warnings"] = result.warnings;
    util::write_file_atomic(out_dir / "manifest.json", m.dump(2) + "\n");
    result.files.push_back("manifest.json");
    for (const auto& w : result.warnings) spdlog::warn("export: {}", w);
    return result;
}

}  // namespace forge::service
