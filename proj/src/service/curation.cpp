#include "forge/service/curation.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>

#include <charconv>
#include <chrono>
#include <mutex>

#include "forge/error.hpp"
#include "forge/util/csv.hpp"
#include "json.hpp"

namespace forge::service {

using nlohmann::json;
using nlohmann::ordered_json;

std::string utc_now() {
    const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", now);
}

namespace {

ApiResponse json_response(int status, const ordered_json& j) { return {status, j.dump() + "\n"}; }

ApiResponse error_response(int status, std::string_view message) {
    ordered_json j;
    j["error"] = message;
    return json_response(status, j);
}

ordered_json history_json(const themes::HistoryEntry& e) {
    ordered_json h;
    h["kind"] = themes::to_string(e.kind);
    h["clusters"] = e.clusters;
    h["theme_id"] = e.theme_id;
    h["name"] = e.name;
    h["actor"] = e.actor;
    h["timestamp"] = e.timestamp;
    h["version"] = e.version;
    return h;
}

/// CSV text to a list of header-keyed objects.
ordered_json csv_records(std::string_view csv) {
    const auto rows = util::parse_csv(csv);
    ordered_json out = ordered_json::array();
    for (std::size_t r = 1; r < rows.size(); ++r) {
        ordered_json o;
        for (std::size_t c = 0; c < rows[0].size() && c < rows[r].size(); ++c) o[rows[0][c]] = rows[r][c];
        out.push_back(std::move(o));
    }
    return out;
}

}  // namespace

CurationService::CurationService(ProjectStore& store, Config config, Clock clock)
    : store_(store), pipeline_(store, std::move(config)), clock_(clock ? std::move(clock) : Clock(utc_now)) {
    if (pipeline_.status("curate") != StageStatus::Current)
        throw DependencyError("the curation service needs a current 'curate' stage", "curate");
    load();
}

void CurationService::load() {
    topics_ = pipeline_.topics();
    vectors_ = pipeline_.topic_vectors(topics_, pipeline_.embeddings());
    clustering_ = pipeline_.clustering();
    map_ = pipeline_.merge_map();
    review_ = clusters::review_sample(clustering_);
    const auto names = pipeline_.cluster_names();
    clusters_.assign(clustering_.k, {});
    for (std::size_t id = 0; id < clustering_.k; ++id) {
        auto& info = clusters_[id];
        info.members = clustering_.members(id);
        info.size = info.members.size();
        themes::ThemeMembers m;
        m.theme_id = std::to_string(id);
        for (auto i : info.members) {
            m.keys.push_back(topics_[i].key());
            m.vectors.push_back(vectors_[i]);
        }
        if (!m.keys.empty()) info.coherence = themes::intra_theme_coherence(m);
    }
    for (const auto& n : names) {
        if (n.cluster_id >= clusters_.size()) throw IntegrityError(fmt::format("name for unknown cluster {}", n.cluster_id));
        clusters_[n.cluster_id].name = n.name;
        clusters_[n.cluster_id].source = n.source;
    }
}

std::uint64_t CurationService::version() const {
    std::shared_lock lock(mutex_);
    return map_.version();
}

std::string CurationService::cluster_card(std::size_t id, bool full) const {
    const auto& info = clusters_[id];
    const bool largest = std::find(review_.largest.begin(), review_.largest.end(), id) != review_.largest.end();
    const bool smallest = std::find(review_.smallest.begin(), review_.smallest.end(), id) != review_.smallest.end();
    ordered_json j;
    j["cluster_id"] = id;
    j["name"] = info.name;
    j["name_source"] = clusters::to_string(info.source);
    j["size"] = info.size;
    j["theme_id"] = map_.theme_of(id);
    j["theme_name"] = map_.theme_name(map_.theme_of(id));
    j["coherence"] = info.coherence;
    j["review"] = largest && smallest ? json("both") : largest ? json("largest") : smallest ? json("smallest") : json(nullptr);
    ordered_json sample = ordered_json::array();
    for (std::size_t k = 0; k < info.members.size() && k < 20; ++k) sample.push_back(topics_[info.members[k]].text);
    j["sample_topics"] = sample;
    if (full) {
        ordered_json topics = ordered_json::array();
        for (auto i : info.members) topics.push_back({{"key", topics_[i].key()}, {"text", topics_[i].text}});
        j["topics"] = topics;
    }
    return j.dump();
}

ApiResponse CurationService::get_clusters(std::string_view filter) const {
    std::vector<std::size_t> ids;
    if (filter.empty() || filter == "all") {
        for (std::size_t i = 0; i < clusters_.size(); ++i) ids.push_back(i);
    } else if (filter == "largest") {
        ids = review_.largest;
    } else if (filter == "smallest") {
        ids = review_.smallest;
    } else {
        return error_response(400, fmt::format("unknown filter '{}'", filter));
    }
    ordered_json j;
    j["version"] = map_.version();
    j["filter"] = filter.empty() ? "all" : std::string(filter);
    ordered_json list = ordered_json::array();
    for (auto id : ids) list.push_back(ordered_json::parse(cluster_card(id, false)));
    j["clusters"] = list;
    return json_response(200, j);
}

ApiResponse CurationService::get_cluster(std::string_view id_text) const {
    std::size_t id = 0;
    const auto [ptr, ec] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), id);
    if (ec != std::errc{} || ptr != id_text.data() + id_text.size()) return error_response(400, "cluster id must be a number");
    if (id >= clusters_.size()) return error_response(404, fmt::format("no cluster {}", id));
    auto j = ordered_json::parse(cluster_card(id, true));
    j["version"] = map_.version();
    return json_response(200, j);
}

ApiResponse CurationService::get_review() const {
    ordered_json j;
    j["largest"] = review_.largest;
    j["smallest"] = review_.smallest;
    return json_response(200, j);
}

ApiResponse CurationService::get_themes() const {
    ordered_json j;
    j["version"] = map_.version();
    ordered_json list = ordered_json::array();
    const auto members = theme_members(topics_, vectors_, clustering_, map_);
    std::map<std::string, double> coherence;
    for (const auto& m : members) coherence[m.theme_id] = themes::intra_theme_coherence(m);
    for (const auto& t : themes::apply_merge(clustering_, map_)) {
        ordered_json o;
        o["theme_id"] = t.theme_id;
        o["name"] = t.name;
        o["clusters"] = t.member_clusters;
        o["size"] = t.member_topics.size();
        o["coherence"] = coherence.contains(t.theme_id) ? json(coherence[t.theme_id]) : json(nullptr);
        list.push_back(std::move(o));
    }
    j["themes"] = list;
    return json_response(200, j);
}

ApiResponse CurationService::get_history() const {
    ordered_json j;
    j["version"] = map_.version();
    ordered_json list = ordered_json::array();
    for (const auto& e : map_.history()) list.push_back(history_json(e));
    j["history"] = list;
    return json_response(200, j);
}

ApiResponse CurationService::get_metrics() {
    store_.reload();
    ordered_json j;
    j["version"] = map_.version();
    ordered_json stages = ordered_json::object();
    for (const auto& s : stage_graph()) stages[s.name] = to_string(pipeline_.status(s.name));
    j["stages"] = stages;
    auto table = [&](const char* stage, const char* file) -> ordered_json {
        if (pipeline_.status(stage) != StageStatus::Current || !store_.has_output(stage, file)) return nullptr;
        return csv_records(store_.read_output(stage, file));
    };
    j["frequency"] = table("tables", "frequency.csv");
    j["coherence"] = table("tables", "theme_coherence.csv");
    j["engagement"] = table("engagement", "engagement.csv");
    j["quality"] = table("quality", "quality.csv");
    j["stance"] = table("stance-tables", "stance_orientation.csv");
    return json_response(200, j);
}

ApiResponse CurationService::get_layout() {
    store_.reload();
    if (pipeline_.status("viz") != StageStatus::Current) return error_response(404, "no current layout; run viz");
    ordered_json j;
    j["points"] = csv_records(store_.read_output("viz", "tsne_layout.csv"));
    std::map<std::string, std::vector<std::pair<double, std::string>>> top;
    for (const auto& row : csv_records(store_.read_output("viz", "channel_vectors.csv")))
        top[row["channel_id"].get<std::string>()].emplace_back(std::stod(row["probability"].get<std::string>()),
                                                               row["theme_id"].get<std::string>());
    for (auto& p : j["points"]) {
        auto& v = top[p["channel_id"].get<std::string>()];
        std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        ordered_json themes = ordered_json::array();
        for (std::size_t k = 0; k < v.size() && k < 5; ++k) {
            const auto& id = v[k].second;
            const auto& names = map_.theme_names();
            themes.push_back({{"theme_id", id},
                              {"name", names.contains(id) ? names.at(id) : id},
                              {"probability", v[k].first}});
        }
        p["top_themes"] = themes;
    }
    return json_response(200, j);
}

ApiResponse CurationService::get_validation() const {
    if (!store_.has_output("curate", "validation.csv")) return error_response(404, "no validation sample configured");
    const auto items = themes::parse_validation_csv(store_.read_output("curate", "validation.csv"));
    ordered_json j;
    j["version"] = map_.version();
    ordered_json list = ordered_json::array();
    for (const auto& i : items) {
        ordered_json o;
        o["doc_id"] = i.doc_id;
        o["themes"] = i.assigned_themes;
        o["q1"] = i.q1_accurate ? json(*i.q1_accurate) : json(nullptr);
        o["q2"] = i.q2_complete ? json(*i.q2_complete) : json(nullptr);
        o["annotator"] = i.annotator;
        list.push_back(std::move(o));
    }
    j["items"] = list;
    const auto s = themes::summarize(items);
    j["summary"] = {{"answered_q1", s.answered_q1}, {"yes_q1", s.yes_q1},
                    {"answered_q2", s.answered_q2}, {"yes_q2", s.yes_q2}};
    return json_response(200, j);
}

themes::CurationAction CurationService::parse_action(std::string_view text) {
    try {
        const auto j = json::parse(text);
        themes::CurationAction a;
        a.kind = themes::parse_curation_kind(j.at("kind").get<std::string>());
        a.clusters = j.value("clusters", std::vector<std::size_t>{});
        a.theme_id = j.value("theme_id", std::string());
        a.name = j.value("name", std::string());
        a.base_version = j.at("base_version").get<std::uint64_t>();
        a.actor = j.value("actor", std::string());
        return a;
    } catch (const json::exception& e) {
        throw ValidationError(fmt::format("malformed action: {}", e.what()));
    }
}

void CurationService::persist_curate(const std::string& merge_map_json, std::optional<std::string> validation_csv) {
    const auto* rec = store_.stage("curate");
    if (!rec) throw DependencyError("curate stage disappeared", "curate");
    std::map<std::string, std::string> files{{"merge_map.json", merge_map_json}};
    if (validation_csv) files["validation.csv"] = std::move(*validation_csv);
    store_.commit("curate", rec->input_key, files, dependents_of("curate"));
}

themes::HistoryEntry CurationService::apply(const themes::CurationAction& action) {
    std::unique_lock lock(mutex_);
    store_.reload();
    auto next = map_;
    const auto entry = next.apply(action, clock_());
    std::optional<std::string> validation;
    if (store_.has_output("curate", "validation.csv")) {
        auto items = themes::parse_validation_csv(store_.read_output("curate", "validation.csv"));
        const auto vt = themes::assign_all(topics_, clustering_, next);
        for (auto& i : items) {
            i.assigned_themes.clear();
            if (auto it = vt.find(i.doc_id); it != vt.end())
                for (const auto& t : it->second) i.assigned_themes.push_back(next.theme_name(t));
        }
        validation = themes::validation_csv(items);
    }
    persist_curate(next.to_json(), std::move(validation));
    map_ = std::move(next);
    return entry;
}

ApiResponse CurationService::post_curation(std::string_view body) {
    try {
        const auto entry = apply(parse_action(body));
        ordered_json j;
        j["version"] = entry.version;
        j["entry"] = history_json(entry);
        return json_response(200, j);
    } catch (const ConflictError& e) {
        ordered_json j;
        j["error"] = e.what();
        j["current_version"] = e.current_version();
        return json_response(409, j);
    } catch (const ValidationError& e) {
        return error_response(400, e.what());
    }
}

ApiResponse CurationService::post_validation(std::string_view body) {
    std::unique_lock lock(mutex_);
    store_.reload();
    if (!store_.has_output("curate", "validation.csv")) return error_response(404, "no validation sample configured");
    std::string doc_id;
    std::optional<bool> q1, q2;
    std::string annotator;
    try {
        const auto j = json::parse(body);
        doc_id = j.at("doc_id").get<std::string>();
        if (j.contains("q1") && !j["q1"].is_null()) q1 = j["q1"].get<bool>();
        if (j.contains("q2") && !j["q2"].is_null()) q2 = j["q2"].get<bool>();
        annotator = j.value("annotator", std::string());
    } catch (const json::exception& e) {
        return error_response(400, fmt::format("malformed answer: {}", e.what()));
    }
    auto items = themes::parse_validation_csv(store_.read_output("curate", "validation.csv"));
    auto it = std::find_if(items.begin(), items.end(), [&](const auto& i) { return i.doc_id == doc_id; });
    if (it == items.end()) return error_response(404, fmt::format("{} is not in the validation sample", doc_id));
    it->q1_accurate = q1;
    it->q2_complete = q2;
    it->annotator = annotator;
    persist_curate(store_.read_output("curate", "merge_map.json"), themes::validation_csv(items));
    ordered_json j;
    j["doc_id"] = doc_id;
    j["version"] = map_.version();
    return json_response(200, j);
}

ApiResponse CurationService::handle(std::string_view method, std::string_view path,
                                    const std::multimap<std::string, std::string>& query, std::string_view body) {
    try {
        auto param = [&](const char* key) -> std::string {
            auto it = query.find(key);
            return it == query.end() ? std::string() : it->second;
        };
        if (method == "POST") {
            if (path == "/api/curation") return post_curation(body);
            if (path == "/api/validation") return post_validation(body);
            return error_response(404, fmt::format("no route POST {}", path));
        }
        if (method != "GET") return error_response(405, "method not allowed");
        if (path == "/api/metrics") {
            std::unique_lock lock(mutex_);
            return get_metrics();
        }
        if (path == "/api/layout") {
            std::unique_lock lock(mutex_);
            return get_layout();
        }
        std::shared_lock lock(mutex_);
        if (path == "/api/clusters") return get_clusters(param("filter"));
        if (path.starts_with("/api/clusters/")) return get_cluster(path.substr(std::string_view("/api/clusters/").size()));
        if (path == "/api/review") return get_review();
        if (path == "/api/themes") return get_themes();
        if (path == "/api/history") return get_history();
        if (path == "/api/validation") return get_validation();
        return error_response(404, fmt::format("no route GET {}", path));
    } catch (const Error& e) {
        return error_response(500, e.what());
    }
}

}  // namespace forge::service
