#include "forge/themes.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <numeric>

#include "forge/error.hpp"
#include "forge/util/csv.hpp"
#include "forge/util/hash.hpp"
#include "forge/util/random.hpp"
#include "json.hpp"

namespace forge::themes {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(HistoryKind k) {
    switch (k) {
        case HistoryKind::Merge: return "merge";
        case HistoryKind::Split: return "split";
        case HistoryKind::Rename: return "rename";
    }
    return "?";
}

std::string_view to_string(CurationKind k) {
    switch (k) {
        case CurationKind::MergeClusters: return "MergeClusters";
        case CurationKind::RenameTheme: return "RenameTheme";
        case CurationKind::MoveCluster: return "MoveCluster";
    }
    return "?";
}

HistoryKind parse_history_kind(std::string_view s) {
    for (auto k : {HistoryKind::Merge, HistoryKind::Split, HistoryKind::Rename})
        if (to_string(k) == s) return k;
    throw ParseError(fmt::format("unknown history kind '{}'", s), std::string(s));
}

CurationKind parse_curation_kind(std::string_view s) {
    for (auto k : {CurationKind::MergeClusters, CurationKind::RenameTheme, CurationKind::MoveCluster})
        if (to_string(k) == s) return k;
    throw ValidationError(fmt::format("unknown curation action '{}'", s));
}

// ---------------------------------------------------------------- MergeMap

ThemeId MergeMap::identity_theme(std::size_t cluster_id) { return fmt::format("c{}", cluster_id); }

MergeMap MergeMap::identity(std::span<const std::string> cluster_names) {
    MergeMap m;
    for (std::size_t c = 0; c < cluster_names.size(); ++c) {
        const auto id = identity_theme(c);
        m.entries_[c] = id;
        m.theme_names_[id] = cluster_names[c].empty() ? id : cluster_names[c];
    }
    return m;
}

MergeMap MergeMap::replay(std::span<const std::string> cluster_names, std::span<const HistoryEntry> history) {
    auto m = identity(cluster_names);
    for (const auto& e : history) {
        m.execute(e);
        m.history_.push_back(e);
        m.version_ = e.version;
    }
    return m;
}

const ThemeId& MergeMap::theme_of(std::size_t cluster_id) const {
    auto it = entries_.find(cluster_id);
    if (it == entries_.end()) throw IntegrityError(fmt::format("cluster {} has no theme", cluster_id));
    return it->second;
}

const std::string& MergeMap::theme_name(const ThemeId& id) const {
    auto it = theme_names_.find(id);
    if (it == theme_names_.end()) throw IntegrityError(fmt::format("theme {} has no name", id));
    return it->second;
}

std::vector<std::size_t> MergeMap::missing_clusters(std::size_t k) const {
    std::vector<std::size_t> missing;
    for (std::size_t c = 0; c < k; ++c)
        if (!entries_.contains(c)) missing.push_back(c);
    return missing;
}

ThemeId MergeMap::fresh_theme_id() const {
    ThemeId id = fmt::format("t{}", version_ + 1);
    while (theme_names_.contains(id)) id += "'";
    return id;
}

void MergeMap::execute(const HistoryEntry& e) {
    switch (e.kind) {
        case HistoryKind::Merge:
        case HistoryKind::Split:
            for (auto c : e.clusters) entries_[c] = e.theme_id;
            if (!e.name.empty() || !theme_names_.contains(e.theme_id)) theme_names_[e.theme_id] = e.name;
            break;
        case HistoryKind::Rename: theme_names_[e.theme_id] = e.name; break;
    }
    std::set<ThemeId> used;
    for (const auto& [_, t] : entries_) used.insert(t);
    std::erase_if(theme_names_, [&](const auto& kv) { return !used.contains(kv.first); });
}

const HistoryEntry& MergeMap::apply(const CurationAction& action, std::string timestamp) {
    if (action.base_version != version_)
        throw ConflictError(
            fmt::format("stale base_version {} (current version is {})", action.base_version, version_), version_);

    HistoryEntry e;
    e.actor = action.actor;
    e.timestamp = std::move(timestamp);
    e.name = std::string(text::trim(action.name));
    e.clusters = action.clusters;
    std::sort(e.clusters.begin(), e.clusters.end());
    if (std::adjacent_find(e.clusters.begin(), e.clusters.end()) != e.clusters.end())
        throw ValidationError("duplicate cluster ids in action");
    for (auto c : e.clusters)
        if (!entries_.contains(c)) throw ValidationError(fmt::format("unknown cluster {}", c));
    const bool target_exists = !action.theme_id.empty() && theme_names_.contains(action.theme_id);

    switch (action.kind) {
        case CurationKind::MergeClusters:
            if (e.clusters.empty()) throw ValidationError("merge needs at least one cluster");
            if (e.clusters.size() < 2 && !target_exists)
                throw ValidationError("merge needs two clusters or an existing target theme");
            if (!target_exists && e.name.empty()) throw ValidationError("a new theme needs a name");
            e.kind = HistoryKind::Merge;
            e.theme_id = action.theme_id.empty() ? fresh_theme_id() : action.theme_id;
            break;
        case CurationKind::MoveCluster:
            if (e.clusters.size() != 1) throw ValidationError("move takes exactly one cluster");
            if (target_exists) {
                e.kind = HistoryKind::Merge;
                e.theme_id = action.theme_id;
            } else {
                if (e.name.empty()) throw ValidationError("a new theme needs a name");
                e.kind = HistoryKind::Split;
                e.theme_id = action.theme_id.empty() ? fresh_theme_id() : action.theme_id;
            }
            break;
        case CurationKind::RenameTheme:
            if (!target_exists) throw ValidationError(fmt::format("unknown theme '{}'", action.theme_id));
            if (e.name.empty()) throw ValidationError("theme name must not be empty");
            if (!e.clusters.empty()) throw ValidationError("rename takes no clusters");
            e.kind = HistoryKind::Rename;
            e.theme_id = action.theme_id;
            break;
    }
    execute(e);
    e.version = ++version_;
    history_.push_back(std::move(e));
    return history_.back();
}

std::string MergeMap::to_json() const {
    ordered_json j;
    j["version"] = version_;
    ordered_json entries = ordered_json::object();
    for (const auto& [c, t] : entries_) entries[std::to_string(c)] = t;
    j["entries"] = entries;
    ordered_json names = ordered_json::object();
    for (const auto& [t, n] : theme_names_) names[t] = n;
    j["theme_names"] = names;
    ordered_json hist = ordered_json::array();
    for (const auto& e : history_) {
        ordered_json h;
        h["kind"] = to_string(e.kind);
        h["clusters"] = e.clusters;
        h["theme_id"] = e.theme_id;
        h["name"] = e.name;
        h["actor"] = e.actor;
        h["timestamp"] = e.timestamp;
        h["version"] = e.version;
        hist.push_back(std::move(h));
    }
    j["history"] = hist;
    return j.dump(2) + "\n";
}

MergeMap MergeMap::from_json(std::string_view text) {
    try {
        const auto j = json::parse(text);
        MergeMap m;
        m.version_ = j.at("version").get<std::uint64_t>();
        for (const auto& [c, t] : j.at("entries").items()) m.entries_[std::stoul(c)] = t.get<std::string>();
        for (const auto& [t, n] : j.at("theme_names").items()) m.theme_names_[t] = n.get<std::string>();
        for (const auto& h : j.at("history")) {
            m.history_.push_back({parse_history_kind(h.at("kind").get<std::string>()),
                                  h.at("clusters").get<std::vector<std::size_t>>(), h.at("theme_id").get<std::string>(),
                                  h.at("name").get<std::string>(), h.at("actor").get<std::string>(),
                                  h.at("timestamp").get<std::string>(), h.at("version").get<std::uint64_t>()});
        }
        for (const auto& [c, t] : m.entries_)
            if (!m.theme_names_.contains(t)) throw IntegrityError(fmt::format("merge map: theme {} is unnamed", t));
        return m;
    } catch (const json::exception& e) {
        throw ParseError(fmt::format("merge map: {}", e.what()));
    } catch (const std::invalid_argument&) {
        throw ParseError("merge map: non-numeric cluster id");
    }
}

// ------------------------------------------------------------------ themes

std::vector<Theme> apply_merge(const clusters::Clustering& clustering, const MergeMap& map) {
    const auto missing = map.missing_clusters(clustering.k);
    if (!missing.empty())
        throw IntegrityError(fmt::format("merge map incomplete: missing clusters {}", fmt::join(missing, ", ")));
    for (const auto& [c, _] : map.entries())
        if (c >= clustering.k) throw IntegrityError(fmt::format("merge map references unknown cluster {}", c));

    std::map<ThemeId, Theme> by_id;
    for (const auto& [c, t] : map.entries()) {
        auto& theme = by_id[t];
        theme.theme_id = t;
        theme.name = map.theme_name(t);
        theme.member_clusters.push_back(c);
    }
    for (std::size_t i = 0; i < clustering.assignments.size(); ++i)
        by_id[map.theme_of(clustering.assignments[i])].member_topics.push_back(i);

    std::vector<Theme> out;
    for (auto& [_, t] : by_id) out.push_back(std::move(t));
    std::sort(out.begin(), out.end(),
              [](const Theme& a, const Theme& b) { return a.member_clusters.front() < b.member_clusters.front(); });
    return out;
}

std::set<ThemeId> assign_video_themes(std::span<const std::size_t> topic_indices,
                                      const clusters::Clustering& clustering, const MergeMap& map) {
    std::set<ThemeId> out;
    for (auto i : topic_indices) {
        if (i >= clustering.assignments.size())
            throw IntegrityError(fmt::format("topic {} has no cluster assignment", i));
        out.insert(map.theme_of(clustering.assignments[i]));
    }
    return out;
}

VideoThemes assign_all(std::span<const topics::Topic> topics, const clusters::Clustering& clustering,
                       const MergeMap& map) {
    if (topics.size() != clustering.assignments.size())
        throw IntegrityError(fmt::format("{} topics but {} cluster assignments", topics.size(),
                                         clustering.assignments.size()));
    VideoThemes out;
    for (std::size_t i = 0; i < topics.size(); ++i)
        out[topics[i].doc_id].insert(map.theme_of(clustering.assignments[i]));
    return out;
}

// --------------------------------------------------------------- coherence

namespace {

struct MedoidResult {
    std::size_t index = 0;
    double mean_similarity = 0.0;
};

/// Groups identical vectors so each distinct direction is scored once and
/// identical members compare at exactly 1. Groups are visited in sorted
/// vector order, making the result independent of member order.
MedoidResult find_medoid(const ThemeMembers& theme) {
    const std::size_t m = theme.vectors.size();
    if (m == 0) throw PreconditionError(fmt::format("theme {} has no members", theme.theme_id));
    if (theme.keys.size() != m) throw PreconditionError("theme members: keys and vectors differ in length");

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) {
        if (theme.vectors[a] != theme.vectors[b]) return theme.vectors[a] < theme.vectors[b];
        return theme.keys[a] < theme.keys[b];
    });
    struct Group {
        Vec unit;
        std::size_t count = 0;
        std::size_t best_member = 0;  // smallest key in the group
    };
    std::vector<Group> groups;
    for (auto i : order) {
        if (!groups.empty() && theme.vectors[i] == theme.vectors[groups.back().best_member]) {
            auto& g = groups.back();
            ++g.count;
            if (theme.keys[i] < theme.keys[g.best_member]) g.best_member = i;
        } else {
            groups.push_back({normalized(theme.vectors[i]), 1, i});
        }
    }
    MedoidResult best{groups[0].best_member, -2.0};
    for (std::size_t a = 0; a < groups.size(); ++a) {
        double sum = 0.0;
        for (std::size_t b = 0; b < groups.size(); ++b) {
            const double sim = a == b ? 1.0 : std::clamp(dot(groups[a].unit, groups[b].unit), -1.0, 1.0);
            sum += static_cast<double>(groups[b].count) * sim;
        }
        const double mean = sum / static_cast<double>(m);
        const auto candidate = groups[a].best_member;
        if (mean > best.mean_similarity ||
            (mean == best.mean_similarity && theme.keys[candidate] < theme.keys[best.index]))
            best = {candidate, mean};
    }
    return best;
}

}  // namespace

std::size_t theme_medoid(const ThemeMembers& theme) { return find_medoid(theme).index; }

double intra_theme_coherence(const ThemeMembers& theme) { return find_medoid(theme).mean_similarity; }

double inter_theme_similarity(const ThemeMembers& a, const ThemeMembers& b) {
    if (a.theme_id == b.theme_id) throw UsageError(fmt::format("inter-theme similarity of {} with itself", a.theme_id));
    const auto& va = a.vectors[theme_medoid(a)];
    const auto& vb = b.vectors[theme_medoid(b)];
    if (va == vb) return 1.0;
    return std::clamp(cosine(va, vb), -1.0, 1.0);
}

CoherenceSummary coherence_report(std::span<const ThemeMembers> themes, const MergeMap& map) {
    CoherenceSummary s;
    std::vector<Vec> medoids;
    double size_total = 0.0;
    for (const auto& t : themes) {
        const auto r = find_medoid(t);
        s.rows.push_back({t.theme_id, map.theme_name(t.theme_id), t.vectors.size(), t.keys[r.index], r.mean_similarity});
        medoids.push_back(normalized(t.vectors[r.index]));
        s.mean_equal_weighted += r.mean_similarity;
        s.mean_size_weighted += r.mean_similarity * static_cast<double>(t.vectors.size());
        size_total += static_cast<double>(t.vectors.size());
    }
    if (!themes.empty()) {
        s.mean_equal_weighted /= static_cast<double>(themes.size());
        s.mean_size_weighted /= size_total;
    }
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < themes.size(); ++a) {
        for (std::size_t b = a + 1; b < themes.size(); ++b) {
            const double sim = std::clamp(dot(medoids[a], medoids[b]), -1.0, 1.0);
            s.mean_inter_theme += sim;
            ++pairs;
            if (!s.most_similar_pair || sim > s.most_similar_value) {
                s.most_similar_pair = {themes[a].theme_id, themes[b].theme_id};
                s.most_similar_value = sim;
            }
        }
    }
    if (pairs) s.mean_inter_theme /= static_cast<double>(pairs);
    return s;
}

std::string coherence_csv(const CoherenceSummary& s) {
    std::string out = util::csv_row({"theme_id", "theme", "size", "medoid", "coherence"});
    for (const auto& r : s.rows)
        out += util::csv_row({r.theme_id, r.name, std::to_string(r.size), r.medoid_key, util::format_fixed(r.coherence, 4)});
    out += util::csv_row({"*", "mean (equal weight)", "", "", util::format_fixed(s.mean_equal_weighted, 4)});
    out += util::csv_row({"*", "mean (size weighted)", "", "", util::format_fixed(s.mean_size_weighted, 4)});
    out += util::csv_row({"*", "mean inter-theme (medoid cosine)", "", "", util::format_fixed(s.mean_inter_theme, 4)});
    if (s.most_similar_pair)
        out += util::csv_row({"*", fmt::format("most similar pair {} / {}", s.most_similar_pair->first,
                                               s.most_similar_pair->second),
                              "", "", util::format_fixed(s.most_similar_value, 4)});
    return out;
}

// -------------------------------------------------------------- validation

std::vector<ValidationItem> export_validation_sample(const corpus::Corpus& corpus, const VideoThemes& video_themes,
                                                     const MergeMap& map,
                                                     const std::map<corpus::Dataset, std::size_t>& n_per_dataset,
                                                     std::size_t max_words, std::uint64_t seed) {
    std::vector<ValidationItem> items;
    for (const auto& [dataset, n] : n_per_dataset) {
        std::vector<const corpus::TranscriptDoc*> eligible;
        for (const auto& v : corpus.videos())
            if (v.has_transcript() && v.word_count <= max_words &&
                corpus::dataset_of(corpus.channel_of(v).source_kind) == dataset)
                eligible.push_back(&v);
        if (eligible.size() < n)
            throw PreconditionError(fmt::format("validation sample: {} requested from {} but only {} eligible", n,
                                                corpus::to_string(dataset), eligible.size()));
        std::sort(eligible.begin(), eligible.end(), [](auto a, auto b) { return a->video_id < b->video_id; });
        util::Rng rng(util::hash_combine(seed, static_cast<std::uint64_t>(dataset)));
        for (std::size_t i = 0; i < n; ++i) std::swap(eligible[i], eligible[i + rng.index(eligible.size() - i)]);
        eligible.resize(n);
        std::sort(eligible.begin(), eligible.end(), [](auto a, auto b) { return a->video_id < b->video_id; });
        for (const auto* doc : eligible) {
            ValidationItem item;
            item.doc_id = doc->video_id;
            item.dataset = dataset;
            if (auto it = video_themes.find(doc->video_id); it != video_themes.end())
                for (const auto& t : it->second) item.assigned_themes.push_back(map.theme_name(t));
            items.push_back(std::move(item));
        }
    }
    return items;
}

namespace {
std::string answer(const std::optional<bool>& a) { return a ? (*a ? "Yes" : "No") : ""; }
std::optional<bool> parse_answer(std::string_view s) {
    if (s.empty()) return std::nullopt;
    if (s == "Yes" || s == "yes" || s == "1") return true;
    if (s == "No" || s == "no" || s == "0") return false;
    throw ParseError(fmt::format("validation answer must be Yes or No, got '{}'", s), std::string(s));
}
}  // namespace

std::string validation_csv(std::span<const ValidationItem> items) {
    std::string out = util::csv_row({"doc_id", "themes", "q1", "q2", "annotator"});
    for (const auto& i : items)
        out += util::csv_row({i.doc_id, fmt::format("{}", fmt::join(i.assigned_themes, "; ")), answer(i.q1_accurate),
                              answer(i.q2_complete), i.annotator});
    return out;
}

std::vector<ValidationItem> parse_validation_csv(std::string_view text) {
    const auto rows = util::parse_csv(text);
    if (rows.empty() || rows[0] != std::vector<std::string>{"doc_id", "themes", "q1", "q2", "annotator"})
        throw ParseError("validation csv: unexpected header");
    std::vector<ValidationItem> items;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != 5) throw ParseError(fmt::format("validation csv row {}: expected 5 fields", r + 1));
        ValidationItem item;
        item.doc_id = row[0];
        std::string_view themes = row[1];
        while (!themes.empty()) {
            auto pos = themes.find("; ");
            item.assigned_themes.emplace_back(themes.substr(0, pos));
            if (pos == std::string_view::npos) break;
            themes.remove_prefix(pos + 2);
        }
        item.q1_accurate = parse_answer(row[2]);
        item.q2_complete = parse_answer(row[3]);
        item.annotator = row[4];
        items.push_back(std::move(item));
    }
    return items;
}

ValidationSummary summarize(std::span<const ValidationItem> items) {
    ValidationSummary s;
    for (const auto& i : items) {
        if (i.q1_accurate) {
            ++s.answered_q1;
            s.yes_q1 += *i.q1_accurate ? 1 : 0;
        }
        if (i.q2_complete) {
            ++s.answered_q2;
            s.yes_q2 += *i.q2_complete ? 1 : 0;
        }
    }
    return s;
}

}  // namespace forge::themes
