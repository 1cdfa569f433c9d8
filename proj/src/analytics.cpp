#include "forge/analytics.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "forge/error.hpp"
#include "forge/util/csv.hpp"

namespace forge::analytics {

using corpus::Corpus;
using corpus::TranscriptDoc;

bool Group::contains(const corpus::Channel& channel) const {
    if (corpus::dataset_of(channel.source_kind) != dataset) return false;
    return !orientation || channel.orientation == *orientation;
}

std::string Group::label() const {
    std::string out(corpus::to_string(dataset));
    if (orientation) out += fmt::format("/{}", corpus::to_string(*orientation));
    return out;
}

std::string period_label(const PeriodFilter& period) {
    return period ? std::string(corpus::to_string(*period)) : "Entire";
}

std::int64_t percent_hundredths(std::uint64_t occurrences, std::uint64_t n) {
    if (n == 0) throw PreconditionError("percent of an empty group");
    // round(10000 * occ / n) half away from zero, all terms nonnegative
    if (occurrences > (std::uint64_t{1} << 40) || n > (std::uint64_t{1} << 40))
        throw PreconditionError("percent operands out of range");
    return static_cast<std::int64_t>((occurrences * 20000u + n) / (2u * n));
}

std::string format_hundredths(std::int64_t h) {
    const char* sign = h < 0 ? "-" : "";
    const auto a = h < 0 ? -h : h;
    return fmt::format("{}{}.{:02}", sign, a / 100, a % 100);
}

namespace {

bool in_period(const TranscriptDoc& doc, const PeriodFilter& period) {
    return !period || corpus::assign_period(doc.published_at) == *period;
}

const std::string& name_of(const ThemeNames& names, const themes::ThemeId& id) {
    auto it = names.find(id);
    if (it == names.end()) throw IntegrityError(fmt::format("theme {} has no name", id));
    return it->second;
}

const std::set<themes::ThemeId>* themes_of(const themes::VideoThemes& vt, const std::string& doc_id) {
    auto it = vt.find(doc_id);
    return it == vt.end() ? nullptr : &it->second;
}

}  // namespace

std::vector<FrequencyRow> theme_frequency(const Corpus& corpus, const themes::VideoThemes& video_themes,
                                          const ThemeNames& names, const Group& group, const PeriodFilter& period) {
    std::size_t group_size = 0;
    std::map<themes::ThemeId, std::size_t> counts;
    for (const auto& doc : corpus.videos()) {
        if (!doc.has_transcript() || !in_period(doc, period) || !group.contains(corpus.channel_of(doc))) continue;
        ++group_size;
        if (const auto* ts = themes_of(video_themes, doc.video_id))
            for (const auto& t : *ts) ++counts[t];
    }
    std::vector<FrequencyRow> rows;
    for (const auto& [id, occ] : counts)
        rows.push_back({group, period, id, name_of(names, id), occ, group_size, percent_hundredths(occ, group_size)});
    std::sort(rows.begin(), rows.end(), [](const FrequencyRow& a, const FrequencyRow& b) {
        if (a.occurrences != b.occurrences) return a.occurrences > b.occurrences;
        if (a.theme_name != b.theme_name) return a.theme_name < b.theme_name;
        return a.theme_id < b.theme_id;
    });
    return rows;
}

std::string frequency_csv(std::span<const FrequencyRow> rows) {
    std::string out = util::csv_row({"group", "period", "theme_id", "theme", "occ", "group_size", "percent"});
    for (const auto& r : rows)
        out += util::csv_row({r.group.label(), period_label(r.period), r.theme_id, r.theme_name,
                              std::to_string(r.occurrences), std::to_string(r.group_size),
                              format_hundredths(r.percent_hundredths)});
    return out;
}

std::string_view to_string(Metric m) {
    return m == Metric::CommentPerView ? "CommentPerView" : "LikePerView";
}

Metric parse_metric(std::string_view s) {
    if (s == "CommentPerView" || s == "comment" || s == "comments") return Metric::CommentPerView;
    if (s == "LikePerView" || s == "like" || s == "likes") return Metric::LikePerView;
    throw UsageError(fmt::format("unknown engagement metric '{}'", s));
}

namespace {
std::uint64_t metric_count(const TranscriptDoc& doc, Metric m) {
    return m == Metric::CommentPerView ? doc.comment_count : doc.like_count;
}
}  // namespace

std::vector<EngagementRow> engagement_ranking(const Corpus& corpus, const themes::VideoThemes& video_themes,
                                              const ThemeNames& names, const Group& group,
                                              const EngagementOptions& options) {
    struct Acc {
        double ratio_sum = 0.0;
        std::uint64_t count_sum = 0;
        std::uint64_t view_sum = 0;
        std::size_t n = 0;
    };
    std::map<themes::ThemeId, Acc> acc;
    for (const auto& doc : corpus.videos()) {
        if (doc.view_count == 0 || !in_period(doc, options.period) || !group.contains(corpus.channel_of(doc)))
            continue;
        const auto* ts = themes_of(video_themes, doc.video_id);
        if (!ts) continue;
        const auto count = metric_count(doc, options.metric);
        const double ratio = static_cast<double>(count) / static_cast<double>(doc.view_count);
        for (const auto& t : *ts) {
            auto& a = acc[t];
            a.ratio_sum += ratio;
            a.count_sum += count;
            a.view_sum += doc.view_count;
            ++a.n;
        }
    }
    std::vector<EngagementRow> rows;
    for (const auto& [id, a] : acc) {
        if (a.n < options.min_occurrence) continue;
        const double mean = options.averaging == Averaging::PerVideo
                                ? a.ratio_sum / static_cast<double>(a.n)
                                : static_cast<double>(a.count_sum) / static_cast<double>(a.view_sum);
        rows.push_back({group, id, name_of(names, id), options.metric, mean, a.n});
    }
    std::sort(rows.begin(), rows.end(), [](const EngagementRow& a, const EngagementRow& b) {
        if (a.mean_ratio != b.mean_ratio) return a.mean_ratio > b.mean_ratio;
        if (a.theme_name != b.theme_name) return a.theme_name < b.theme_name;
        return a.theme_id < b.theme_id;
    });
    return rows;
}

std::optional<double> group_mean_ratio(const Corpus& corpus, const Group& group, Metric metric) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& doc : corpus.videos()) {
        if (doc.view_count == 0 || !group.contains(corpus.channel_of(doc))) continue;
        sum += static_cast<double>(metric_count(doc, metric)) / static_cast<double>(doc.view_count);
        ++n;
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

std::string engagement_csv(std::span<const EngagementRow> rows) {
    std::string out = util::csv_row({"group", "metric", "rank", "theme_id", "theme", "occ", "mean_ratio"});
    std::map<std::string, std::size_t> rank;
    for (const auto& r : rows) {
        const auto g = r.group.label();
        out += util::csv_row({g, std::string(to_string(r.metric)), std::to_string(++rank[g]), r.theme_id,
                              r.theme_name, std::to_string(r.occurrences), fmt::format("{:.6f}", r.mean_ratio)});
    }
    return out;
}

std::optional<ChannelThemeVector> channel_theme_vector(std::string_view channel_id,
                                                       std::span<const std::set<themes::ThemeId>> video_theme_sets,
                                                       std::size_t min_videos_viz) {
    ChannelThemeVector v;
    v.channel_id = std::string(channel_id);
    std::map<themes::ThemeId, std::size_t> counts;
    std::size_t total = 0;
    for (const auto& set : video_theme_sets) {
        if (set.empty()) continue;
        ++v.themed_videos;
        for (const auto& t : set) ++counts[t];
        total += set.size();
    }
    if (v.themed_videos < min_videos_viz || total == 0) return std::nullopt;
    for (const auto& [t, c] : counts) v.probabilities[t] = static_cast<double>(c) / static_cast<double>(total);
    return v;
}

std::vector<ChannelThemeVector> channel_theme_vectors(const Corpus& corpus, const themes::VideoThemes& video_themes,
                                                      std::size_t min_videos_viz) {
    std::map<std::string, std::vector<std::set<themes::ThemeId>>> per_channel;
    for (const auto& doc : corpus.videos())
        if (const auto* ts = themes_of(video_themes, doc.video_id)) per_channel[doc.channel_id].push_back(*ts);
    std::vector<ChannelThemeVector> out;
    for (const auto& ch : corpus.channels()) {
        auto it = per_channel.find(ch.channel_id);
        if (it == per_channel.end()) continue;
        if (auto v = channel_theme_vector(ch.channel_id, it->second, min_videos_viz)) out.push_back(std::move(*v));
    }
    return out;
}

std::vector<Vec> densify(std::span<const ChannelThemeVector> vectors, std::vector<themes::ThemeId>* columns) {
    std::set<themes::ThemeId> ids;
    for (const auto& v : vectors)
        for (const auto& [t, _] : v.probabilities) ids.insert(t);
    const std::vector<themes::ThemeId> cols(ids.begin(), ids.end());
    std::vector<Vec> out;
    for (const auto& v : vectors) {
        Vec row(cols.size(), 0.0);
        for (std::size_t j = 0; j < cols.size(); ++j)
            if (auto it = v.probabilities.find(cols[j]); it != v.probabilities.end()) row[j] = it->second;
        out.push_back(std::move(row));
    }
    if (columns) *columns = cols;
    return out;
}

std::string channel_vectors_csv(std::span<const ChannelThemeVector> vectors) {
    std::string out = util::csv_row({"channel_id", "theme_id", "probability"});
    for (const auto& v : vectors)
        for (const auto& [t, p] : v.probabilities) out += util::csv_row({v.channel_id, t, fmt::format("{:.12g}", p)});
    return out;
}

double cluster_quality(const QualityInput& in) {
    if (in.items.size() != in.labels.size()) throw PreconditionError("quality input: items and labels differ in length");
    std::vector<std::size_t> inside, outside;
    for (std::size_t i = 0; i < in.items.size(); ++i) (in.labels[i] == in.cluster ? inside : outside).push_back(i);
    if (inside.size() < 2)
        throw PreconditionError(fmt::format("cluster '{}' needs at least two members, has {}", in.cluster, inside.size()));
    if (outside.empty()) throw PreconditionError(fmt::format("cluster '{}' has no outside items", in.cluster));

    double within = 0.0;
    for (std::size_t a = 0; a < inside.size(); ++a)
        for (std::size_t b = a + 1; b < inside.size(); ++b) within += cosine(in.items[inside[a]], in.items[inside[b]]);
    within /= static_cast<double>(inside.size() * (inside.size() - 1) / 2);

    double across = 0.0;
    for (auto i : inside)
        for (auto k : outside) across += cosine(in.items[i], in.items[k]);
    across /= static_cast<double>(inside.size() * outside.size());

    if (across <= 1e-12)
        throw DegenerateError(
            fmt::format("cluster '{}': mean similarity to outsiders is {:.3g}, quality ratio undefined", in.cluster, across));
    return within / across;
}

std::vector<QualityRow> quality_report(std::span<const ChannelThemeVector> vectors,
                                       const std::map<std::string, std::vector<std::string>>& groups) {
    const auto dense = densify(vectors);
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < vectors.size(); ++i) index[vectors[i].channel_id] = i;

    std::vector<QualityRow> rows;
    for (const auto& [name, members] : groups) {
        std::set<std::size_t> in_group;
        for (const auto& m : members) {
            auto it = index.find(m);
            if (it == index.end())
                throw PreconditionError(fmt::format("group '{}': channel {} has no theme vector", name, m));
            in_group.insert(it->second);
        }
        QualityInput q;
        q.cluster = name;
        q.items = dense;
        for (std::size_t i = 0; i < dense.size(); ++i) q.labels.push_back(in_group.contains(i) ? name : std::string());
        if (name.empty()) throw PreconditionError("group names must be nonempty");
        rows.push_back({name, in_group.size(), cluster_quality(q)});
    }
    return rows;
}

std::string quality_csv(std::span<const QualityRow> rows) {
    std::string out = util::csv_row({"group", "members", "q_c"});
    for (const auto& r : rows) out += util::csv_row({r.group, std::to_string(r.members), fmt::format("{:.6f}", r.q)});
    return out;
}

}  // namespace forge::analytics
