#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "forge/corpus.hpp"
#include "forge/themes.hpp"
#include "forge/vector_math.hpp"

namespace forge::analytics {

/// A dataset, optionally narrowed to one political orientation.
struct Group {
    corpus::Dataset dataset = corpus::Dataset::News;
    std::optional<corpus::Orientation> orientation;

    bool contains(const corpus::Channel& channel) const;
    std::string label() const;
    auto operator<=>(const Group&) const = default;
};

/// nullopt is the entire period.
using PeriodFilter = std::optional<corpus::Period>;
std::string period_label(const PeriodFilter& period);

/// 100 * occ / n in hundredths of a percent, rounded half away from zero.
/// Exact integer arithmetic; n must be positive.
std::int64_t percent_hundredths(std::uint64_t occurrences, std::uint64_t n);
/// Renders hundredths as "29.64".
std::string format_hundredths(std::int64_t hundredths);

struct FrequencyRow {
    Group group;
    PeriodFilter period;
    themes::ThemeId theme_id;
    std::string theme_name;
    std::size_t occurrences = 0;
    std::size_t group_size = 0;
    std::int64_t percent_hundredths = 0;

    double percent() const { return static_cast<double>(percent_hundredths) / 100.0; }
};

/// Theme names by id, as carried by a MergeMap.
using ThemeNames = std::map<themes::ThemeId, std::string>;

/// Per theme, the number of transcribed videos in (group, period) whose theme
/// set contains it. Sorted by occurrences descending, then theme name.
std::vector<FrequencyRow> theme_frequency(const corpus::Corpus& corpus, const themes::VideoThemes& video_themes,
                                          const ThemeNames& names, const Group& group, const PeriodFilter& period);

std::string frequency_csv(std::span<const FrequencyRow> rows);

enum class Metric { CommentPerView, LikePerView };
std::string_view to_string(Metric m);
Metric parse_metric(std::string_view s);  // also accepts "comment" and "like"

enum class Averaging { PerVideo, Pooled };

struct EngagementRow {
    Group group;
    themes::ThemeId theme_id;
    std::string theme_name;
    Metric metric = Metric::CommentPerView;
    double mean_ratio = 0.0;
    std::size_t occurrences = 0;  // videos with nonzero views carrying the theme
};

struct EngagementOptions {
    Metric metric = Metric::CommentPerView;
    std::size_t min_occurrence = 10;
    Averaging averaging = Averaging::PerVideo;
    PeriodFilter period;
};

/// Per theme, the mean of count/views over videos in the group that carry the
/// theme and have views; zero-view videos are left out. Themes seen on fewer
/// than min_occurrence such videos are dropped. Sorted by mean descending,
/// then theme name.
std::vector<EngagementRow> engagement_ranking(const corpus::Corpus& corpus, const themes::VideoThemes& video_themes,
                                              const ThemeNames& names, const Group& group,
                                              const EngagementOptions& options = {});

/// Mean per-video ratio over every video in the group with views.
std::optional<double> group_mean_ratio(const corpus::Corpus& corpus, const Group& group, Metric metric);

std::string engagement_csv(std::span<const EngagementRow> rows);

struct ChannelThemeVector {
    std::string channel_id;
    std::map<themes::ThemeId, double> probabilities;
    std::size_t themed_videos = 0;
};

/// Normalized counts of per-video unique themes over the channel's videos
/// with themes. nullopt when fewer than min_videos_viz videos have themes.
std::optional<ChannelThemeVector> channel_theme_vector(std::string_view channel_id,
                                                       std::span<const std::set<themes::ThemeId>> video_theme_sets,
                                                       std::size_t min_videos_viz = 20);

/// Vectors for every qualifying channel, in corpus channel order.
std::vector<ChannelThemeVector> channel_theme_vectors(const corpus::Corpus& corpus,
                                                      const themes::VideoThemes& video_themes,
                                                      std::size_t min_videos_viz = 20);

/// Dense rows over the union of theme ids, sorted by id.
std::vector<Vec> densify(std::span<const ChannelThemeVector> vectors, std::vector<themes::ThemeId>* columns = nullptr);

std::string channel_vectors_csv(std::span<const ChannelThemeVector> vectors);

struct QualityInput {
    std::vector<Vec> items;
    std::vector<std::string> labels;
    std::string cluster;
};

/// Mean pairwise cosine inside `cluster` (self-pairs excluded) over the mean
/// cosine between cluster members and every outside item. Throws
/// PreconditionError for fewer than two members or no outsider and
/// DegenerateError when the denominator is at most 1e-12.
double cluster_quality(const QualityInput& input);

struct QualityRow {
    std::string group;
    std::size_t members = 0;
    double q = 0.0;
};

/// One Q_c per declared group over the given channel vectors. Channels named
/// in a group but absent from `vectors` raise PreconditionError.
std::vector<QualityRow> quality_report(std::span<const ChannelThemeVector> vectors,
                                       const std::map<std::string, std::vector<std::string>>& groups);

std::string quality_csv(std::span<const QualityRow> rows);

}  // namespace forge::analytics
