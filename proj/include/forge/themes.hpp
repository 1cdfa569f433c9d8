#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "forge/clusters.hpp"
#include "forge/corpus.hpp"
#include "forge/topics.hpp"
#include "forge/vector_math.hpp"

namespace forge::themes {

using ThemeId = std::string;

/// doc_id -> set of themes carried by that video's topics.
using VideoThemes = std::map<std::string, std::set<ThemeId>>;

enum class HistoryKind { Merge, Split, Rename };
enum class CurationKind { MergeClusters, RenameTheme, MoveCluster };

std::string_view to_string(HistoryKind k);
std::string_view to_string(CurationKind k);
HistoryKind parse_history_kind(std::string_view s);
CurationKind parse_curation_kind(std::string_view s);

struct HistoryEntry {
    HistoryKind kind = HistoryKind::Merge;
    std::vector<std::size_t> clusters;
    ThemeId theme_id;
    std::string name;
    std::string actor;
    std::string timestamp;
    std::uint64_t version = 0;  // map version after this entry

    bool operator==(const HistoryEntry&) const = default;
};

/// A curation request. `base_version` must equal the map's current version.
///   MergeClusters: move `clusters` into `theme_id` (new theme when empty or
///                  unknown, which then needs `name`); two or more clusters
///                  unless the target theme already exists.
///   MoveCluster:   move one cluster into an existing theme, or split it into
///                  a new theme named `name`.
///   RenameTheme:   set the display name of `theme_id`.
struct CurationAction {
    CurationKind kind = CurationKind::MergeClusters;
    std::vector<std::size_t> clusters;
    ThemeId theme_id;
    std::string name;
    std::uint64_t base_version = 0;
    std::string actor;
};

/// Persistent cluster -> theme mapping with an append-only action history.
class MergeMap {
public:
    MergeMap() = default;

    /// Every cluster its own theme "c<id>", named after the cluster.
    static MergeMap identity(std::span<const std::string> cluster_names);
    static ThemeId identity_theme(std::size_t cluster_id);

    /// Folds `history` over the identity map without version checks.
    static MergeMap replay(std::span<const std::string> cluster_names, std::span<const HistoryEntry> history);

    std::uint64_t version() const noexcept { return version_; }
    const std::map<std::size_t, ThemeId>& entries() const noexcept { return entries_; }
    const std::map<ThemeId, std::string>& theme_names() const noexcept { return theme_names_; }
    const std::vector<HistoryEntry>& history() const noexcept { return history_; }

    const ThemeId& theme_of(std::size_t cluster_id) const;
    const std::string& theme_name(const ThemeId& id) const;

    /// Cluster ids in [0, k) with no entry.
    std::vector<std::size_t> missing_clusters(std::size_t k) const;

    /// Validates and applies; throws ConflictError on a stale base_version
    /// and ValidationError on a malformed action. Returns the recorded entry.
    const HistoryEntry& apply(const CurationAction& action, std::string timestamp);

    std::string to_json() const;
    static MergeMap from_json(std::string_view text);

    bool operator==(const MergeMap&) const = default;

private:
    void execute(const HistoryEntry& entry);
    ThemeId fresh_theme_id() const;

    std::uint64_t version_ = 0;
    std::map<std::size_t, ThemeId> entries_;
    std::map<ThemeId, std::string> theme_names_;
    std::vector<HistoryEntry> history_;
};

struct Theme {
    ThemeId theme_id;
    std::string name;
    std::vector<std::size_t> member_clusters;  // ascending
    std::vector<std::size_t> member_topics;    // indices into the clustered topic list, ascending
};

/// Themes ordered by their lowest member cluster. Throws IntegrityError
/// naming the missing cluster ids when the map is not total.
std::vector<Theme> apply_merge(const clusters::Clustering& clustering, const MergeMap& map);

/// topics -> clusters -> themes, deduplicated.
std::set<ThemeId> assign_video_themes(std::span<const std::size_t> topic_indices,
                                      const clusters::Clustering& clustering, const MergeMap& map);

/// Theme sets for every document that produced topics. `topics` must be the
/// list the clustering was computed over.
VideoThemes assign_all(std::span<const topics::Topic> topics, const clusters::Clustering& clustering,
                       const MergeMap& map);

/// Member topics of one theme with their embeddings.
struct ThemeMembers {
    ThemeId theme_id;
    std::vector<std::string> keys;
    std::vector<Vec> vectors;
};

/// Index of the member with the highest mean cosine to all members (itself
/// included); ties go to the lexicographically smallest key.
std::size_t theme_medoid(const ThemeMembers& theme);

/// Mean cosine of every member to the medoid.
double intra_theme_coherence(const ThemeMembers& theme);

/// Cosine between the two themes' medoids.
double inter_theme_similarity(const ThemeMembers& a, const ThemeMembers& b);

struct CoherenceRow {
    ThemeId theme_id;
    std::string name;
    std::size_t size = 0;
    std::string medoid_key;
    double coherence = 0.0;
};

struct CoherenceSummary {
    std::vector<CoherenceRow> rows;
    double mean_equal_weighted = 0.0;
    double mean_size_weighted = 0.0;
    double mean_inter_theme = 0.0;  // over all unordered theme pairs
    std::optional<std::pair<ThemeId, ThemeId>> most_similar_pair;
    double most_similar_value = 0.0;
};

CoherenceSummary coherence_report(std::span<const ThemeMembers> themes, const MergeMap& map);
std::string coherence_csv(const CoherenceSummary& summary);

struct ValidationItem {
    std::string doc_id;
    corpus::Dataset dataset = corpus::Dataset::News;
    std::vector<std::string> assigned_themes;
    std::optional<bool> q1_accurate;
    std::optional<bool> q2_complete;
    std::string annotator;
};

/// Seeded uniform sample per dataset among transcribed videos of at most
/// `max_words` words, with empty answers. Throws PreconditionError when a
/// dataset has fewer eligible videos than requested.
std::vector<ValidationItem> export_validation_sample(const corpus::Corpus& corpus, const VideoThemes& video_themes,
                                                     const MergeMap& map,
                                                     const std::map<corpus::Dataset, std::size_t>& n_per_dataset,
                                                     std::size_t max_words, std::uint64_t seed);

/// Columns: doc_id, themes, q1, q2, annotator. Answers are "Yes", "No" or empty.
std::string validation_csv(std::span<const ValidationItem> items);
std::vector<ValidationItem> parse_validation_csv(std::string_view text);

struct ValidationSummary {
    std::size_t answered_q1 = 0;
    std::size_t yes_q1 = 0;
    std::size_t answered_q2 = 0;
    std::size_t yes_q2 = 0;
};
ValidationSummary summarize(std::span<const ValidationItem> items);

}  // namespace forge::themes
