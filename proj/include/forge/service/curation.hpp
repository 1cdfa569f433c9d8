#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "forge/clusters.hpp"
#include "forge/service/config.hpp"
#include "forge/service/pipeline.hpp"
#include "forge/service/store.hpp"
#include "forge/themes.hpp"
#include "forge/topics.hpp"

namespace forge::service {

struct ApiResponse {
    int status = 200;
    std::string body;  // JSON
};

/// The curation API over a project store, independent of HTTP.
///
///   GET  /api/clusters?filter=all|largest|smallest
///   GET  /api/clusters/{id}
///   GET  /api/review
///   GET  /api/themes
///   GET  /api/history
///   GET  /api/metrics
///   GET  /api/layout
///   GET  /api/validation
///   POST /api/curation     CurationAction JSON; 409 on a stale base_version
///   POST /api/validation   {doc_id, q1, q2, annotator}
///
/// Reads share a lock; mutations hold it exclusively, so they apply one at a
/// time. Each accepted action rewrites the curate stage output and drops the
/// stages downstream of it.
class CurationService {
public:
    using Clock = std::function<std::string()>;

    /// Needs a current curate stage.
    CurationService(ProjectStore& store, Config config, Clock clock = {});

    ApiResponse handle(std::string_view method, std::string_view path,
                       const std::multimap<std::string, std::string>& query, std::string_view body);

    std::uint64_t version() const;

    /// Applies and persists one action. ConflictError / ValidationError on rejection.
    themes::HistoryEntry apply(const themes::CurationAction& action);

    static themes::CurationAction parse_action(std::string_view json_text);

private:
    struct ClusterInfo {
        std::size_t size = 0;
        std::string name;
        clusters::NameSource source = clusters::NameSource::Model;
        double coherence = 0.0;
        std::vector<std::size_t> members;
    };

    void load();
    std::string cluster_card(std::size_t id, bool full) const;
    ApiResponse get_clusters(std::string_view filter) const;
    ApiResponse get_cluster(std::string_view id_text) const;
    ApiResponse get_review() const;
    ApiResponse get_themes() const;
    ApiResponse get_history() const;
    ApiResponse get_metrics();
    ApiResponse get_layout();
    ApiResponse get_validation() const;
    ApiResponse post_curation(std::string_view body);
    ApiResponse post_validation(std::string_view body);
    void persist_curate(const std::string& merge_map_json, std::optional<std::string> validation_csv);

    ProjectStore& store_;
    Pipeline pipeline_;
    Clock clock_;
    mutable std::shared_mutex mutex_;

    std::vector<topics::Topic> topics_;
    std::vector<Vec> vectors_;
    clusters::Clustering clustering_;
    std::vector<ClusterInfo> clusters_;
    clusters::ReviewSet review_;
    themes::MergeMap map_;
};

/// ISO-8601 UTC timestamp of the current time, seconds precision.
std::string utc_now();

}  // namespace forge::service
