#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "forge/gateway.hpp"
#include "forge/vector_math.hpp"

namespace forge::clusters {

struct Clustering {
    std::size_t k = 0;
    std::vector<std::size_t> assignments;  // point index -> cluster id
    std::vector<Vec> centroids;            // unit norm
    double inertia = 0.0;                  // sum of (1 - cos(x, centroid))
    std::uint64_t seed = 0;
    std::size_t iterations_run = 0;
    bool converged = false;
    /// Inertia after every completed iteration; non-increasing.
    std::vector<double> inertia_trace;

    std::vector<std::size_t> sizes() const;
    std::vector<std::size_t> members(std::size_t cluster_id) const;
};

/// Sum over points of 1 - cos(x, centroid of its cluster).
double inertia_of(std::span<const Vec> vectors, const std::vector<std::size_t>& assignments,
                  const std::vector<Vec>& centroids);

std::size_t count_distinct(std::span<const Vec> vectors);

/// Spherical k-means: k-means++ seeding, assignment to the max-cosine centroid
/// (ties to the lowest id), centroids as normalized member means. Stops when
/// no assignment changes or after max_iter iterations. An emptied cluster
/// takes the point farthest from its own centroid.
/// Throws InfeasibleError when k exceeds the number of distinct vectors.
Clustering kmeans(std::span<const Vec> vectors, std::size_t k, std::uint64_t seed, std::size_t max_iter = 300,
                  std::size_t workers = 1);

/// Converged inertia for each k under the same seed.
std::vector<std::pair<std::size_t, double>> elbow_curve(std::span<const Vec> vectors,
                                                        std::span<const std::size_t> k_values, std::uint64_t seed,
                                                        std::size_t max_iter = 300);

/// Mean silhouette with distance 1 - cos. Singleton clusters score 0 and a
/// 0/0 term counts as 0. Throws PreconditionError for k < 2.
double silhouette(std::span<const Vec> vectors, const Clustering& clustering);

struct ReviewSet {
    std::vector<std::size_t> largest;   // size descending, id ascending
    std::vector<std::size_t> smallest;  // size ascending, id ascending
    /// Union of both queues, ascending ids.
    std::vector<std::size_t> all() const;
};

ReviewSet review_sample(const Clustering& clustering, std::size_t per_side = 30);

enum class NameSource { Model, Human };
std::string_view to_string(NameSource s);
NameSource parse_name_source(std::string_view s);

struct ClusterName {
    std::size_t cluster_id = 0;
    std::string name;
    NameSource source = NameSource::Model;

    bool operator==(const ClusterName&) const = default;
};

inline constexpr std::size_t kDefaultNamingBudget = 200;

/// Members shown to the naming model: all of them when within budget,
/// otherwise a seeded sample of `budget` members kept in input order.
std::vector<std::string> naming_sample(std::span<const std::string> members, std::size_t budget, std::uint64_t seed);

std::string build_naming_prompt(std::span<const std::string> members, std::size_t budget, std::uint64_t seed);

/// First non-empty line with list markers, quotes and "Name:" prefixes removed.
std::string parse_cluster_name(std::string_view completion);

ClusterName name_cluster(std::size_t cluster_id, std::span<const std::string> member_topics, gateway::Gateway& gw,
                         const gateway::BackendDescriptor& backend, std::size_t budget = kDefaultNamingBudget,
                         std::uint64_t seed = 0);

std::string serialize_clustering(const Clustering& c);
Clustering parse_clustering(std::string_view json_text);

std::string serialize_names(std::span<const ClusterName> names);
std::vector<ClusterName> parse_names(std::string_view jsonl);

}  // namespace forge::clusters
