#include <set>

#include "doctest.h"
#include "forge/clusters.hpp"
#include "forge/error.hpp"
#include "forge/util/random.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace forge;
using namespace forge::clusters;

namespace {

Clustering with_sizes(const std::vector<std::size_t>& sizes) {
    Clustering c;
    c.k = sizes.size();
    for (std::size_t id = 0; id < sizes.size(); ++id)
        for (std::size_t i = 0; i < sizes[id]; ++i) c.assignments.push_back(id);
    return c;
}

}  // namespace

TEST_CASE("k-means recovers separated blobs") {
    const auto blobs = fixture::three_blobs(90, 16, 11);
    const auto c = kmeans(blobs.points, 3, 5);
    CHECK(c.converged);
    CHECK(oracle::adjusted_rand_index(c.assignments, blobs.labels) == doctest::Approx(1.0));
    for (const auto& centroid : c.centroids) CHECK(l2_norm(centroid) == doctest::Approx(1.0));
    CHECK(inertia_of(blobs.points, c.assignments, c.centroids) == doctest::Approx(c.inertia));
}

TEST_CASE("k-means is deterministic and its inertia never rises") {
    util::Rng rng(99);
    std::vector<Vec> points;
    for (int i = 0; i < 200; ++i) {
        Vec v(8);
        for (auto& x : v) x = rng.normal();
        points.push_back(normalized(v));
    }
    const auto a = kmeans(points, 7, 42, 300, 1);
    const auto b = kmeans(points, 7, 42, 300, 3);
    CHECK(a.assignments == b.assignments);
    CHECK(a.centroids == b.centroids);
    CHECK(a.inertia == b.inertia);
    for (std::size_t i = 1; i < a.inertia_trace.size(); ++i) CHECK(a.inertia_trace[i] <= a.inertia_trace[i - 1]);
    for (auto s : a.sizes()) CHECK(s > 0);
    CHECK(parse_clustering(serialize_clustering(a)).assignments == a.assignments);
}

TEST_CASE("k-means preconditions") {
    std::vector<Vec> same(5, Vec{1.0, 0.0});
    same.push_back({0.0, 1.0});
    CHECK_THROWS_AS(kmeans(same, 3, 1), InfeasibleError);
    CHECK(count_distinct(same) == 2);
    CHECK_NOTHROW(kmeans(same, 2, 1));
    CHECK_THROWS_AS(kmeans(same, 0, 1), PreconditionError);
    std::vector<Vec> with_zero{{1.0, 0.0}, {0.0, 0.0}};
    CHECK_THROWS_AS(kmeans(with_zero, 1, 1), PreconditionError);
}

TEST_CASE("silhouette") {
    const auto blobs = fixture::three_blobs(60, 12, 3);
    const auto c = kmeans(blobs.points, 3, 1);
    const double s = silhouette(blobs.points, c);
    CHECK(s > 0.7);
    CHECK(s <= 1.0);
    auto one = c;
    one.k = 1;
    CHECK_THROWS_AS(silhouette(blobs.points, one), PreconditionError);

    // two tight pairs far apart: a = 0 for every point, so s = 1
    std::vector<Vec> pts{{1, 0}, {1, 0}, {0, 1}, {0, 1}};
    Clustering manual;
    manual.k = 2;
    manual.assignments = {0, 0, 1, 1};
    CHECK(silhouette(pts, manual) == doctest::Approx(1.0));
}

TEST_CASE("review sample takes the extremes with id tie-breaks") {
    const auto c = with_sizes({5, 1, 5, 2, 1, 3});
    const auto r = review_sample(c, 2);
    CHECK(r.largest == std::vector<std::size_t>{0, 2});
    CHECK(r.smallest == std::vector<std::size_t>{1, 4});
    CHECK(r.all() == std::vector<std::size_t>{0, 1, 2, 4});

    std::vector<std::size_t> sizes;
    for (std::size_t i = 0; i < 50; ++i) sizes.push_back(1 + i % 17);
    const auto big = review_sample(with_sizes(sizes));
    CHECK(big.largest.size() == 30);
    CHECK(big.smallest.size() == 30);
    CHECK(big.all().size() == 50);
    const auto small = review_sample(with_sizes({2, 2, 2}));
    CHECK(small.largest.size() == 3);
    CHECK(small.all().size() == 3);
}

TEST_CASE("naming sample and prompt") {
    std::vector<std::string> members;
    for (int i = 0; i < 250; ++i) members.push_back("topic " + std::to_string(i));
    const auto s = naming_sample(members, 200, 7);
    CHECK(s.size() == 200);
    CHECK(std::set<std::string>(s.begin(), s.end()).size() == 200);
    CHECK(s == naming_sample(members, 200, 7));
    CHECK(naming_sample(std::span(members).first(10), 200, 7).size() == 10);

    const std::vector<std::string> few{"Farm Protests", "Tractor Blockade"};
    CHECK(build_naming_prompt(few, 200, 0) ==
          "You are given a list of topics that were grouped into one cluster. "
          "Return a name that reflects the dominant theme or majority focus of the cluster. "
          "Respond with the name only, on a single line.\n\nTopics:\n- Farm Protests\n- Tractor Blockade");

    CHECK(parse_cluster_name("\n  Name: \"Farm Protests\"\nextra") == "Farm Protests");
    CHECK(parse_cluster_name("- **Energy Prices**") == "Energy Prices");
    CHECK_THROWS_AS(parse_cluster_name("  \n "), ParseError);

    gateway::Gateway gw;
    gateway::BackendDescriptor b;
    b.seed = 1;
    const auto name = name_cluster(4, few, gw, b);
    CHECK(name.cluster_id == 4);
    CHECK_FALSE(name.name.empty());
    CHECK(name.source == NameSource::Model);
    const std::vector<ClusterName> names{name, {5, "Custom", NameSource::Human}};
    CHECK(parse_names(serialize_names(names)) == names);
}
