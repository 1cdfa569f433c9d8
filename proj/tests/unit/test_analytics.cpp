#include <cmath>

#include "doctest.h"
#include "forge/analytics.hpp"
#include "forge/error.hpp"
#include "forge/tsne.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace forge;
using namespace forge::analytics;
using corpus::Dataset;
using corpus::Orientation;

namespace {

std::vector<Group> all_groups() {
    std::vector<Group> gs;
    for (auto d : {Dataset::News, Dataset::Political, Dataset::Local}) {
        gs.push_back({d, std::nullopt});
        for (auto o : {Orientation::Left, Orientation::Center, Orientation::Right, Orientation::FarRight})
            gs.push_back({d, o});
    }
    return gs;
}

const std::vector<PeriodFilter> kPeriods{std::nullopt, corpus::Period::PreElection, corpus::Period::European,
                                         corpus::Period::Legislative};

corpus::Corpus tiny(std::vector<std::pair<std::uint64_t, std::uint64_t>> views_comments) {
    std::vector<corpus::Channel> ch{{"c", "C", corpus::SourceKind::NationalNews, Orientation::Left, 50000, 10}};
    std::vector<corpus::TranscriptDoc> docs;
    for (std::size_t i = 0; i < views_comments.size(); ++i)
        docs.push_back(corpus::make_doc("v" + std::to_string(i), "c", "t", corpus::parse_date("2024-04-01"),
                                        views_comments[i].first, views_comments[i].second / 2,
                                        views_comments[i].second, "words here", corpus::TranscriptKind::Auto));
    return corpus::Corpus(ch, docs);
}

}  // namespace

TEST_CASE("percent in exact hundredths") {
    CHECK(percent_hundredths(718, 2422) == 2964);
    CHECK(format_hundredths(2964) == "29.64");
    CHECK(percent_hundredths(1, 8) == 1250);
    CHECK(percent_hundredths(1, 3) == 3333);
    CHECK(percent_hundredths(2, 3) == 6667);
    CHECK(percent_hundredths(1, 80000) == 0);
    CHECK(percent_hundredths(1, 40000) == 0);  // a quarter of a hundredth
    CHECK(percent_hundredths(1, 20000) == 1);  // 0.5 hundredths rounds away from zero
    CHECK(percent_hundredths(5, 5) == 10000);
    CHECK(format_hundredths(5) == "0.05");
    CHECK_THROWS(percent_hundredths(1, 0));
}

TEST_CASE("theme frequency agrees with a direct count") {
    const auto f = fixture::analytics_corpus(400, 21);
    for (const auto& g : all_groups()) {
        for (const auto& p : kPeriods) {
            std::size_t n = 0;
            std::map<std::string, std::size_t> occ;
            for (const auto& v : f.corpus.videos()) {
                if (v.transcript_kind == corpus::TranscriptKind::Missing) continue;
                const auto& ch = f.corpus.channel_of(v);
                if (corpus::dataset_of(ch.source_kind) != g.dataset) continue;
                if (g.orientation && ch.orientation != *g.orientation) continue;
                if (p && corpus::assign_period(v.published_at) != *p) continue;
                ++n;
                if (auto it = f.video_themes.find(v.video_id); it != f.video_themes.end())
                    for (const auto& t : it->second) ++occ[t];
            }
            const auto rows = theme_frequency(f.corpus, f.video_themes, f.names, g, p);
            CHECK(rows.size() == occ.size());
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const auto& r = rows[i];
                CHECK(r.group_size == n);
                CHECK(r.occurrences == occ.at(r.theme_id));
                CHECK(std::abs(r.percent() - 100.0 * static_cast<double>(r.occurrences) / static_cast<double>(n)) <=
                      0.005 + 1e-9);
                if (i) CHECK(rows[i - 1].occurrences >= r.occurrences);
            }
        }
    }
}

TEST_CASE("duplicating every video leaves percentages unchanged") {
    const auto f = fixture::analytics_corpus(200, 4);
    auto docs = f.corpus.videos();
    auto vt = f.video_themes;
    for (const auto& v : f.corpus.videos()) {
        auto copy = v;
        copy.video_id += "-dup";
        docs.push_back(copy);
        if (auto it = f.video_themes.find(v.video_id); it != f.video_themes.end()) vt[copy.video_id] = it->second;
    }
    const corpus::Corpus doubled(f.corpus.channels(), docs);
    for (const auto& g : all_groups()) {
        const auto a = theme_frequency(f.corpus, f.video_themes, f.names, g, std::nullopt);
        const auto b = theme_frequency(doubled, vt, f.names, g, std::nullopt);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].theme_id == b[i].theme_id);
            CHECK(a[i].percent_hundredths == b[i].percent_hundredths);
            CHECK(2 * a[i].occurrences == b[i].occurrences);
        }
    }
}

TEST_CASE("frequency csv layout") {
    const auto f = fixture::analytics_corpus(60, 2);
    const auto rows = theme_frequency(f.corpus, f.video_themes, f.names, {Dataset::News, std::nullopt}, std::nullopt);
    const auto csv = frequency_csv(rows);
    CHECK(csv.starts_with("group,period,theme_id,theme,occ,group_size,percent\n"));
    CHECK(csv.find("News,Entire,") != std::string::npos);
}

TEST_CASE("engagement ranking") {
    // views, comments
    const auto c = tiny({{100, 10}, {200, 10}, {0, 5}, {50, 0}, {1000, 100}});
    themes::VideoThemes vt{{"v0", {"a"}}, {"v1", {"a", "b"}}, {"v2", {"a", "b"}}, {"v3", {"b"}}, {"v4", {"c"}}};
    ThemeNames names{{"a", "Alpha"}, {"b", "Beta"}, {"c", "Gamma"}};
    EngagementOptions o;
    o.min_occurrence = 2;
    const Group g{Dataset::News, std::nullopt};
    const auto rows = engagement_ranking(c, vt, names, g, o);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].theme_id == "a");
    CHECK(rows[0].occurrences == 2);  // the zero-view video is left out
    CHECK(rows[0].mean_ratio == doctest::Approx((0.1 + 0.05) / 2));
    CHECK(rows[1].theme_id == "b");
    CHECK(rows[1].mean_ratio == doctest::Approx(0.025));

    o.averaging = Averaging::Pooled;
    const auto pooled = engagement_ranking(c, vt, names, g, o);
    CHECK(pooled[0].mean_ratio == doctest::Approx(20.0 / 300.0));

    o.min_occurrence = 1;
    o.averaging = Averaging::PerVideo;
    o.metric = Metric::LikePerView;
    const auto likes = engagement_ranking(c, vt, names, g, o);
    CHECK(likes.size() == 3);
    CHECK(likes[0].metric == Metric::LikePerView);
    CHECK(group_mean_ratio(c, g, Metric::CommentPerView).value() ==
          doctest::Approx((0.1 + 0.05 + 0.0 + 0.1) / 4));
    CHECK_FALSE(group_mean_ratio(c, {Dataset::Local, std::nullopt}, Metric::CommentPerView).has_value());
    CHECK(parse_metric("comment") == Metric::CommentPerView);
    CHECK(parse_metric("like") == Metric::LikePerView);
    CHECK(engagement_csv(rows).starts_with("group,metric,rank,theme_id,theme,occ,mean_ratio\n"));
}

TEST_CASE("channel theme vectors") {
    std::vector<std::set<std::string>> sets(20, std::set<std::string>{"A"});
    for (std::size_t i = 0; i < 10; ++i) sets[i].insert("B");
    const auto v = channel_theme_vector("ch", sets);
    REQUIRE(v.has_value());
    CHECK(v->probabilities.at("A") == doctest::Approx(20.0 / 30.0));
    CHECK(v->probabilities.at("B") == doctest::Approx(10.0 / 30.0));
    CHECK(v->themed_videos == 20);

    const std::vector<std::set<std::string>> two{{"A", "B"}, {"A"}};
    const auto small = channel_theme_vector("ch", two, 2);
    CHECK(small->probabilities.at("A") == doctest::Approx(2.0 / 3.0));
    CHECK(small->probabilities.at("B") == doctest::Approx(1.0 / 3.0));

    sets.pop_back();
    CHECK_FALSE(channel_theme_vector("ch", sets).has_value());

    const std::vector<ChannelThemeVector> vs{{"x", {{"b", 1.0}}, 20}, {"y", {{"a", 0.5}, {"c", 0.5}}, 20}};
    std::vector<std::string> cols;
    const auto dense = densify(vs, &cols);
    CHECK(cols == std::vector<std::string>{"a", "b", "c"});
    CHECK(dense[0] == Vec{0.0, 1.0, 0.0});
    CHECK(dense[1] == Vec{0.5, 0.0, 0.5});
}

TEST_CASE("cluster quality") {
    QualityInput in{{{1, 0}, {1, 0}, {1, 0}, {0, 1}}, {"A", "A", "B", "B"}, "A"};
    CHECK(cluster_quality(in) == 2.0);
    CHECK(cluster_quality(in) == doctest::Approx(oracle::quality(in.items, in.labels, "A")));

    QualityInput degenerate{{{1, 0}, {1, 0}, {0, 1}}, {"A", "A", "B"}, "A"};
    CHECK_THROWS_AS(cluster_quality(degenerate), DegenerateError);

    QualityInput singleton{{{1, 0}, {0, 1}}, {"A", "B"}, "A"};
    CHECK_THROWS_AS(cluster_quality(singleton), PreconditionError);
    QualityInput no_outside{{{1, 0}, {0, 1}}, {"A", "A"}, "A"};
    CHECK_THROWS_AS(cluster_quality(no_outside), PreconditionError);

    QualityInput same{{{1, 2}, {1, 2}, {1, 2}}, {"A", "A", "B"}, "A"};
    CHECK(cluster_quality(same) == doctest::Approx(1.0));

    const std::vector<ChannelThemeVector> vs{{"x", {{"a", 1.0}}, 20}, {"y", {{"a", 1.0}}, 20}, {"z", {{"a", 0.5}, {"b", 0.5}}, 20}};
    const auto rows = quality_report(vs, {{"pair", {"x", "y"}}});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].members == 2);
    CHECK(rows[0].q == doctest::Approx(std::sqrt(2.0)));
    CHECK_THROWS_AS(quality_report(vs, {{"bad", {"x", "q"}}}), PreconditionError);
}

TEST_CASE("t-SNE affinities hit the target perplexity") {
    const auto blobs = fixture::three_blobs(24, 6, 8);
    const auto a = compute_affinities(blobs.points, 5.0);
    double total = 0.0;
    for (std::size_t i = 0; i < a.conditional.size(); ++i) {
        double row = 0.0;
        for (double p : a.conditional[i]) row += p;
        CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(a.conditional[i][i] == 0.0);
        CHECK(std::abs(a.entropies[i] - std::log(5.0)) <= 1e-5);
        for (std::size_t j = 0; j < a.joint.size(); ++j) {
            CHECK(a.joint[i][j] == a.joint[j][i]);
            total += a.joint[i][j];
        }
    }
    CHECK(total == doctest::Approx(1.0));
    CHECK_THROWS_AS(compute_affinities(blobs.points, 24.0), UsageError);
}

TEST_CASE("t-SNE layout is deterministic and reduces divergence") {
    const auto blobs = fixture::three_blobs(30, 8, 2);
    TsneOptions o;
    o.perplexity = 5.0;
    o.iterations = 500;
    o.seed = 9;
    const auto a = tsne(blobs.points, o);
    const auto b = tsne(blobs.points, o);
    CHECK(a.points == b.points);
    CHECK(a.final_kl < a.initial_kl);
    CHECK(a.final_kl == doctest::Approx(kl_divergence(compute_affinities(blobs.points, 5.0).joint, a.points)));
    double cx = 0, cy = 0;
    for (const auto& p : a.points) {
        cx += p[0];
        cy += p[1];
    }
    CHECK(std::abs(cx) < 1e-6);
    CHECK(std::abs(cy) < 1e-6);
    const std::vector<Vec> two{{1, 0}, {0, 1}};
    CHECK_THROWS_AS(tsne(two, o), PreconditionError);
}
