#include "forge/clusters.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <limits>
#include <numeric>

#include "forge/error.hpp"
#include "forge/text.hpp"
#include "forge/util/hash.hpp"
#include "forge/util/io.hpp"
#include "forge/util/parallel.hpp"
#include "forge/util/random.hpp"
#include "json.hpp"

namespace forge::clusters {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<std::size_t> Clustering::sizes() const {
    std::vector<std::size_t> s(k, 0);
    for (auto a : assignments) ++s.at(a);
    return s;
}

std::vector<std::size_t> Clustering::members(std::size_t cluster_id) const {
    std::vector<std::size_t> m;
    for (std::size_t i = 0; i < assignments.size(); ++i)
        if (assignments[i] == cluster_id) m.push_back(i);
    return m;
}

double inertia_of(std::span<const Vec> vectors, const std::vector<std::size_t>& assignments,
                  const std::vector<Vec>& centroids) {
    double total = 0.0;
    for (std::size_t i = 0; i < vectors.size(); ++i) total += 1.0 - cosine(vectors[i], centroids[assignments[i]]);
    return total;
}

std::size_t count_distinct(std::span<const Vec> vectors) {
    std::vector<Vec> copy(vectors.begin(), vectors.end());
    std::sort(copy.begin(), copy.end());
    return static_cast<std::size_t>(std::unique(copy.begin(), copy.end()) - copy.begin());
}

namespace {

std::vector<Vec> prepare(std::span<const Vec> vectors) {
    if (vectors.empty()) throw PreconditionError("kmeans: no vectors");
    const std::size_t dim = vectors.front().size();
    std::vector<Vec> out;
    out.reserve(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (vectors[i].size() != dim)
            throw PreconditionError(fmt::format("kmeans: vector {} has dimension {}, expected {}", i,
                                                vectors[i].size(), dim));
        if (l2_norm(vectors[i]) == 0.0) throw PreconditionError(fmt::format("kmeans: vector {} is zero", i));
        out.push_back(normalized(vectors[i]));
    }
    return out;
}

std::vector<Vec> seed_centroids(const std::vector<Vec>& x, std::size_t k, util::Rng& rng) {
    const std::size_t n = x.size();
    std::vector<std::size_t> chosen{rng.index(n)};
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) dist[i] = std::max(0.0, 1.0 - dot(x[i], x[chosen[0]]));
    while (chosen.size() < k) {
        double total = 0.0;
        for (double d : dist) total += d * d;
        std::size_t pick = n;
        if (total > 0.0) {
            const double r = rng.uniform() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += dist[i] * dist[i];
                if (dist[i] > 0.0 && acc > r) {
                    pick = i;
                    break;
                }
            }
            if (pick == n)  // rounding at the tail
                for (std::size_t i = n; i-- > 0;)
                    if (dist[i] > 0.0) {
                        pick = i;
                        break;
                    }
        }
        if (pick == n) {
            // Near-duplicates can round to zero distance; take the first vector
            // not identical to any chosen centre.
            for (std::size_t i = 0; i < n && pick == n; ++i)
                if (std::none_of(chosen.begin(), chosen.end(), [&](std::size_t c) { return x[c] == x[i]; }))
                    pick = i;
        }
        chosen.push_back(pick);
        for (std::size_t i = 0; i < n; ++i) dist[i] = std::min(dist[i], std::max(0.0, 1.0 - dot(x[i], x[pick])));
    }
    std::vector<Vec> centroids;
    for (auto c : chosen) centroids.push_back(x[c]);
    return centroids;
}

std::vector<std::size_t> assign(const std::vector<Vec>& x, const std::vector<Vec>& centroids, std::size_t workers) {
    const std::size_t n = x.size();
    std::vector<std::size_t> out(n, 0);
    constexpr std::size_t kChunk = 256;
    const std::size_t chunks = (n + kChunk - 1) / kChunk;
    util::parallel_for(chunks, workers, [&](std::size_t c) {
        const std::size_t end = std::min(n, (c + 1) * kChunk);
        for (std::size_t i = c * kChunk; i < end; ++i) {
            std::size_t best = 0;
            double best_sim = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < centroids.size(); ++j) {
                const double s = dot(x[i], centroids[j]);
                if (s > best_sim) {
                    best_sim = s;
                    best = j;
                }
            }
            out[i] = best;
        }
    });
    return out;
}

void repair_empty(const std::vector<Vec>& x, std::vector<std::size_t>& assignments, const std::vector<Vec>& centroids,
                  std::size_t k) {
    std::vector<std::size_t> sizes(k, 0);
    for (auto a : assignments) ++sizes[a];
    for (std::size_t e = 0; e < k; ++e) {
        if (sizes[e] != 0) continue;
        std::size_t victim = x.size();
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (sizes[assignments[i]] < 2) continue;
            const double s = dot(x[i], centroids[assignments[i]]);
            if (s < worst) {
                worst = s;
                victim = i;
            }
        }
        if (victim == x.size()) throw InfeasibleError("kmeans: cannot repair empty cluster");
        --sizes[assignments[victim]];
        assignments[victim] = e;
        sizes[e] = 1;
    }
}

std::vector<Vec> update(const std::vector<Vec>& x, const std::vector<std::size_t>& assignments,
                        const std::vector<Vec>& previous) {
    const std::size_t dim = x.front().size();
    std::vector<Vec> sums(previous.size(), Vec(dim, 0.0));
    for (std::size_t i = 0; i < x.size(); ++i) {
        auto& s = sums[assignments[i]];
        for (std::size_t d = 0; d < dim; ++d) s[d] += x[i][d];
    }
    for (std::size_t c = 0; c < sums.size(); ++c) {
        // Members cancelling out leave every direction equally good; keep the old one.
        if (l2_norm(sums[c]) == 0.0)
            sums[c] = previous[c];
        else
            sums[c] = normalized(sums[c]);
    }
    return sums;
}

}  // namespace

Clustering kmeans(std::span<const Vec> vectors, std::size_t k, std::uint64_t seed, std::size_t max_iter,
                  std::size_t workers) {
    if (k == 0) throw PreconditionError("kmeans: k must be at least 1");
    const auto x = prepare(vectors);
    const std::size_t distinct = count_distinct(x);
    if (k > distinct)
        throw InfeasibleError(fmt::format("kmeans: k={} exceeds the {} distinct vectors", k, distinct));

    util::Rng rng(seed);
    Clustering result;
    result.k = k;
    result.seed = seed;
    auto centroids = seed_centroids(x, k, rng);
    auto assignments = assign(x, centroids, workers);

    for (std::size_t it = 0; it < std::max<std::size_t>(max_iter, 1); ++it) {
        repair_empty(x, assignments, centroids, k);
        centroids = update(x, assignments, centroids);
        const double inertia = inertia_of(x, assignments, centroids);
#ifndef NDEBUG
        if (!result.inertia_trace.empty() && inertia > result.inertia_trace.back() + 1e-9)
            spdlog::error("kmeans: inertia increased {} -> {}", result.inertia_trace.back(), inertia);
#endif
        result.inertia_trace.push_back(inertia);
        result.iterations_run = it + 1;
        auto next = assign(x, centroids, workers);
        if (next == assignments) {
            result.converged = true;
            break;
        }
        assignments = std::move(next);
    }
    result.assignments = std::move(assignments);
    result.centroids = std::move(centroids);
    result.inertia = result.inertia_trace.back();
    return result;
}

std::vector<std::pair<std::size_t, double>> elbow_curve(std::span<const Vec> vectors,
                                                        std::span<const std::size_t> k_values, std::uint64_t seed,
                                                        std::size_t max_iter) {
    std::vector<std::pair<std::size_t, double>> curve;
    for (auto k : k_values) curve.emplace_back(k, kmeans(vectors, k, seed, max_iter).inertia);
    return curve;
}

double silhouette(std::span<const Vec> vectors, const Clustering& clustering) {
    if (clustering.k < 2) throw PreconditionError("silhouette: undefined for fewer than two clusters");
    if (clustering.assignments.size() != vectors.size())
        throw PreconditionError("silhouette: assignments do not match vectors");
    const std::size_t n = vectors.size();
    const auto sizes = clustering.sizes();
    std::vector<Vec> x;
    x.reserve(n);
    for (const auto& v : vectors) x.push_back(normalized(v));

    double total = 0.0;
    std::vector<double> sums(clustering.k);
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) sums[clustering.assignments[j]] += 1.0 - dot(x[i], x[j]);
        const std::size_t own = clustering.assignments[i];
        if (sizes[own] < 2) continue;  // singleton: s = 0
        const double a = sums[own] / static_cast<double>(sizes[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < clustering.k; ++c)
            if (c != own && sizes[c] > 0) b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
        if (!std::isfinite(b)) continue;
        const double denom = std::max(a, b);
        if (denom > 0.0) total += (b - a) / denom;
    }
    return total / static_cast<double>(n);
}

std::vector<std::size_t> ReviewSet::all() const {
    std::vector<std::size_t> out(largest);
    out.insert(out.end(), smallest.begin(), smallest.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

ReviewSet review_sample(const Clustering& clustering, std::size_t per_side) {
    const auto sizes = clustering.sizes();
    std::vector<std::size_t> ids(sizes.size());
    std::iota(ids.begin(), ids.end(), 0);
    ReviewSet set;
    auto by_desc = ids;
    std::stable_sort(by_desc.begin(), by_desc.end(), [&](auto a, auto b) { return sizes[a] > sizes[b]; });
    auto by_asc = ids;
    std::stable_sort(by_asc.begin(), by_asc.end(), [&](auto a, auto b) { return sizes[a] < sizes[b]; });
    const std::size_t take = std::min(per_side, ids.size());
    set.largest.assign(by_desc.begin(), by_desc.begin() + static_cast<std::ptrdiff_t>(take));
    set.smallest.assign(by_asc.begin(), by_asc.begin() + static_cast<std::ptrdiff_t>(take));
    return set;
}

std::string_view to_string(NameSource s) { return s == NameSource::Model ? "Model" : "Human"; }

NameSource parse_name_source(std::string_view s) {
    if (s == "Model") return NameSource::Model;
    if (s == "Human") return NameSource::Human;
    throw ParseError(fmt::format("unknown name source '{}'", s), std::string(s));
}

std::vector<std::string> naming_sample(std::span<const std::string> members, std::size_t budget, std::uint64_t seed) {
    if (members.size() <= budget) return {members.begin(), members.end()};
    std::vector<std::size_t> idx(members.size());
    std::iota(idx.begin(), idx.end(), 0);
    util::Rng rng(seed);
    for (std::size_t i = 0; i < budget; ++i) std::swap(idx[i], idx[i + rng.index(idx.size() - i)]);
    idx.resize(budget);
    std::sort(idx.begin(), idx.end());
    std::vector<std::string> out;
    out.reserve(budget);
    for (auto i : idx) out.push_back(members[i]);
    return out;
}

std::string build_naming_prompt(std::span<const std::string> members, std::size_t budget, std::uint64_t seed) {
    std::string prompt =
        "You are given a list of topics that were grouped into one cluster. "
        "Return a name that reflects the dominant theme or majority focus of the cluster. "
        "Respond with the name only, on a single line.\n\nTopics:";
    for (const auto& m : naming_sample(members, budget, seed)) {
        prompt += "\n- ";
        prompt += m;
    }
    return prompt;
}

std::string parse_cluster_name(std::string_view completion) {
    for (auto raw_line : util::split_lines(completion)) {
        std::string_view line = text::trim(raw_line);
        while (!line.empty() && (line.front() == '-' || line.front() == '*' || line.front() == '#'))
            line = text::trim(line.substr(1));
        for (std::string_view prefix : {"Name:", "name:", "NAME:", "Cluster name:"})
            if (line.starts_with(prefix)) line = text::trim(line.substr(prefix.size()));
        while (!line.empty() && (line.front() == '"' || line.front() == '\'' || line.front() == '*'))
            line.remove_prefix(1);
        while (!line.empty() && (line.back() == '"' || line.back() == '\'' || line.back() == '*'))
            line.remove_suffix(1);
        line = text::trim(line);
        if (!line.empty()) return std::string(line);
    }
    throw ParseError("no cluster name in completion", std::string(completion));
}

ClusterName name_cluster(std::size_t cluster_id, std::span<const std::string> member_topics, gateway::Gateway& gw,
                         const gateway::BackendDescriptor& backend, std::size_t budget, std::uint64_t seed) {
    if (member_topics.empty())
        throw PreconditionError(fmt::format("name_cluster: cluster {} has no members", cluster_id));
    const auto prompt = build_naming_prompt(member_topics, budget, util::hash_combine(seed, cluster_id));
    const auto completion = gw.generate({prompt, 32, 0.0}, backend);
    return {cluster_id, parse_cluster_name(completion), NameSource::Model};
}

std::string serialize_clustering(const Clustering& c) {
    ordered_json j;
    j["k"] = c.k;
    j["seed"] = c.seed;
    j["iterations_run"] = c.iterations_run;
    j["converged"] = c.converged;
    j["inertia"] = c.inertia;
    j["inertia_trace"] = c.inertia_trace;
    j["assignments"] = c.assignments;
    j["centroids"] = c.centroids;
    return j.dump() + "\n";
}

Clustering parse_clustering(std::string_view json_text) {
    try {
        const auto j = json::parse(json_text);
        Clustering c;
        c.k = j.at("k").get<std::size_t>();
        c.seed = j.at("seed").get<std::uint64_t>();
        c.iterations_run = j.at("iterations_run").get<std::size_t>();
        c.converged = j.at("converged").get<bool>();
        c.inertia = j.at("inertia").get<double>();
        c.inertia_trace = j.at("inertia_trace").get<std::vector<double>>();
        c.assignments = j.at("assignments").get<std::vector<std::size_t>>();
        c.centroids = j.at("centroids").get<std::vector<Vec>>();
        if (c.centroids.size() != c.k) throw IntegrityError("clustering: centroid count differs from k");
        for (auto a : c.assignments)
            if (a >= c.k) throw IntegrityError(fmt::format("clustering: assignment {} out of range", a));
        return c;
    } catch (const json::exception& e) {
        throw ParseError(fmt::format("clustering: {}", e.what()));
    }
}

std::string serialize_names(std::span<const ClusterName> names) {
    std::string out;
    for (const auto& n : names) {
        ordered_json j;
        j["cluster_id"] = n.cluster_id;
        j["name"] = n.name;
        j["source"] = to_string(n.source);
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<ClusterName> parse_names(std::string_view jsonl) {
    std::vector<ClusterName> names;
    for (auto line : util::split_lines(jsonl)) {
        if (text::trim(line).empty()) continue;
        try {
            const auto j = json::parse(line);
            names.push_back({j.at("cluster_id").get<std::size_t>(), j.at("name").get<std::string>(),
                             parse_name_source(j.at("source").get<std::string>())});
        } catch (const json::exception& e) {
            throw ParseError(fmt::format("cluster names: {}", e.what()), std::string(line));
        }
    }
    return names;
}

}  // namespace forge::clusters
