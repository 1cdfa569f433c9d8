#include "forge/service/config.hpp"

#include <fmt/format.h>

#include "forge/error.hpp"
#include "forge/util/io.hpp"
#include "json.hpp"

namespace forge::service {

using nlohmann::json;
using nlohmann::ordered_json;
using gateway::BackendDescriptor;
using gateway::BackendKind;

gateway::BackendDescriptor Config::backend(const std::string& name) const {
    auto it = backends.find(name);
    if (it == backends.end()) throw ValidationError(fmt::format("no backend named '{}'", name));
    auto b = it->second;
    if (!b.is_remote() && !b.seed) b.seed = seed;
    return b;
}

gateway::GatewayOptions Config::gateway_options() const {
    gateway::GatewayOptions o;
    o.max_in_flight = max_in_flight;
    o.max_retries = max_retries;
    o.audit_path = audit;
    return o;
}

void Config::validate() const {
    if (!backend(generation).is_generation())
        throw ValidationError(fmt::format("backend '{}' is not a generation backend", generation));
    if (backend(embedding).is_generation())
        throw ValidationError(fmt::format("backend '{}' is not an embedding backend", embedding));
    for (const auto& [name, b] : backends) backend(name).validate();
    if (cluster.k == 0) throw ValidationError("cluster.k must be positive");
    if (workers == 0) throw ValidationError("workers must be positive");
    if (max_in_flight == 0 || max_in_flight > gateway::Gateway::kMaxInFlightLimit)
        throw ValidationError("max_in_flight out of range");
    if (!(stance.threshold >= 0.0 && stance.threshold <= 100.0)) throw ValidationError("stance.threshold outside [0, 100]");
    if (!(stance.credit >= 0.0 && stance.credit <= 1.0)) throw ValidationError("stance.credit outside [0, 1]");
    if (!(tsne.perplexity > 0.0)) throw ValidationError("tsne.perplexity must be positive");
    if (snapshot_date) corpus::parse_date(*snapshot_date);
}

namespace {

ordered_json backend_object(const BackendDescriptor& b) {
    ordered_json j;
    j["kind"] = gateway::to_string(b.kind);
    if (b.endpoint) j["endpoint"] = *b.endpoint;
    j["model_name"] = b.model_name;
    if (b.seed) j["seed"] = *b.seed;
    if (!b.api_key_env.empty()) j["api_key_env"] = b.api_key_env;
    if (!b.is_generation()) j["dimension"] = b.dimension;
    if (!b.fixed_responses.empty()) j["fixed_responses"] = b.fixed_responses;
    return j;
}

BackendDescriptor parse_backend(const json& j) {
    BackendDescriptor b;
    b.kind = gateway::parse_backend_kind(j.at("kind").get<std::string>());
    if (j.contains("endpoint")) b.endpoint = j.at("endpoint").get<std::string>();
    b.model_name = j.value("model_name", std::string("mock"));
    if (j.contains("seed")) b.seed = j.at("seed").get<std::uint64_t>();
    b.api_key_env = j.value("api_key_env", std::string());
    b.dimension = j.value("dimension", std::size_t{64});
    b.fixed_responses = j.value("fixed_responses", std::vector<std::string>{});
    return b;
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return (path.is_absolute() ? path : base / path).lexically_normal();
}

std::optional<fs::path> optional_path(const json& j, const char* key, const fs::path& base) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return resolve(base, j.at(key).get<std::string>());
}

}  // namespace

std::string backend_json(const BackendDescriptor& b) { return backend_object(b).dump(); }

std::string Config::to_json() const {
    ordered_json j;
    j["seed"] = seed;
    ordered_json in;
    in["channels"] = inputs.channels.string();
    in["videos"] = inputs.videos.string();
    in["targets"] = inputs.targets ? json(inputs.targets->string()) : json(nullptr);
    in["gold"] = inputs.gold ? json(inputs.gold->string()) : json(nullptr);
    in["quality_groups"] = inputs.quality_groups ? json(inputs.quality_groups->string()) : json(nullptr);
    j["inputs"] = in;
    j["snapshot_date"] = snapshot_date ? json(*snapshot_date) : json(nullptr);
    j["filters"] = {{"min_videos_political", filters.min_videos_political},
                    {"min_subs_national", filters.min_subs_national},
                    {"min_subs_local", filters.min_subs_local},
                    {"min_videos_viz", filters.min_videos_viz}};
    ordered_json bs = ordered_json::object();
    for (const auto& [name, b] : backends) bs[name] = backend_object(b);
    j["backends"] = bs;
    j["generation"] = generation;
    j["embedding"] = embedding;
    j["workers"] = workers;
    j["max_in_flight"] = max_in_flight;
    j["max_retries"] = max_retries;
    j["audit"] = audit ? json(audit->string()) : json(nullptr);
    j["cluster"] = {{"k", cluster.k}, {"max_iter", cluster.max_iter}, {"naming_budget", cluster.naming_budget}};
    j["analytics"] = {{"min_occurrence", analytics.min_occurrence}, {"pooled", analytics.pooled}};
    j["tsne"] = {{"perplexity", tsne.perplexity}, {"iterations", tsne.iterations}};
    j["stance"] = {{"threshold", stance.threshold}, {"credit", stance.credit}};
    j["validation"] = {{"per_dataset", validation.per_dataset}, {"max_words", validation.max_words}};
    return j.dump(2) + "\n";
}

Config Config::from_json(std::string_view text, const fs::path& base_dir) {
    Config c = default_config();
    try {
        const auto j = json::parse(text);
        c.seed = j.value("seed", c.seed);
        const auto& in = j.at("inputs");
        c.inputs.channels = resolve(base_dir, in.at("channels").get<std::string>());
        c.inputs.videos = resolve(base_dir, in.at("videos").get<std::string>());
        c.inputs.targets = optional_path(in, "targets", base_dir);
        c.inputs.gold = optional_path(in, "gold", base_dir);
        c.inputs.quality_groups = optional_path(in, "quality_groups", base_dir);
        if (j.contains("snapshot_date") && !j["snapshot_date"].is_null())
            c.snapshot_date = j["snapshot_date"].get<std::string>();
        if (j.contains("filters")) {
            const auto& f = j["filters"];
            c.filters.min_videos_political = f.value("min_videos_political", c.filters.min_videos_political);
            c.filters.min_subs_national = f.value("min_subs_national", c.filters.min_subs_national);
            c.filters.min_subs_local = f.value("min_subs_local", c.filters.min_subs_local);
            c.filters.min_videos_viz = f.value("min_videos_viz", c.filters.min_videos_viz);
        }
        if (j.contains("backends")) {
            c.backends.clear();
            for (const auto& [name, b] : j["backends"].items()) c.backends[name] = parse_backend(b);
        }
        c.generation = j.value("generation", c.generation);
        c.embedding = j.value("embedding", c.embedding);
        c.workers = j.value("workers", c.workers);
        c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
        c.max_retries = j.value("max_retries", c.max_retries);
        c.audit = optional_path(j, "audit", base_dir);
        if (j.contains("cluster")) {
            const auto& s = j["cluster"];
            c.cluster.k = s.value("k", c.cluster.k);
            c.cluster.max_iter = s.value("max_iter", c.cluster.max_iter);
            c.cluster.naming_budget = s.value("naming_budget", c.cluster.naming_budget);
        }
        if (j.contains("analytics")) {
            const auto& s = j["analytics"];
            c.analytics.min_occurrence = s.value("min_occurrence", c.analytics.min_occurrence);
            c.analytics.pooled = s.value("pooled", c.analytics.pooled);
        }
        if (j.contains("tsne")) {
            c.tsne.perplexity = j["tsne"].value("perplexity", c.tsne.perplexity);
            c.tsne.iterations = j["tsne"].value("iterations", c.tsne.iterations);
        }
        if (j.contains("stance")) {
            c.stance.threshold = j["stance"].value("threshold", c.stance.threshold);
            c.stance.credit = j["stance"].value("credit", c.stance.credit);
        }
        if (j.contains("validation")) {
            c.validation.per_dataset = j["validation"].value("per_dataset", c.validation.per_dataset);
            c.validation.max_words = j["validation"].value("max_words", c.validation.max_words);
        }
    } catch (const json::exception& e) {
        throw ParseError(fmt::format("config: {}", e.what()));
    }
    c.validate();
    return c;
}

Config Config::load(const fs::path& path) {
    return from_json(util::read_file(path), fs::absolute(path).parent_path());
}

Config default_config() {
    Config c;
    BackendDescriptor gen;
    gen.kind = BackendKind::MockGeneration;
    BackendDescriptor emb;
    emb.kind = BackendKind::MockEmbedding;
    c.backends = {{"mock-gen", gen}, {"mock-embed", emb}};
    return c;
}

}  // namespace forge::service
