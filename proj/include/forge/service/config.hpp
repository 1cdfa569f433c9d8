#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "forge/corpus.hpp"
#include "forge/gateway.hpp"

namespace forge::service {

namespace fs = std::filesystem;

struct InputPaths {
    fs::path channels;
    fs::path videos;
    std::optional<fs::path> targets;
    std::optional<fs::path> gold;
    std::optional<fs::path> quality_groups;
};

struct ClusterSettings {
    std::size_t k = 50;
    std::size_t max_iter = 300;
    std::size_t naming_budget = 200;
};

struct AnalyticsSettings {
    std::size_t min_occurrence = 10;
    bool pooled = false;
};

struct TsneSettings {
    double perplexity = 5.0;
    std::size_t iterations = 1000;
};

struct StanceSettings {
    double threshold = 85.0;
    double credit = 0.5;
};

struct ValidationSettings {
    std::size_t per_dataset = 0;  // 0 disables the validation sample
    std::size_t max_words = 1000;
};

/// Project configuration. Paths are stored absolute; relative paths in the
/// JSON file resolve against the file's directory.
struct Config {
    std::uint64_t seed = 0;
    InputPaths inputs;
    std::optional<std::string> snapshot_date;
    corpus::FilterRules filters;
    std::map<std::string, gateway::BackendDescriptor> backends;
    std::string generation = "mock-gen";
    std::string embedding = "mock-embed";
    std::size_t workers = 4;
    std::size_t max_in_flight = 8;
    int max_retries = 4;
    std::optional<fs::path> audit;
    ClusterSettings cluster;
    AnalyticsSettings analytics;
    TsneSettings tsne;
    StanceSettings stance;
    ValidationSettings validation;

    /// Backend by name, with the project seed filled in for unseeded mocks.
    gateway::BackendDescriptor backend(const std::string& name) const;
    gateway::GatewayOptions gateway_options() const;

    /// Throws ValidationError on inconsistent settings.
    void validate() const;

    /// Canonical JSON (fixed key order, absolute paths).
    std::string to_json() const;
    static Config from_json(std::string_view text, const fs::path& base_dir);
    static Config load(const fs::path& path);
};

/// Canonical one-line JSON of a backend descriptor.
std::string backend_json(const gateway::BackendDescriptor& b);

/// Mock generation and embedding backends named "mock-gen" and "mock-embed".
Config default_config();

}  // namespace forge::service
