#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/clusters.hpp"
#include "forge/corpus.hpp"
#include "forge/gateway.hpp"
#include "forge/service/config.hpp"
#include "forge/service/store.hpp"
#include "forge/stance.hpp"
#include "forge/themes.hpp"
#include "forge/topics.hpp"

namespace forge::service {

struct StageSpec {
    std::string name;
    std::vector<std::string> deps;
};

/// Stages in topological order.
const std::vector<StageSpec>& stage_graph();
const StageSpec& stage_spec(std::string_view name);

/// Every stage that depends on `name`, directly or transitively.
std::vector<std::string> dependents_of(std::string_view name);

enum class StageStatus { Missing, Current, Stale };
std::string_view to_string(StageStatus s);

struct StageResult {
    std::string stage;
    bool noop = false;
    std::string input_key;
    std::vector<std::string> files;
};

/// Topic embeddings keyed by casefolded topic text.
using EmbeddingTable = std::map<std::string, Vec>;
std::string embedding_key(std::string_view topic_text);

/// Runs pipeline stages against a store. Stage input keys cover the relevant
/// config subset, upstream output hashes and external input file hashes, so
/// an unchanged stage is skipped and a changed one drops its dependents.
class Pipeline {
public:
    Pipeline(ProjectStore& store, Config config, std::shared_ptr<gateway::Transport> transport = nullptr);

    const Config& config() const noexcept { return config_; }

    /// DependencyError naming the first missing or stale upstream stage.
    StageResult run_stage(std::string_view name);

    /// Runs every stage whose inputs are configured, in order.
    std::vector<StageResult> run_all();

    /// Whether the stage can run with the configured inputs (stance stages
    /// need targets; stance-eval also needs gold labels).
    bool enabled(std::string_view name) const;

    StageStatus status(std::string_view name) const;
    std::string input_key(std::string_view name) const;

    // Typed views of completed stage outputs.
    corpus::Corpus corpus() const;
    std::vector<topics::Topic> topics() const;
    EmbeddingTable embeddings() const;
    std::vector<Vec> topic_vectors(const std::vector<topics::Topic>& topics, const EmbeddingTable& table) const;
    clusters::Clustering clustering() const;
    std::vector<clusters::ClusterName> cluster_names() const;
    themes::MergeMap merge_map() const;
    themes::VideoThemes video_themes() const;
    std::vector<stance::TargetSpec> targets() const;

private:
    std::map<std::string, std::string> compute(std::string_view name);
    std::string config_subset(std::string_view name) const;
    std::map<std::string, std::string> external_inputs(std::string_view name) const;

    ProjectStore& store_;
    Config config_;
    std::unique_ptr<gateway::Gateway> gateway_;
};

/// Dense per-group theme data for coherence reporting.
std::vector<themes::ThemeMembers> theme_members(const std::vector<topics::Topic>& topics,
                                                const std::vector<Vec>& vectors,
                                                const clusters::Clustering& clustering, const themes::MergeMap& map);

struct ExportResult {
    std::vector<std::string> files;
    std::vector<std::string> warnings;
};

/// Copies the report CSVs of completed stages into `out_dir` with a
/// manifest.json of stage keys and file hashes. Requires the curate stage;
/// other missing families become warnings.
ExportResult export_report(const ProjectStore& store, const fs::path& out_dir);

}  // namespace forge::service
