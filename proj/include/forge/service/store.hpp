#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/util/io.hpp"

namespace forge::service {

namespace fs = std::filesystem;

inline constexpr int kStoreVersion = 1;

struct OutputRef {
    std::string path;  // relative to the store root
    std::string sha256;

    bool operator==(const OutputRef&) const = default;
};

struct StageRecord {
    std::string input_key;
    std::map<std::string, OutputRef> outputs;  // file name -> location

    bool operator==(const StageRecord&) const = default;
};

struct Manifest {
    int store_version = kStoreVersion;
    std::string corpus_hash;
    std::string config_json;  // canonical config snapshot
    std::map<std::string, StageRecord> stages;

    std::string to_json() const;
    static Manifest from_json(std::string_view text);
};

/// On-disk project state: stages/<stage>/<content hash>/<file> plus a
/// manifest.json naming the current output of every completed stage.
/// Manifest updates are write-temp-then-rename.
class ProjectStore {
public:
    /// Opens or initializes the store at `root`.
    explicit ProjectStore(fs::path root);

    const fs::path& root() const noexcept { return root_; }
    const Manifest& manifest() const noexcept { return manifest_; }
    const StageRecord* stage(std::string_view name) const;

    /// Verified contents of one stage output; CorruptionError on a hash
    /// mismatch or a missing file.
    std::string read_output(std::string_view stage, std::string_view file) const;
    bool has_output(std::string_view stage, std::string_view file) const;

    /// Writes the files, then publishes a manifest in which `stage` points at
    /// them and every stage in `drop` is removed, then deletes unreferenced
    /// stage directories.
    void commit(const std::string& stage, const std::string& input_key,
                const std::map<std::string, std::string>& files, const std::vector<std::string>& drop = {},
                std::optional<std::string> corpus_hash = std::nullopt);

    /// Removes stages from the manifest.
    void drop(const std::vector<std::string>& stages);

    void set_config_snapshot(std::string config_json);
    std::optional<std::string> config_snapshot() const;

    /// Hash-checks every referenced output; CorruptionError on the first failure.
    void verify() const;

    /// Called between the manifest temp write and its rename.
    void set_fault_hook(util::FaultHook hook) { fault_hook_ = std::move(hook); }

    /// Re-reads manifest.json from disk.
    void reload();

private:
    void publish(Manifest next);
    void collect_garbage() const;

    fs::path root_;
    Manifest manifest_;
    util::FaultHook fault_hook_;
};

}  // namespace forge::service
